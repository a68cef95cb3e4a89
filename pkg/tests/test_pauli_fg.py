import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drabi.errors import NonUnitaryError, NotFGForm
from drabi.identities import format_report, run_suite
from drabi.pauli_fg import (
    C_I,
    C_INV_SQRT2,
    IDENTITY,
    ONE,
    R,
    SIGMA,
    ZERO,
    ZERO_M,
    AlgebraElement,
    ExactCoefficient,
    OperatorMatrix2,
    SymbolTable,
    check_fg_form,
    conjugate,
    fg_from_diagonal,
    grade_split,
    make_ufg,
    make_ujkl,
    match_up_to_unit,
    pauli_product,
    spin_diagonalize,
)

PAULI = [
    np.eye(2),
    np.array([[0, 1], [1, 0]]),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]]),
]


@pytest.fixture
def sym():
    T = SymbolTable()
    A, B, X = T.even("A", "B", "X")
    C, D, Y = T.odd("C", "D", "Y")
    return dict(A=A, B=B, X=X, C=C, D=D, Y=Y, T=T)


# --- exact coefficients ---------------------------------------------------


def test_root2_folds_even_powers():
    half = C_INV_SQRT2 * C_INV_SQRT2
    assert half == ExactCoefficient(Fraction(1, 2))
    assert (C_INV_SQRT2 * 2) * C_INV_SQRT2 == ExactCoefficient(1)


def test_zero_is_unique():
    z = ExactCoefficient(1) - ExactCoefficient(1)
    assert z == ExactCoefficient(0) and not z


coeffs = st.builds(
    ExactCoefficient,
    st.fractions(max_denominator=7),
    st.fractions(max_denominator=7),
    st.fractions(max_denominator=7),
    st.fractions(max_denominator=7),
)


@given(coeffs, coeffs, coeffs)
def test_coefficient_field_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert abs(complex(a * b) - complex(a) * complex(b)) < 1e-9 * (1 + abs(complex(a)) * abs(complex(b)))
    if a:
        assert a * a.inverse() == ExactCoefficient(1)


# --- Pauli products -------------------------------------------------------


@pytest.mark.parametrize("j,k,coeff,l", [(1, 2, C_I, 3), (1, 1, 1, 0), (0, 2, 1, 2)])
def test_pauli_product_examples(j, k, coeff, l):
    assert pauli_product(j, k) == (ExactCoefficient.coerce(coeff), l)


@pytest.mark.parametrize("j,k", list(itertools.product(range(4), repeat=2)))
def test_pauli_product_matches_numeric(j, k):
    c, l = pauli_product(j, k)
    np.testing.assert_allclose(PAULI[j] @ PAULI[k], complex(c) * PAULI[l])


# --- normal form ----------------------------------------------------------


def test_normal_form_examples(sym):
    X, Y = sym["X"], sym["Y"]
    assert (Y * R) * Y == -(Y * Y * R)
    assert (X * R) * (X * R) == X * X
    assert R * (Y * X) == -(Y * X * R)


def test_reflection_is_involution():
    assert R * R == ONE


def test_grading(sym):
    assert sym["X"].grading() == "even"
    assert (sym["Y"] * sym["X"]).grading() == "odd"
    assert (sym["X"] + sym["Y"]).grading() == "mixed"
    assert ZERO.grading() == "zero"


def test_redeclare_with_other_grading_fails(sym):
    with pytest.raises(ValueError):
        sym["T"].declare("A", odd=True)


def _element(draw_terms, letters):
    out = ZERO
    for word, r, c in draw_terms:
        term = AlgebraElement.scalar(c)
        for i in word:
            term = term * letters[i]
        out = out + (term * R if r else term)
    return out


term_lists = st.lists(
    st.tuples(st.lists(st.integers(0, 3), max_size=3), st.booleans(), st.integers(-3, 3)),
    max_size=3,
)


@settings(max_examples=60, deadline=None)
@given(term_lists, term_lists, term_lists)
def test_product_is_associative_and_distributive(ta, tb, tc):
    T = SymbolTable()
    letters = [*T.even("P", "Q"), *T.odd("U", "V")]
    a, b, c = (_element(t, letters) for t in (ta, tb, tc))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(term_lists)
def test_reflection_conjugation_flips_odd_part(ta):
    T = SymbolTable()
    letters = [*T.even("P", "Q"), *T.odd("U", "V")]
    h = _element([t for t in ta if not t[1]], letters)
    x, y = grade_split(h)
    assert R * h * R == x - y


# --- unitaries and conjugation --------------------------------------------


def test_ujkl_examples():
    assert make_ujkl(1, 3, 2, invert_l=True) == make_ufg()
    u132 = make_ujkl(1, 3, 2)
    assert u132.adjoint() == make_ufg()
    for j, k, l in itertools.permutations((1, 2, 3)):
        for inv in (False, True):
            u = make_ujkl(j, k, l, inv)
            assert u * u.adjoint() == IDENTITY


@pytest.mark.parametrize("bad", [(1, 1, 2), (1, 2, 4), (0, 1, 2)])
def test_ujkl_rejects_repeated_indices(bad):
    with pytest.raises(ValueError):
        make_ujkl(*bad)


def test_conjugation_examples():
    ufg = make_ufg()
    assert conjugate(ufg, SIGMA[1]) == R * SIGMA[3]
    assert conjugate(make_ujkl(1, 3, 2), SIGMA[3]) == R * SIGMA[1]
    assert conjugate(ufg, IDENTITY) == IDENTITY


def test_conjugation_rejects_non_unitary():
    with pytest.raises(NonUnitaryError):
        conjugate(SIGMA[1] + SIGMA[3], SIGMA[1])


# --- FG form and diagonalization ------------------------------------------


def test_grm_coefficients_are_fg():
    T = SymbolTable()
    ad, a = T.odd("a_dag", "a")
    kappa, lp, lm, delta = T.even("kappa", "lam_p_over_kappa", "lam_m_over_kappa", "Delta")
    A = ad * a
    C = C_I * lm * ad
    D = kappa * a + lp * ad
    assert check_fg_form(OperatorMatrix2.from_components(A, delta, C, D))
    bad = T.declare("Delta_odd", odd=True)
    assert not check_fg_form(OperatorMatrix2.from_components(A, bad, C, D))
    assert check_fg_form(ZERO_M)


def test_theorem_one(sym):
    A, B, C, D = (sym[k] for k in "ABCD")
    lp, lm = spin_diagonalize(OperatorMatrix2.from_components(A, B, C, D))
    assert lp == A + D + (B - C_I * C) * R
    assert lm == A + D - (B - C_I * C) * R
    assert spin_diagonalize(OperatorMatrix2.from_components(A)) == (A, A)


def test_rm_limit():
    T = SymbolTable()
    z, d = T.odd("z", "d_z")
    kappa, delta = T.even("kappa", "Delta")
    lp, lm = spin_diagonalize(OperatorMatrix2.from_components(z * d, delta, ZERO, kappa * (z + d)))
    assert lp == (z + kappa) * d + kappa * z + delta * R
    assert lm == (z + kappa) * d + kappa * z - delta * R


def test_spin_diagonalize_rejects_non_fg(sym):
    with pytest.raises(NotFGForm):
        spin_diagonalize(OperatorMatrix2.from_components(sym["A"], sym["Y"]))


def test_grade_split_examples(sym):
    X, Y = sym["X"], sym["Y"]
    assert grade_split(X + Y) == (X, Y)
    assert grade_split(X) == (X, ZERO)
    assert grade_split(Y) == (ZERO, Y)
    with pytest.raises(ValueError):
        grade_split(X * R)


def test_fg_from_diagonal(sym):
    X, Y, B, D = sym["X"], sym["Y"], sym["B"], sym["D"]
    d = OperatorMatrix2.of(((X + Y + B + D, 0), (0, X + Y - B - D)))
    assert fg_from_diagonal(d) == OperatorMatrix2.from_components(X, B * R, C_I * D * R, Y)
    assert fg_from_diagonal(OperatorMatrix2.of(((X, 0), (0, X)))) == OperatorMatrix2.from_components(X)
    with pytest.raises(ValueError):
        fg_from_diagonal(SIGMA[1])


def test_round_trip_up_to_unit(sym):
    X, Y, B, D = sym["X"], sym["Y"], sym["B"], sym["D"]
    d = OperatorMatrix2.of(((X + Y + B + D, 0), (0, X + Y - B - D)))
    lp, lm = spin_diagonalize(fg_from_diagonal(d))
    assert match_up_to_unit(lp, d.a00) is not None
    assert match_up_to_unit(lm, d.a11) is not None


def test_match_up_to_unit_negative(sym):
    assert match_up_to_unit(sym["X"], sym["Y"]) is None
    assert match_up_to_unit(-sym["X"] * R, sym["X"]) is not None


# --- identity suite -------------------------------------------------------


def test_identity_suite_passes():
    results = run_suite()
    assert len(results) >= 20
    assert all(r.passed for r in results), format_report([r for r in results if not r.passed])


def test_identity_suite_negative_control():
    failed = [r.name for r in run_suite(corrupt=True) if not r.passed]
    assert failed == ["FG coefficient: C s2"]
