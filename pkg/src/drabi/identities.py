"""Enumerated exact operator identities behind the spin-subspace diagonalization."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from drabi.pauli_fg import (
    C_HALF,
    C_I,
    IDENTITY,
    ONE,
    R,
    SIGMA,
    OperatorMatrix2,
    SymbolTable,
    check_fg_form,
    conjugate,
    fg_from_diagonal,
    grade_split,
    levi_civita,
    make_ufg,
    make_ujkl,
    match_up_to_unit,
    pauli_product,
    spin_diagonalize,
    _u_pair,
    _u_single,
)


@dataclass(frozen=True)
class IdentityResult:
    name: str
    passed: bool
    detail: str = ""


def expected_conjugation(j: int, k: int, l: int, invert: bool, m: int) -> OperatorMatrix2:
    """U_jkl s_m U_jkl^dag = P+ (U_jk s_m U_jk) + P- (U_l^{+-1} s_m U_l^{-+1}), read off the
    closed forms U_jk s_j U_jk = s_k, U_jk s_l U_jk = -s_l, U_l s_j U_l^-1 = -eps_ljk s_k."""
    p_plus = (ONE + R) * (C_HALF)
    p_minus = (ONE - R) * (C_HALF)
    sgn = 1 if invert else -1
    if m == 0:
        return IDENTITY
    if m == j:
        pair, single = SIGMA[k], SIGMA[k] * (sgn * levi_civita(l, j, k))
    elif m == k:
        pair, single = SIGMA[j], SIGMA[j] * (sgn * levi_civita(l, k, j))
    else:
        pair, single = -SIGMA[l], SIGMA[l]
    return p_plus * pair + p_minus * single


def run_suite(corrupt: bool = False) -> list[IdentityResult]:
    """Evaluate every identity; ``corrupt`` flips one expected FG-conjugation sign as a negative control."""
    checks: list[tuple[str, Callable[[], bool]]] = []
    T = SymbolTable()
    A, B, X = T.even("A", "B", "X")
    C, D, Y = T.odd("C", "D", "Y")
    ufg = make_ufg()
    u132 = make_ujkl(1, 3, 2)

    # Pauli products against explicit 2x2 matrix products
    for j, k in itertools.product(range(4), repeat=2):
        def pp(j=j, k=k):
            c, l = pauli_product(j, k)
            return SIGMA[j] * SIGMA[k] == SIGMA[l] * c
        checks.append((f"pauli s{j} s{k}", pp))
    checks.append(("-i s1 s2 s3 = 1", lambda: SIGMA[1] * SIGMA[2] * SIGMA[3] * (-C_I) == IDENTITY))

    # two-index unitaries
    for j, k, l in itertools.permutations((1, 2, 3)):
        ujk, ul, uli = _u_pair(j, k), _u_single(l), _u_single(l, True)
        eps = levi_civita(j, k, l)
        checks.append((f"U{j}{k} s{j} U{j}{k} = s{k}", lambda ujk=ujk, j=j, k=k: ujk * SIGMA[j] * ujk == SIGMA[k]))
        checks.append((f"U{j}{k} s{l} = -s{l} U{j}{k}", lambda ujk=ujk, l=l: ujk * SIGMA[l] == -(SIGMA[l] * ujk)))
        checks.append((f"U{l} s{j} = s{j} U{l}^-1", lambda ul=ul, uli=uli, j=j: ul * SIGMA[j] == SIGMA[j] * uli))
        checks.append((
            f"U{l} s{j} U{l}^-1 = -eps s{k}",
            lambda ul=ul, uli=uli, j=j, k=k, l=l: ul * SIGMA[j] * uli == SIGMA[k] * (-levi_civita(l, j, k)),
        ))
        checks.append((
            f"U{j}{k} U{l} = U{l}^-1 U{j}{k}",
            lambda ujk=ujk, ul=ul, uli=uli, j=j, k=k, eps=eps: (
                ujk * ul == uli * ujk
                and ujk * ul == (SIGMA[j] + SIGMA[k] - (SIGMA[j] - SIGMA[k]) * eps) * C_HALF
            ),
        ))

    # U_jkl: unitarity and conjugation of every Pauli matrix
    for j, k, l, inv in ((a, b, c, i) for (a, b, c) in itertools.permutations((1, 2, 3)) for i in (False, True)):
        u = make_ujkl(j, k, l, inv)
        tag = f"U{j}{k}{'-' if inv else ''}{l}"
        checks.append((f"{tag} unitary", lambda u=u: u * u.adjoint() == IDENTITY and u.adjoint() * u == IDENTITY))
        for m in range(4):
            checks.append((
                f"{tag} s{m} {tag}^dag (closed form)",
                lambda u=u, j=j, k=k, l=l, inv=inv, m=m: conjugate(u, SIGMA[m]) == expected_conjugation(j, k, l, inv, m),
            ))

    checks.append(("U_FG = U132^-1", lambda: ufg == u132.adjoint()))
    checks.append(("U13 U2 = U2^-1 U13 = s1", lambda: _u_pair(1, 3) * _u_single(2) == SIGMA[1] == _u_single(2, True) * _u_pair(1, 3)))
    checks.append(("U31 U2^-1 = U2 U31 = s3", lambda: _u_pair(3, 1) * _u_single(2, True) == SIGMA[3] == _u_single(2) * _u_pair(3, 1)))

    # U_FG on bare Pauli matrices and on the FG coefficients
    uftr = {0: IDENTITY, 1: R * SIGMA[3], 2: -(R * SIGMA[2]), 3: SIGMA[1]}
    for m, want in uftr.items():
        checks.append((f"U_FG s{m} U_FG^dag", lambda m=m, want=want: conjugate(ufg, SIGMA[m]) == want))
    table1 = {
        "A s0": (A * SIGMA[0], A * SIGMA[0]),
        "B s1": (B * SIGMA[1], (B * R) * SIGMA[3]),
        "C s2": (C * SIGMA[2], (C * R * (-C_I)) * SIGMA[3]),
        "D s3": (D * SIGMA[3], D * SIGMA[0]),
    }
    if corrupt:
        lhs, rhs = table1["C s2"]
        table1["C s2"] = (lhs, -rhs)
    for name, (lhs, rhs) in table1.items():
        checks.append((f"FG coefficient: {name}", lambda lhs=lhs, rhs=rhs: conjugate(ufg, lhs) == rhs))
    checks.append(("U_FG Y U_FG^dag = Y s1", lambda: conjugate(ufg, Y * SIGMA[0]) == Y * SIGMA[1]))
    checks.append(("U_FG (R s1) U_FG^dag = s3", lambda: conjugate(ufg, R * SIGMA[1]) == SIGMA[3]))

    # U_132 tables
    utr = {0: IDENTITY, 1: SIGMA[3], 2: -(R * SIGMA[2]), 3: R * SIGMA[1]}
    for m, want in utr.items():
        checks.append((f"U132 s{m} U132^dag", lambda m=m, want=want: conjugate(u132, SIGMA[m]) == want))
    ytab = {0: Y * SIGMA[3], 1: Y * SIGMA[0], 2: (Y * R * C_I) * SIGMA[1], 3: (Y * R * C_I) * SIGMA[2]}
    for m, want in ytab.items():
        checks.append((f"U132 Y s{m} U132^dag", lambda m=m, want=want: conjugate(u132, Y * SIGMA[m]) == want))
    checks.append(("U132 X s3 U132^dag = X R s1", lambda: conjugate(u132, X * SIGMA[3]) == (X * R) * SIGMA[1]))

    # spin-subspace diagonalization of a generic FG matrix
    m_fg = OperatorMatrix2.from_components(A, B, C, D)
    checks.append(("FG form of generic (A,B,C,D)", lambda: check_fg_form(m_fg)))
    checks.append(("FG form rejects odd B", lambda: not check_fg_form(OperatorMatrix2.from_components(A, Y, C, D))))
    checks.append(("[H_FG, R s1] = 0", lambda: m_fg.commutator(R * SIGMA[1]) == OperatorMatrix2.from_components()))

    def theorem1():
        lp, lm = spin_diagonalize(m_fg)
        return lp == A + D + (B - C_I * C) * R and lm == A + D - (B - C_I * C) * R

    checks.append(("spin diagonalization: U_FG H_FG U_FG^dag = diag(A+D +- (B-iC)R)", theorem1))

    def commutator_lr():
        lp, lm = spin_diagonalize(m_fg)
        ok_p = lp * R - R * lp == C * (-2 * C_I) + D * R * 2
        ok_m = lm * R - R * lm == C * (2 * C_I) + D * R * 2
        return ok_p and ok_m

    checks.append(("[L+-, R] = -+2iC + 2DR", commutator_lr))

    z, dz = T.odd("z", "d_z")
    kappa, delta = T.even("kappa", "Delta")

    def rm_limit():
        a_rm = z * dz
        d_rm = kappa * z + kappa * dz
        lp, lm = spin_diagonalize(OperatorMatrix2.from_components(a_rm, delta, 0, d_rm))
        base = (z + kappa) * dz + kappa * z
        return lp == base + delta * R and lm == base - delta * R

    checks.append(("RM limit: L+- = (z+kappa)d + kappa z +- Delta R", rm_limit))

    # FG matrix built from a diagonal one
    h0 = X + Y
    h3 = B + D
    diag = OperatorMatrix2.of(((h0 + h3, 0), (0, h0 - h3)))

    def grade_ok():
        x, y = grade_split(h0)
        return x == X and y == Y

    checks.append(("grade split X + Y -> (X, Y)", grade_ok))
    checks.append((
        "FG construction: U132 diag U132^dag = X0 s0 + X3 R s1 + i Y3 R s2 + Y0 s3",
        lambda: fg_from_diagonal(diag) == OperatorMatrix2.from_components(X, B * R, C_I * D * R, Y),
    ))

    def round_trip():
        lp, lm = spin_diagonalize(fg_from_diagonal(diag))
        return match_up_to_unit(lp, diag.a00) is not None and match_up_to_unit(lm, diag.a11) is not None

    checks.append(("FG construction round trip", round_trip))

    out = []
    for name, fn in checks:
        try:
            ok = bool(fn())
            out.append(IdentityResult(name, ok))
        except Exception as exc:  # report, do not abort the suite
            out.append(IdentityResult(name, False, f"{type(exc).__name__}: {exc}"))
    return out


def format_report(results: list[IdentityResult]) -> str:
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else "") for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} identities passed")
    return "\n".join(lines)
