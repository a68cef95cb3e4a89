"""
Exact symbolic algebra for 2x2 operator matrices over an R-graded algebra.

Coefficients of the Pauli expansion are words in free, non-commuting symbols,
each declared even (commutes with the reflection R) or odd (anticommutes with R).
R is an involution and is always pushed to the right of a word:

    R . w = (-1)^{parity(w)} w . R,     R . R = 1

so every term has the normal form ``coeff * word * R^r`` with r in {0, 1}.
Scalars live in Q(i, sqrt 2), which is closed under everything the unitaries
U_jkl need (halves and 1/sqrt 2 factors), so all identities below are checked
by exact equality.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from drabi.errors import NonUnitaryError, NotFGForm

__all__ = [
    "GradedSymbol",
    "SymbolTable",
    "ExactCoefficient",
    "AlgebraElement",
    "OperatorMatrix2",
    "SIGMA",
    "R",
    "ONE",
    "ZERO",
    "levi_civita",
    "pauli_product",
    "multiply",
    "make_ujkl",
    "make_ufg",
    "conjugate",
    "check_fg_form",
    "spin_diagonalize",
    "grade_split",
    "fg_from_diagonal",
    "match_up_to_unit",
]


# ---------------------------------------------------------------------------
# scalars


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ExactCoefficient:
    """Exact number ``(re + i*im) + (re2 + i*im2) * sqrt(2)``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    re2: Fraction = Fraction(0)
    im2: Fraction = Fraction(0)

    def __post_init__(self):
        for f in ("re", "im", "re2", "im2"):
            object.__setattr__(self, f, _frac(getattr(self, f)))

    @classmethod
    def from_gaussian(cls, re=0, im=0, root2_power: int = 0) -> "ExactCoefficient":
        """Build ``(re + i im) * sqrt(2)**root2_power``; even powers fold into the rational part."""
        re, im = _frac(re), _frac(im)
        half, odd = divmod(root2_power, 2)
        scale = Fraction(2) ** half
        if odd:
            # sqrt2^(2h+1) = 2^h * sqrt2
            return cls(Fraction(0), Fraction(0), re * scale, im * scale)
        return cls(re * scale, im * scale)

    @classmethod
    def coerce(cls, x) -> "ExactCoefficient":
        if isinstance(x, ExactCoefficient):
            return x
        if isinstance(x, complex):
            raise TypeError("floating complex values are not exact; use from_gaussian")
        if isinstance(x, float):
            raise TypeError("floats are not exact; use Fraction")
        return cls(_frac(x))

    # Q(i) helpers on pairs
    @staticmethod
    def _gmul(a, b):
        return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    @property
    def _a(self):
        return (self.re, self.im)

    @property
    def _b(self):
        return (self.re2, self.im2)

    def is_zero(self) -> bool:
        return not (self.re or self.im or self.re2 or self.im2)

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = _numeric(other)
        if o is None:
            return NotImplemented
        return ExactCoefficient(self.re + o.re, self.im + o.im, self.re2 + o.re2, self.im2 + o.im2)

    __radd__ = __add__

    def __neg__(self):
        return ExactCoefficient(-self.re, -self.im, -self.re2, -self.im2)

    def __sub__(self, other):
        o = _numeric(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return ExactCoefficient.coerce(other) - self

    def __mul__(self, other):
        o = _numeric(other)
        if o is None:
            return NotImplemented
        ac = self._gmul(self._a, o._a)
        bd = self._gmul(self._b, o._b)
        ad = self._gmul(self._a, o._b)
        bc = self._gmul(self._b, o._a)
        return ExactCoefficient(ac[0] + 2 * bd[0], ac[1] + 2 * bd[1], ad[0] + bc[0], ad[1] + bc[1])

    __rmul__ = __mul__

    def conjugate(self) -> "ExactCoefficient":
        return ExactCoefficient(self.re, -self.im, self.re2, -self.im2)

    def inverse(self) -> "ExactCoefficient":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero coefficient")
        # (a + b s)^{-1} = (a - b s) / (a^2 - 2 b^2),  s = sqrt 2
        a2 = self._gmul(self._a, self._a)
        b2 = self._gmul(self._b, self._b)
        nr, ni = a2[0] - 2 * b2[0], a2[1] - 2 * b2[1]
        den = nr * nr + ni * ni
        inv = (nr / den, -ni / den)
        p = self._gmul(self._a, inv)
        q = self._gmul(self._b, inv)
        return ExactCoefficient(p[0], p[1], -q[0], -q[1])

    def __truediv__(self, other):
        return self * ExactCoefficient.coerce(other).inverse()

    def abs2(self) -> "ExactCoefficient":
        return self * self.conjugate()

    def as_gaussian_root2(self) -> tuple[tuple[Fraction, Fraction], int]:
        """Return ((re, im), k) with value = (re + i im) * sqrt2**k and k in {0, -1}.

        Raises ValueError for values mixing rational and sqrt 2 parts.
        """
        if not (self.re2 or self.im2):
            return (self.re, self.im), 0
        if self.re or self.im:
            raise ValueError(f"{self} is not of the form gaussian * sqrt2**k")
        return (2 * self.re2, 2 * self.im2), -1

    def __complex__(self):
        s = 2 ** 0.5
        return complex(float(self.re) + s * float(self.re2), float(self.im) + s * float(self.im2))

    def __str__(self):
        def gauss(re, im):
            if re and im:
                return f"({re}{'+' if im > 0 else '-'}{abs(im)}i)"
            if im:
                return "i" if im == 1 else "-i" if im == -1 else f"{im}i"
            return str(re)

        parts = []
        if self.re or self.im:
            parts.append(gauss(self.re, self.im))
        if self.re2 or self.im2:
            parts.append(f"{gauss(self.re2, self.im2)}*sqrt2")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def _numeric(x):
    if isinstance(x, ExactCoefficient):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactCoefficient(Fraction(x))
    return None


_C = ExactCoefficient.coerce
C_ONE = ExactCoefficient(1)
C_I = ExactCoefficient(0, 1)
C_HALF = ExactCoefficient(Fraction(1, 2))
C_INV_SQRT2 = ExactCoefficient.from_gaussian(1, 0, root2_power=-1)


# ---------------------------------------------------------------------------
# symbols and algebra elements


@dataclass(frozen=True, order=True)
class GradedSymbol:
    """A free generator; ``odd`` means it anticommutes with R."""

    name: str
    odd: bool = False
    hermitian: bool = False

    def __str__(self):
        return self.name


class SymbolTable:
    """Declares symbols and keeps names unique with a fixed grading."""

    def __init__(self):
        self._syms: dict[str, GradedSymbol] = {}

    def declare(self, name: str, odd: bool = False, hermitian: bool = False) -> "AlgebraElement":
        old = self._syms.get(name)
        sym = GradedSymbol(name, odd, hermitian)
        if old is not None and old != sym:
            raise ValueError(f"symbol {name!r} already declared as {old!r}")
        self._syms[name] = sym
        return AlgebraElement.symbol(sym)

    def even(self, *names: str):
        return tuple(self.declare(n, odd=False) for n in names)

    def odd(self, *names: str):
        return tuple(self.declare(n, odd=True) for n in names)


Word = tuple  # tuple[GradedSymbol, ...]


def _word_parity(word: Word) -> int:
    return sum(s.odd for s in word) & 1


def _key_order(key):
    word, r = key
    return (len(word), tuple((s.name, s.odd) for s in word), r)


class AlgebraElement:
    """Finite sum of ``coeff * word * R^r`` terms in normal form. Immutable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[Word, int], ExactCoefficient] | None = None):
        clean = {}
        for (word, r), c in (terms or {}).items():
            if r not in (0, 1):
                raise ValueError("r_power must be 0 or 1")
            c = _C(c)
            if not c.is_zero():
                clean[(tuple(word), r)] = c
        self._terms = tuple(sorted(clean.items(), key=lambda kv: _key_order(kv[0])))
        self._hash = None

    # constructors
    @classmethod
    def scalar(cls, c) -> "AlgebraElement":
        return cls({((), 0): _C(c)})

    @classmethod
    def symbol(cls, sym: GradedSymbol) -> "AlgebraElement":
        return cls({((sym,), 0): C_ONE})

    @property
    def terms(self):
        return self._terms

    def term_dict(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def has_reflection(self) -> bool:
        return any(r for (_, r), _ in self._terms)

    def grading(self) -> str:
        """'zero', 'even', 'odd' or 'mixed' with respect to R."""
        if not self._terms:
            return "zero"
        ps = {_word_parity(w) for (w, _), _ in self._terms}
        if len(ps) == 2:
            return "mixed"
        return "odd" if ps.pop() else "even"

    # arithmetic
    def __add__(self, other):
        other = _as_element(other)
        d = dict(self._terms)
        for k, c in other._terms:
            d[k] = d[k] + c if k in d else c
        return AlgebraElement(d)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement({k: -c for k, c in self._terms})

    def __sub__(self, other):
        return self + (-_as_element(other))

    def __rsub__(self, other):
        return _as_element(other) - self

    def __mul__(self, other):
        if isinstance(other, OperatorMatrix2):
            return NotImplemented
        return multiply(self, _as_element(other))

    def __rmul__(self, other):
        return multiply(_as_element(other), self)

    def adjoint(self) -> "AlgebraElement":
        # (c w R^r)^dagger = c* R^r w^dagger = c* (-1)^{r |w|} w^dagger R^r
        d = {}
        for (w, r), c in self._terms:
            bad = [s for s in w if not s.hermitian]
            if bad:
                raise ValueError(f"adjoint undefined for formal symbol {bad[0].name!r}")
            sign = -1 if (r and _word_parity(w)) else 1
            k = (tuple(reversed(w)), r)
            d[k] = d.get(k, ExactCoefficient()) + c.conjugate() * sign
        return AlgebraElement(d)

    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self._terms == other._terms
        try:
            return self == _as_element(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for (w, r), c in self._terms:
            factors = [str(s) for s in w] + (["R"] if r else [])
            body = "*".join(factors)
            cs = str(c)
            if not body:
                out.append(cs)
            elif cs == "1":
                out.append(body)
            elif cs == "-1":
                out.append("-" + body)
            else:
                out.append(f"{cs}*{body}")
        return " + ".join(out)

    def __repr__(self):
        return f"AlgebraElement({self})"


def _as_element(x) -> AlgebraElement:
    if isinstance(x, AlgebraElement):
        return x
    return AlgebraElement.scalar(_C(x))


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Normal-form product; R is commuted right past each word of ``b`` with its sign."""
    d: dict = {}
    for (w1, r1), c1 in a.terms:
        for (w2, r2), c2 in b.terms:
            c = c1 * c2
            if r1 and _word_parity(w2):
                c = -c
            k = (w1 + w2, r1 ^ r2)
            d[k] = d[k] + c if k in d else c
    return AlgebraElement(d)


ZERO = AlgebraElement()
ONE = AlgebraElement.scalar(1)
R = AlgebraElement({((), 1): C_ONE})


# ---------------------------------------------------------------------------
# 2x2 operator matrices


@dataclass(frozen=True)
class OperatorMatrix2:
    """2x2 matrix of AlgebraElements, entries stored row-major."""

    a00: AlgebraElement
    a01: AlgebraElement
    a10: AlgebraElement
    a11: AlgebraElement

    @classmethod
    def of(cls, rows) -> "OperatorMatrix2":
        (p, q), (r, s) = rows
        return cls(_as_element(p), _as_element(q), _as_element(r), _as_element(s))

    @classmethod
    def from_components(cls, h0=ZERO, h1=ZERO, h2=ZERO, h3=ZERO) -> "OperatorMatrix2":
        """Build sum_j h_j sigma_j."""
        m = ZERO_M
        for h, s in zip((h0, h1, h2, h3), SIGMA):
            m = m + _as_element(h) * s
        return m

    @property
    def rows(self):
        return ((self.a00, self.a01), (self.a10, self.a11))

    def entries(self):
        return (self.a00, self.a01, self.a10, self.a11)

    def components(self) -> tuple[AlgebraElement, ...]:
        """h_j = Tr(M sigma_j)/2 for j = 0..3."""
        half = C_HALF
        h0 = (self.a00 + self.a11) * half
        h1 = (self.a01 + self.a10) * half
        h2 = (self.a01 - self.a10) * (C_I * half)
        h3 = (self.a00 - self.a11) * half
        return h0, h1, h2, h3

    def __add__(self, other):
        if not isinstance(other, OperatorMatrix2):
            return NotImplemented
        return OperatorMatrix2(*(x + y for x, y in zip(self.entries(), other.entries())))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return OperatorMatrix2(*(-x for x in self.entries()))

    def __mul__(self, other):
        if isinstance(other, OperatorMatrix2):
            (a, b), (c, d) = self.rows
            (e, f), (g, h) = other.rows
            return OperatorMatrix2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        x = _as_element(other)
        return OperatorMatrix2(*(y * x for y in self.entries()))

    def __rmul__(self, other):
        x = _as_element(other)
        return OperatorMatrix2(*(x * y for y in self.entries()))

    def adjoint(self) -> "OperatorMatrix2":
        return OperatorMatrix2(self.a00.adjoint(), self.a10.adjoint(), self.a01.adjoint(), self.a11.adjoint())

    def is_diagonal(self) -> bool:
        return self.a01.is_zero() and self.a10.is_zero()

    def commutator(self, other: "OperatorMatrix2") -> "OperatorMatrix2":
        return self * other - other * self

    def __str__(self):
        names = ("sigma0", "sigma1", "sigma2", "sigma3")
        parts = [f"({h})*{n}" for h, n in zip(self.components(), names) if not h.is_zero()]
        return " + ".join(parts) if parts else "0"


ZERO_M = OperatorMatrix2(ZERO, ZERO, ZERO, ZERO)
SIGMA = (
    OperatorMatrix2.of(((1, 0), (0, 1))),
    OperatorMatrix2.of(((0, 1), (1, 0))),
    OperatorMatrix2.of(((0, -C_I), (C_I, 0))),
    OperatorMatrix2.of(((1, 0), (0, -1))),
)
IDENTITY = SIGMA[0]


def levi_civita(j: int, k: int, l: int) -> int:
    if len({j, k, l}) < 3:
        return 0
    return 1 if (j, k, l) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1


def pauli_product(j: int, k: int) -> tuple[ExactCoefficient, int]:
    """sigma_j sigma_k = coeff * sigma_l, with sigma_0 the identity."""
    if not (0 <= j <= 3 and 0 <= k <= 3):
        raise ValueError("Pauli indices must be in 0..3")
    if j == 0:
        return C_ONE, k
    if k == 0:
        return C_ONE, j
    if j == k:
        return C_ONE, 0
    l = 6 - j - k
    return C_I * levi_civita(j, k, l), l


# ---------------------------------------------------------------------------
# unitaries U_jkl


def _u_pair(j: int, k: int) -> OperatorMatrix2:
    return (SIGMA[j] + SIGMA[k]) * C_INV_SQRT2


def _u_single(l: int, inverse: bool = False) -> OperatorMatrix2:
    s = -C_I if inverse else C_I
    return (IDENTITY + SIGMA[l] * s) * C_INV_SQRT2


def make_ujkl(j: int, k: int, l: int, invert_l: bool = False) -> OperatorMatrix2:
    """(1/2)[(1+R) U_jk + (1-R) U_l^{+-1}], U_jk = (s_j+s_k)/sqrt2, U_l = (1+i s_l)/sqrt2."""
    if sorted((j, k, l)) != [1, 2, 3]:
        raise ValueError(f"indices must be a permutation of 1,2,3, got {(j, k, l)}")
    p_plus = (ONE + R) * C_HALF
    p_minus = (ONE - R) * C_HALF
    return p_plus * _u_pair(j, k) + p_minus * _u_single(l, inverse=invert_l)


def make_ufg() -> OperatorMatrix2:
    return make_ujkl(1, 3, 2, invert_l=True)


def _is_identity(m: OperatorMatrix2) -> bool:
    return m == IDENTITY


def conjugate(u: OperatorMatrix2, m: OperatorMatrix2) -> OperatorMatrix2:
    """Return u m u^dagger; u must be exactly unitary."""
    ud = u.adjoint()
    if not _is_identity(u * ud):
        raise NonUnitaryError("u * adjoint(u) does not reduce to the identity")
    return u * m * ud


# ---------------------------------------------------------------------------
# Fulton-Gouterman structure


def check_fg_form(m: OperatorMatrix2) -> bool:
    """True iff h0, h1 commute with R and h2, h3 anticommute with R."""
    h0, h1, h2, h3 = m.components()
    even_ok = all(h.grading() in ("zero", "even") for h in (h0, h1))
    odd_ok = all(h.grading() in ("zero", "odd") for h in (h2, h3))
    return even_ok and odd_ok


def spin_diagonalize(m: OperatorMatrix2) -> tuple[AlgebraElement, AlgebraElement]:
    """Conjugate an FG-form matrix by U_FG and return the diagonal blocks (L+, L-)."""
    if not check_fg_form(m):
        raise NotFGForm("matrix coefficients violate the R-grading of the FG form")
    ufg = make_ufg()
    d = conjugate(ufg, m)
    if not d.is_diagonal():
        raise ArithmeticError(f"nonzero off-diagonal residue after U_FG: {d.a01}, {d.a10}")
    parity = conjugate(ufg, R * SIGMA[1])
    if parity != SIGMA[3]:
        raise ArithmeticError(f"U_FG (R sigma1) U_FG^dagger = {parity}, expected sigma3")
    return d.a00, d.a11


def grade_split(h: AlgebraElement) -> tuple[AlgebraElement, AlgebraElement]:
    """X = (h + R h R)/2 commutes with R, Y = (h - R h R)/2 anticommutes."""
    if h.has_reflection():
        raise ValueError("grade_split expects an element without explicit R factors")
    rhr = R * h * R
    x = (h + rhr) * C_HALF
    y = (h - rhr) * C_HALF
    if x * R != R * x or y * R != -(R * y):
        raise ArithmeticError("grade split failed its commutation check")
    return x, y


def fg_from_diagonal(m_diag: OperatorMatrix2) -> OperatorMatrix2:
    """Bring a spin-diagonal matrix into FG form by conjugating with U_132."""
    if not m_diag.is_diagonal():
        raise ValueError("input must be diagonal in the spin subspace")
    h0, _, _, h3 = m_diag.components()
    x0, y0 = grade_split(h0)
    x3, y3 = grade_split(h3)
    out = conjugate(make_ujkl(1, 3, 2), m_diag)
    expected = OperatorMatrix2.from_components(x0, x3 * R, C_I * y3 * R, y0)
    if out != expected:
        raise ArithmeticError(f"U_132 image {out} differs from {expected}")
    if not check_fg_form(out):
        raise ArithmeticError("U_132 image is not of FG form")
    return out


_UNITS = (C_ONE, -C_ONE, C_I, -C_I)


def match_up_to_unit(a: AlgebraElement, b: AlgebraElement):
    """Find (c, r) with a == c * b * R^r and |c| = 1, else None.

    Units {+-1, +-i} are tried first, then the ratio of leading coefficients.
    """
    for r in (0, 1):
        br = b * R if r else b
        for c in _UNITS:
            if a == br * c:
                return c, r
        if a.is_zero() or br.is_zero():
            continue
        (ka, ca), (kb, cb) = a.terms[0], br.terms[0]
        if ka != kb:
            continue
        c = ca / cb
        if c.abs2() == C_ONE and a == br * c:
            return c, r
    return None


def matrix_from_sigma_terms(terms: Iterable[tuple[AlgebraElement, int]]) -> OperatorMatrix2:
    m = ZERO_M
    for h, j in terms:
        m = m + _as_element(h) * SIGMA[j]
    return m


def all_ujkl():
    """Every (j, k, l, invert) combination with {j,k,l} = {1,2,3}."""
    for j, k, l in itertools.permutations((1, 2, 3)):
        for inv in (False, True):
            yield (j, k, l, inv)
