"""
Dunkl-type operators L+- as three-term-recurrence (tridiagonal) matrices.

Convention: M[m][n] is the coefficient of z^m in L(z^n), so a polynomial with
coefficient vector c maps to M @ c. The reflection acts as R f(z) = f(-z),
i.e. R z^n = (-1)^n z^n, in all four models.

    grm         (z + kappa) d + lambda_+ z/kappa +- (lambda_- z/kappa + Delta) R
    rm          (z + kappa) d + kappa z +- Delta R
    two_photon  2 z d^2 + (4q + gamma z) d + z/2 + gamma (q - 1/4) +- Delta R
    two_mode    z d^2 + (2q + gamma z) d + z + gamma (q - 1/2) +- Delta R
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from drabi.errors import NotBalanceable, SpectralCollapse
from drabi.models import GrmParams, RmParams, Su11Params, derive_grm

__all__ = [
    "DunklOperatorSpec",
    "TridiagonalMatrix",
    "grm_ttrr",
    "rm_ttrr",
    "tprm_ttrr",
    "tmrm_ttrr",
    "ttrr",
    "blocks",
    "balance_to_symmetric",
    "apply_dunkl",
    "reflectionless_ttrr",
]

MODELS = ("grm", "rm", "two_photon", "two_mode")


@dataclass(frozen=True)
class DunklOperatorSpec:
    model: str
    params: Union[GrmParams, RmParams, Su11Params]
    parity: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        expected = {"grm": GrmParams, "rm": (RmParams, GrmParams)}.get(self.model, Su11Params)
        if not isinstance(self.params, expected):
            raise TypeError(f"{self.model} spec needs {expected} parameters")
        if self.model == "grm":
            derive_grm(self.params)
        if self.model in ("two_photon", "two_mode") and self.params.kind != self.model:
            raise ValueError(f"Su11Params.kind={self.params.kind!r} does not match {self.model!r}")

    def flipped(self) -> "DunklOperatorSpec":
        return DunklOperatorSpec(self.model, self.params, -self.parity)

    @property
    def rm(self) -> RmParams:
        p = self.params
        return RmParams.from_grm(p) if isinstance(p, GrmParams) else p


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """diag[n] = M[n][n], sup[n] = M[n][n+1], sub[n] = M[n+1][n]."""

    diag: np.ndarray
    sup: np.ndarray
    sub: np.ndarray
    parity: int = 0
    model: str = ""

    def __post_init__(self):
        for f in ("diag", "sup", "sub"):
            object.__setattr__(self, f, np.asarray(getattr(self, f), dtype=float))
        n = len(self.diag)
        if len(self.sup) != n - 1 or len(self.sub) != n - 1:
            raise ValueError("off-diagonals must have length size - 1")
        if not (np.all(np.isfinite(self.diag)) and np.all(np.isfinite(self.sup)) and np.all(np.isfinite(self.sub))):
            raise ValueError("tridiagonal entries must be finite")

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1)

    def matvec(self, c) -> np.ndarray:
        c = np.asarray(c)
        out = self.diag * c
        out[:-1] += self.sup * c[1:]
        out[1:] += self.sub * c[:-1]
        return out

    def equals(self, other: "TridiagonalMatrix") -> bool:
        return (
            np.array_equal(self.diag, other.diag)
            and np.array_equal(self.sup, other.sup)
            and np.array_equal(self.sub, other.sub)
        )

    def is_irreducible(self) -> bool:
        return bool(np.all(self.sup * self.sub != 0))


def _alt(n):
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def grm_ttrr(spec: DunklOperatorSpec, n_max: int) -> TridiagonalMatrix:
    d = derive_grm(spec.params)
    n = np.arange(n_max + 1, dtype=float)
    alt = _alt(n_max + 1)
    s = spec.parity
    return TridiagonalMatrix(
        diag=n + s * alt * d.delta,
        sup=d.kappa * n[1:],
        sub=(d.lambda_plus + s * alt[:-1] * d.lambda_minus) / d.kappa,
        parity=s,
        model="grm",
    )


def rm_ttrr(spec: DunklOperatorSpec, n_max: int) -> TridiagonalMatrix:
    p = spec.rm
    n = np.arange(n_max + 1, dtype=float)
    s = spec.parity
    return TridiagonalMatrix(
        diag=n + s * _alt(n_max + 1) * p.delta,
        sup=p.kappa * n[1:],
        sub=np.full(n_max, p.kappa),
        parity=s,
        model="rm",
    )


def _su11_ttrr(spec, n_max, scale, shift_c, sub_value):
    p: Su11Params = spec.params
    if p.collapsed:
        warnings.warn(
            f"{p.kind} with gamma={p.gamma} <= 2: spectral collapse, truncations will not converge",
            SpectralCollapse,
            stacklevel=3,
        )
    q = float(p.q)
    n = np.arange(n_max + 1, dtype=float)
    s = spec.parity
    return TridiagonalMatrix(
        diag=p.gamma * n + p.gamma * (q - shift_c) + s * _alt(n_max + 1) * p.delta,
        sup=scale * n[1:] * (n[1:] - 1 + 2 * q),
        sub=np.full(n_max, sub_value),
        parity=s,
        model=spec.model,
    )


def tprm_ttrr(spec: DunklOperatorSpec, n_max: int) -> TridiagonalMatrix:
    return _su11_ttrr(spec, n_max, 2.0, 0.25, 0.5)


def tmrm_ttrr(spec: DunklOperatorSpec, n_max: int) -> TridiagonalMatrix:
    return _su11_ttrr(spec, n_max, 1.0, 0.5, 1.0)


_BUILDERS = {"grm": grm_ttrr, "rm": rm_ttrr, "two_photon": tprm_ttrr, "two_mode": tmrm_ttrr}


def ttrr(spec: DunklOperatorSpec, n_max: int) -> TridiagonalMatrix:
    return _BUILDERS[spec.model](spec, n_max)


def blocks(model: str, params, parities=(1, -1)):
    """Builder n_max -> [L+ matrix, L- matrix] suitable for spectra.converged_levels."""
    specs = [DunklOperatorSpec(model, params, s) for s in parities]

    def build(n_max: int):
        return [ttrr(s, n_max) for s in specs]

    return build


def reflectionless_ttrr(p: RmParams, sign: int, n_max: int) -> TridiagonalMatrix:
    """(z + kappa) d + kappa z +- Delta, the RM operator with R replaced by 1."""
    n = np.arange(n_max + 1, dtype=float)
    return TridiagonalMatrix(n + sign * p.delta, p.kappa * n[1:], np.full(n_max, p.kappa), sign, "rm-noR")


def balance_magnitudes(t: TridiagonalMatrix):
    """Diagonal similarity D^-1 T D giving |sub_n| = |sup_n| = sqrt|sub_n sup_n|.

    Always possible; signs are kept, so the result is symmetric exactly when
    every product sub_n * sup_n is non-negative. Returns (matrix, log_scales)
    with D = diag(exp(log_scales)); log scales avoid the factorial overflow of
    monomial-basis normalisations.
    """
    prod = t.sub * t.sup
    off = np.sqrt(np.abs(prod))
    ratio = np.zeros_like(prod)
    nz = prod != 0
    # (d_{n+1}/d_n)^2 = |sub_n / sup_n|
    ratio[nz] = 0.5 * (np.log(np.abs(t.sub[nz])) - np.log(np.abs(t.sup[nz])))
    log_scales = np.concatenate([[0.0], np.cumsum(ratio)])
    sup = np.where(nz, np.sign(t.sup) * off, 0.0)
    sub = np.where(nz, np.sign(t.sub) * off, 0.0)
    # a zero product decouples the blocks; the surviving corner is left as is
    lone = ~nz
    sup[lone] = t.sup[lone]
    sub[lone] = t.sub[lone]
    return TridiagonalMatrix(t.diag.copy(), sup, sub, t.parity, t.model), log_scales


def balance_to_symmetric(t: TridiagonalMatrix):
    """Diagonal similarity D^-1 T D with symmetric off-diagonals sqrt(sub*sup).

    Raises NotBalanceable when some product sub_n * sup_n is negative.
    """
    prod = t.sub * t.sup
    if np.any(prod < 0):
        k = int(np.flatnonzero(prod < 0)[0])
        raise NotBalanceable(f"sub[{k}]*sup[{k}] = {prod[k]} < 0")
    bal, log_scales = balance_magnitudes(t)
    # a zero product decouples the blocks, so dropping the surviving corner keeps the spectrum
    off = np.sqrt(prod)
    return TridiagonalMatrix(bal.diag, off, off.copy(), t.parity, t.model), log_scales


# ---------------------------------------------------------------------------
# direct application on polynomials


def _operator_coefficients(spec: DunklOperatorSpec):
    """(a2, a1, a0, refl) as coefficient arrays: L = a2 d^2 + a1 d + a0 + s * refl R."""
    m = spec.model
    if m == "grm":
        d = derive_grm(spec.params)
        return [0.0], [d.kappa, 1.0], [0.0, d.lambda_plus / d.kappa], [d.delta, d.lambda_minus / d.kappa]
    if m == "rm":
        p = spec.rm
        return [0.0], [p.kappa, 1.0], [0.0, p.kappa], [p.delta]
    p = spec.params
    q, g = float(p.q), p.gamma
    if m == "two_photon":
        return [0.0, 2.0], [4 * q, g], [g * (q - 0.25), 0.5], [p.delta]
    return [0.0, 1.0], [2 * q, g], [g * (q - 0.5), 1.0], [p.delta]


def apply_dunkl(spec: DunklOperatorSpec, p: Polynomial) -> Polynomial:
    """L+- p evaluated term by term: differentiate, multiply, reflect."""
    c = np.atleast_1d(np.asarray(p.coef if isinstance(p, Polynomial) else p))
    a2, a1, a0, refl = _operator_coefficients(spec)
    reflected = c * _alt(len(c))
    out = P.polyadd(P.polymul(a2, P.polyder(c, 2)) if len(c) > 2 else [0.0], P.polymul(a1, P.polyder(c)) if len(c) > 1 else [0.0])
    out = P.polyadd(out, P.polymul(a0, c))
    out = P.polyadd(out, spec.parity * P.polymul(refl, reflected))
    return Polynomial(out).trim()
