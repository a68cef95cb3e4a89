"""
Quantum-invariant patterns {(eps_n, <T_j>_n)} of the generalized Rabi model.

T1 = a^dag s+ and T2 = a^dag (s- + s+) are not Hermitian; their diagonal
elements in the energy basis are the invariants. Energies are those of the
original-frame H (not divided by gamma).
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from drabi.errors import ConvergenceFailure
from drabi.models import GrmParams, build_grm_full, parity_labels
from drabi.spectra import converged_levels, thread_count

__all__ = [
    "InvariantPoint",
    "CouplingPolar",
    "MotionFrame",
    "invariant_operators",
    "invariant_pattern",
    "pattern_motion_scan",
]

log = logging.getLogger(__name__)

IMAG_TOL = 1e-8

_SP = np.array([[0.0, 1.0], [0.0, 0.0]])  # |up><down|
_SM = _SP.T


@dataclass(frozen=True)
class InvariantPoint:
    n: int
    parity: int
    index_within_parity: int
    energy: float
    t1: float
    t2: float
    imag_residual: float

    @property
    def accepted(self) -> bool:
        return self.imag_residual <= IMAG_TOL


@dataclass(frozen=True)
class CouplingPolar:
    Lambda: float
    alpha: float

    def __post_init__(self):
        if self.Lambda < 0 or not (0 <= self.alpha <= math.pi / 2 + 1e-15):
            raise ValueError("need Lambda >= 0 and alpha in [0, pi/2]")

    def params(self, gamma: float, mu: float) -> GrmParams:
        return GrmParams.from_polar(gamma, mu, self.Lambda, self.alpha)


def invariant_operators(n_max: int) -> dict[str, sparse.csr_array]:
    """T1, T2 and the two halves of T2 on the |n,s> basis of build_grm_full."""
    ad = sparse.diags_array(np.sqrt(np.arange(1, n_max + 1, dtype=float)), offsets=-1)
    k = lambda s: sparse.kron(ad, sparse.csr_array(s), format="csr")  # noqa: E731
    return {"t1": k(_SP), "t2": k(_SM + _SP), "ad_sm": k(_SM), "ad_sp": k(_SP)}


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    ph = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ph) / ph)


def invariant_pattern(
    p: GrmParams, count: int, n_max: int | None = None, tol: float = 1e-10
) -> list[InvariantPoint]:
    """Diagonal elements <n|T_j|n> for the lowest ``count`` eigenstates.

    Without ``n_max`` the truncation is chosen by energy convergence of the
    full model (doubling from 64).
    """
    if n_max is None:
        n_max = converged_levels(lambda n: build_grm_full(p, n), count, tol).n_max_used
    h = build_grm_full(p, n_max)
    energies, vecs, parities = parity_labels(h)
    vecs = _fix_phase(vecs[:, :count])
    ops = invariant_operators(n_max)
    t1 = np.einsum("ij,ij->j", vecs.conj(), ops["t1"] @ vecs)
    t2 = np.einsum("ij,ij->j", vecs.conj(), ops["t2"] @ vecs)
    seen: dict[int, int] = {}
    points = []
    for i in range(min(count, len(energies))):
        s = int(parities[i])
        idx = seen.get(s, 0)
        seen[s] = idx + 1
        resid = float(max(abs(t1[i].imag), abs(t2[i].imag)))
        pt = InvariantPoint(i, s, idx, float(energies[i]), float(t1[i].real), float(t2[i].real), resid)
        if not pt.accepted:
            log.warning("non-real invariant at %s level %d: residual %.3g", p, i, resid)
        points.append(pt)
    return points


@dataclass(frozen=True)
class MotionFrame:
    Lambda: float
    alpha: float
    points: tuple[InvariantPoint, ...]
    error: str | None = None


def pattern_motion_scan(
    alpha: float,
    Lambda_range: tuple[float, float],
    steps: int,
    count: int,
    gamma: float = 1.0,
    mu: float = 0.5,
    tol: float = 1e-10,
    threads: int | None = None,
) -> list[MotionFrame]:
    """Patterns along a ray of fixed alpha; levels keep their (parity, index) labels.

    A failing point is recorded in ``MotionFrame.error`` and the scan continues.
    """
    lo, hi = Lambda_range
    grid = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo] if steps == 1 else [])

    def one(L):
        L = float(L)
        try:
            pts = invariant_pattern(CouplingPolar(L, alpha).params(gamma, mu), count, tol=tol)
            return MotionFrame(L, alpha, tuple(pts))
        except (ConvergenceFailure, ValueError) as exc:
            return MotionFrame(L, alpha, (), str(exc))

    with ThreadPoolExecutor(max_workers=threads or thread_count()) as pool:
        return list(pool.map(one, grid))
