"""
Eigen-solvers, truncation-convergence control, analytic oracles and crossing scans.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, optimize

from drabi.dunkl import TridiagonalMatrix, balance_magnitudes, balance_to_symmetric
from drabi.errors import ConvergenceFailure, NonRealSpectrum, NotBalanceable
from drabi.models import GrmParams, RmParams, TruncatedHamiltonian, parity_labels

__all__ = [
    "Level",
    "Spectrum",
    "Sweep",
    "CrossingEvent",
    "eig_tridiagonal",
    "eig_hamiltonian",
    "converged_levels",
    "jcm_analytic",
    "solvable_no_reflection",
    "crossing_scan",
    "crossing_violations",
    "thread_count",
]

log = logging.getLogger(__name__)

IMAG_TOL = 1e-8
N_START = 64
N_CAP = 16384
BISECT_TOL = 1e-9
CROSSING_GAP = 1e-8
DEGENERACY_GAP = 1e-10
PARITY_DENSE_LIMIT = 8192


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("DRABI_THREADS", "") or os.cpu_count() or 1))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Level:
    energy: float
    parity: int
    index_within_parity: int
    converged: bool


@dataclass(frozen=True)
class Spectrum:
    levels: tuple[Level, ...]
    n_max_used: int
    tol: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    @property
    def parities(self) -> np.ndarray:
        return np.array([lv.parity for lv in self.levels], dtype=int)

    def by_parity(self, parity: int) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels if lv.parity == parity])

    @property
    def all_converged(self) -> bool:
        return all(lv.converged for lv in self.levels)


def _real_or_raise(vals: np.ndarray) -> np.ndarray:
    vals = np.asarray(vals)
    if np.iscomplexobj(vals):
        worst = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
        if worst > IMAG_TOL:
            raise NonRealSpectrum(f"eigenvalue imaginary part {worst:.3g} exceeds {IMAG_TOL}")
        vals = vals.real
    return np.sort(vals)


def eig_tridiagonal(t: TridiagonalMatrix, count: int | None = None, method: str = "auto") -> np.ndarray:
    """Ascending eigenvalues of a truncated TTRR matrix (lowest ``count`` if given).

    ``method``: 'auto' balances to a symmetric Jacobi matrix when possible and
    falls back to the dense general solver; 'symmetric' or 'general' force a path.
    """
    if method not in ("auto", "symmetric", "general"):
        raise ValueError(f"unknown method {method!r}")
    n = t.size
    k = n if count is None else min(count, n)
    if method != "general":
        try:
            sym, _ = balance_to_symmetric(t)
        except NotBalanceable:
            if method == "symmetric":
                raise
        else:
            if n == 1:
                return sym.diag[:1].copy()
            return linalg.eigh_tridiagonal(
                sym.diag, sym.sup, eigvals_only=True, select="i", select_range=(0, k - 1)
            )
    # magnitude balancing first: raw monomial-basis TTRRs are far from normal
    vals = np.linalg.eigvals(balance_magnitudes(t)[0].dense())
    vals = vals[np.argsort(vals.real, kind="stable")][:k]
    return _real_or_raise(vals)


def _banded_lower(h: TruncatedHamiltonian) -> np.ndarray:
    bw = h.bandwidth()
    coo = h.matrix.tocoo()
    keep = coo.row >= coo.col
    dtype = complex if np.iscomplexobj(coo.data) else float
    ab = np.zeros((bw + 1, h.dimension), dtype=dtype)
    ab[coo.row[keep] - coo.col[keep], coo.col[keep]] = coo.data[keep]
    return ab


def eig_hamiltonian(h: TruncatedHamiltonian, count: int | None = None) -> np.ndarray:
    """Lowest eigenvalues of a truncated full Hamiltonian (banded Hermitian path when possible)."""
    k = h.dimension if count is None else min(count, h.dimension)
    if h.hermitian:
        return linalg.eigvals_banded(_banded_lower(h), lower=True, select="i", select_range=(0, k - 1))
    vals = np.linalg.eigvals(h.dense())
    vals = vals[np.argsort(vals.real, kind="stable")][:k]
    return _real_or_raise(vals)


def _solve(obj, count: int, want_parity: bool):
    """Return (energies, parities) for a builder product."""
    if isinstance(obj, TridiagonalMatrix):
        e = eig_tridiagonal(obj, count)
        return e, np.full(len(e), obj.parity, dtype=int)
    if isinstance(obj, TruncatedHamiltonian):
        if want_parity and obj.parity is not None and obj.dimension <= PARITY_DENSE_LIMIT:
            e, _, par = parity_labels(obj)
            return e, par
        e = eig_hamiltonian(obj, count)
        return e, np.zeros(len(e), dtype=int)
    parts = [_solve(o, count, want_parity) for o in obj]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _select(e, par, count: int, per_parity: bool):
    order = np.lexsort((par, e))
    e, par = e[order], par[order]
    if not per_parity:
        return e[:count], par[:count]
    keep = np.zeros(len(e), dtype=bool)
    for s in np.unique(par):
        keep[np.flatnonzero(par == s)[:count]] = True
    return e[keep], par[keep]


def _as_spectrum(e, par, n_max, tol, converged) -> Spectrum:
    seen: dict[int, int] = {}
    levels = []
    for energy, p in zip(e, par):
        idx = seen.get(int(p), 0)
        seen[int(p)] = idx + 1
        levels.append(Level(float(energy), int(p), idx, bool(converged)))
    return Spectrum(tuple(levels), n_max, tol)


def converged_levels(
    builder: Callable[[int], object],
    count: int,
    tol: float = 1e-10,
    n_start: int = N_START,
    n_cap: int = N_CAP,
    per_parity: bool = False,
) -> Spectrum:
    """Double n_max until the lowest ``count`` levels move by less than ``tol``.

    ``builder(n_max)`` returns a TridiagonalMatrix, a list of them (one per
    parity block) or a TruncatedHamiltonian. With ``per_parity`` the count
    applies to each parity class separately. Raises ConvergenceFailure at the cap.
    """
    if count < 1 or not tol > 0:
        raise ValueError("need count >= 1 and tol > 0")
    n = max(n_start, 4 * count)
    prev = None
    delta = math.inf
    while True:
        e, par = _select(*_solve(builder(n), count, per_parity), count, per_parity)
        if prev is not None and len(prev) == len(e):
            delta = float(np.max(np.abs(e - prev)))
            if delta < tol:
                break
        if n >= n_cap:
            best = _as_spectrum(e, par, n, tol, False)
            raise ConvergenceFailure(
                f"lowest {count} levels still moving by {delta:.3g} at n_max={n} (cap {n_cap})",
                best=best,
                last_delta=delta,
            )
        prev = e
        n = min(2 * n, n_cap)
    if not per_parity:
        built = builder(n)
        if isinstance(built, TruncatedHamiltonian) and built.parity is not None:
            e, par = _select(*_solve(built, count, True), count, False)
    return _as_spectrum(e, par, n, tol, True)


# ---------------------------------------------------------------------------
# analytic oracles


def jcm_analytic(p: GrmParams, count: int) -> np.ndarray:
    """Closed-form JCM (k2 = 0) spectrum: -mu and gamma(n+1/2) +- sqrt((mu-gamma/2)^2 + k1^2 (n+1))."""
    if p.k2 != 0:
        raise ValueError("jcm_analytic requires k2 == 0")
    n = np.arange(4 * count + 64, dtype=float)
    root = np.sqrt((p.mu - p.gamma / 2) ** 2 + p.k1 ** 2 * (n + 1))
    vals = np.concatenate([[-p.mu], p.gamma * (n + 0.5) - root, p.gamma * (n + 0.5) + root])
    return np.sort(vals)[:count]


def solvable_no_reflection(p: RmParams, count: int, sign: int = 1) -> np.ndarray:
    """Eigenvalues m - kappa^2 + sign*Delta of (z + kappa) d + kappa z + sign*Delta.

    Holomorphy of (z + kappa)^a exp(-kappa z) requires the exponent
    a = eps + kappa^2 - sign*Delta to be a non-negative integer.
    """
    m = np.arange(count, dtype=float)
    return m - p.kappa ** 2 + sign * p.delta


# ---------------------------------------------------------------------------
# crossing scans


@dataclass(frozen=True)
class Sweep:
    param: str
    lo: float
    hi: float
    steps: int

    def grid(self) -> np.ndarray:
        if self.steps <= 0:
            return np.empty(0)
        if self.steps == 1:
            return np.array([float(self.lo)])
        g = np.linspace(self.lo, self.hi, self.steps)
        if np.any(np.diff(g) <= 0):
            raise ValueError("sweep grid must be strictly increasing")
        return g

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        try:
            name, lo, hi, steps = text.split(":")
            return cls(name, float(lo), float(hi), int(steps))
        except ValueError as exc:
            raise ValueError(f"sweep must look like param:lo:hi:steps, got {text!r}") from exc


@dataclass(frozen=True)
class CrossingEvent:
    parameter_value: float
    level_a: tuple[int, int]
    level_b: tuple[int, int]
    min_gap: float
    kind: str

    @property
    def same_parity(self) -> bool:
        return self.level_a[0] == self.level_b[0]


class _Evaluator:
    def __init__(self, family, levels, tol):
        self.family = family
        self.levels = levels
        self.tol = tol
        self.cache: dict[float, dict[int, np.ndarray]] = {}

    def __call__(self, x: float) -> dict[int, np.ndarray]:
        x = float(x)
        hit = self.cache.get(x)
        if hit is None:
            spec = converged_levels(self.family(x), self.levels, self.tol, per_parity=True)
            hit = {s: spec.by_parity(s) for s in (1, -1)}
            self.cache[x] = hit
        return hit

    def irreducible(self, x: float) -> bool:
        built = self.family(float(x))(N_START)
        items = built if isinstance(built, (list, tuple)) else [built]
        return all(b.is_irreducible() for b in items if isinstance(b, TridiagonalMatrix))


def _bisect(ev: _Evaluator, a: float, b: float, fa: float, i: int, j: int):
    def f(x):
        e = ev(x)
        return e[1][i] - e[-1][j]

    while b - a > BISECT_TOL:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0:
            return mid, 0.0
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    x = 0.5 * (a + b)
    return x, abs(f(x))


def crossing_scan(
    family: Callable[[float], Callable[[int], object]],
    sweep: Sweep,
    levels: int,
    tol: float = 1e-10,
    threads: int | None = None,
) -> list[CrossingEvent]:
    """Track the lowest ``levels`` levels of each parity along ``sweep``.

    Opposite-parity pairs whose energy ordering inverts between grid points are
    bisected to 1e-9 in the parameter and reported as true crossings. Each
    adjacent equal-parity pair reports its refined minimum gap. Grid points where
    a TTRR block is reducible (a zero off-diagonal, e.g. zero coupling) are left
    out of the equal-parity minimisation, since the nondegeneracy argument needs
    an irreducible Jacobi matrix; they are logged.
    """
    grid = sweep.grid()
    if grid.size == 0:
        return []
    ev = _Evaluator(family, levels, tol)
    with ThreadPoolExecutor(max_workers=threads or thread_count()) as pool:
        results = list(pool.map(ev, grid))
    for x, r in zip(grid, results):
        ev.cache[float(x)] = r
    if any(len(r[s]) < levels for r in results for s in (1, -1)):
        raise ValueError("builder did not provide enough levels per parity")
    plus = np.array([r[1][:levels] for r in results])
    minus = np.array([r[-1][:levels] for r in results])
    events: list[CrossingEvent] = []

    for i in range(levels):
        for j in range(levels):
            f = plus[:, i] - minus[:, j]
            for k in range(len(grid)):
                if f[k] == 0:
                    events.append(CrossingEvent(float(grid[k]), (1, i), (-1, j), 0.0, "true_crossing"))
                elif k + 1 < len(grid) and f[k + 1] != 0 and (f[k] > 0) != (f[k + 1] > 0):
                    x, gap = _bisect(ev, float(grid[k]), float(grid[k + 1]), float(f[k]), i, j)
                    kind = "true_crossing" if gap <= CROSSING_GAP else "avoided"
                    events.append(CrossingEvent(x, (1, i), (-1, j), gap, kind))

    ok = np.array([ev.irreducible(x) for x in grid])
    if not ok.all():
        log.info("equal-parity gaps skip reducible points %s", grid[~ok].tolist())
    if ok.any():
        for s, arr in ((1, plus), (-1, minus)):
            for i in range(levels - 1):
                gaps = np.where(ok, arr[:, i + 1] - arr[:, i], np.inf)
                k = int(np.argmin(gaps))
                x_best, g_best = float(grid[k]), float(gaps[k])
                lo = float(grid[k - 1]) if k > 0 and ok[k - 1] else x_best
                hi = float(grid[k + 1]) if k + 1 < len(grid) and ok[k + 1] else x_best
                if hi > lo:
                    def gap(x, s=s, i=i):
                        e = ev(x)[s]
                        return e[i + 1] - e[i]

                    res = optimize.minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": BISECT_TOL})
                    if res.fun < g_best:
                        x_best, g_best = float(res.x), float(res.fun)
                kind = "true_crossing" if g_best <= DEGENERACY_GAP else "avoided"
                events.append(CrossingEvent(x_best, (s, i), (s, i + 1), g_best, kind))

    events.sort(key=lambda e: (e.parameter_value, e.level_a, e.level_b))
    return events


def crossing_violations(events: Sequence[CrossingEvent]) -> list[CrossingEvent]:
    """True crossings between equal-parity levels (forbidden by nondegeneracy)."""
    return [e for e in events if e.kind == "true_crossing" and e.same_parity]
