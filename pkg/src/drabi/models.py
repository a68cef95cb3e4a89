"""
Parameter records and truncated Fock-space builders for the two-component models.

These full matrices are the brute-force oracles for the Dunkl-operator pipeline.
Matrices are stored sparse; ``TruncatedHamiltonian.dense()`` gives the array.
"""
from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import linalg, sparse

from drabi.errors import JcmBoundary, SpectralCollapse

__all__ = [
    "GrmParams",
    "RmParams",
    "Su11Params",
    "GrmDerived",
    "TruncatedHamiltonian",
    "derive_grm",
    "build_grm_full",
    "build_grm_fg_full",
    "build_grm_similarity",
    "build_su11_full",
    "build_two_photon_fock",
    "build_two_mode_fock",
    "parity_labels",
    "write_matrix",
    "read_matrix",
]

PARITY_TOL = 1e-8
MIXED_TOL = 1e-6
CLUSTER_TOL = 1e-9


@dataclass(frozen=True)
class GrmParams:
    """gamma a^dag a + mu s3 + k1 (a^dag s- + a s+) + k2 (a^dag s+ + a s-)."""

    gamma: float
    mu: float
    k1: float
    k2: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def delta(self) -> float:
        return self.mu / self.gamma

    @classmethod
    def from_polar(cls, gamma: float, mu: float, Lambda: float, alpha: float) -> "GrmParams":
        """k1 = Lambda cos(alpha), k2 = Lambda sin(alpha)."""
        if Lambda < 0 or not (0 <= alpha <= math.pi / 2 + 1e-15):
            raise ValueError("need Lambda >= 0 and alpha in [0, pi/2]")
        # exact zeros at the axis endpoints keep the JCM boundary exact
        c = 0.0 if math.isclose(alpha, math.pi / 2) else math.cos(alpha)
        s = 0.0 if alpha == 0 else math.sin(alpha)
        return cls(gamma, mu, Lambda * c, Lambda * s)


class GrmDerived(NamedTuple):
    delta: float
    lambda_plus: float
    lambda_minus: float
    kappa: float
    w: float


def derive_grm(p: GrmParams) -> GrmDerived:
    prod = p.k1 * p.k2
    if prod == 0:
        raise JcmBoundary("k1*k2 = 0: w, kappa and lambda/kappa are undefined")
    if prod < 0:
        raise ValueError("k1*k2 < 0: the similarity transform needs couplings of equal sign")
    g2 = p.gamma ** 2
    return GrmDerived(
        delta=p.mu / p.gamma,
        lambda_plus=(p.k1 ** 2 + p.k2 ** 2) / (2 * g2),
        lambda_minus=(p.k1 ** 2 - p.k2 ** 2) / (2 * g2),
        kappa=math.sqrt(prod) / p.gamma,
        w=(p.k2 / p.k1) ** 0.25,
    )


@dataclass(frozen=True)
class RmParams:
    """Dimensionless Rabi model: Delta = mu/gamma, kappa = g/gamma (kappa = 0 allowed)."""

    delta: float
    kappa: float

    @classmethod
    def from_grm(cls, p: GrmParams) -> "RmParams":
        if p.k1 != p.k2:
            raise ValueError("RM limit requires k1 == k2")
        return cls(p.mu / p.gamma, p.k1 / p.gamma)

    def to_grm(self, gamma: float = 1.0) -> GrmParams:
        return GrmParams(gamma, self.delta * gamma, self.kappa * gamma, self.kappa * gamma)


KINDS = ("two_photon", "two_mode")


@dataclass(frozen=True)
class Su11Params:
    """gamma (K0 - c) + delta s1 + s3 (K+ + K-) in the discrete series D+(q)."""

    gamma: float
    delta: float
    q: Fraction
    kind: str = "two_photon"

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q).limit_denominator(1000))
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind == "two_photon" and self.q not in (Fraction(1, 4), Fraction(3, 4)):
            raise ValueError(f"two_photon requires q in {{1/4, 3/4}}, got {self.q}")
        if self.kind == "two_mode" and (self.q <= 0 or (2 * self.q).denominator != 1):
            raise ValueError(f"two_mode requires 2q a positive integer, got {self.q}")

    @property
    def c(self) -> float:
        return 0.25 if self.kind == "two_photon" else 0.5

    @property
    def collapsed(self) -> bool:
        return self.gamma <= 2


@dataclass(frozen=True)
class TruncatedHamiltonian:
    """Truncated operator on an ordered basis.

    ``parity`` is the matrix of the Z2 symmetry on the same basis, when known.
    """

    matrix: sparse.csr_array
    basis_tag: str
    hermitian: bool = True
    parity: sparse.csr_array | None = field(default=None, compare=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def bandwidth(self) -> int:
        coo = self.matrix.tocoo()
        if coo.nnz == 0:
            return 0
        return int(np.max(np.abs(coo.row - coo.col)))


def _coo(dim, rows, cols, vals):
    m = sparse.coo_array((np.asarray(vals), (np.asarray(rows), np.asarray(cols))), shape=(dim, dim))
    return m.tocsr()


def build_grm_full(p: GrmParams, n_max: int) -> TruncatedHamiltonian:
    """GRM on |n,up>, |n,down> (index 2n, 2n+1) for n = 0..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    dim = 2 * (n_max + 1)
    rows, cols, vals = [], [], []
    for n in range(n_max + 1):
        up, dn = 2 * n, 2 * n + 1
        rows += [up, dn]
        cols += [up, dn]
        vals += [p.gamma * n + p.mu, p.gamma * n - p.mu]
        if n < n_max:
            s = math.sqrt(n + 1)
            # <n+1,dn|H|n,up> = k1 sqrt(n+1),  <n+1,up|H|n,dn> = k2 sqrt(n+1)
            for i, j, v in ((2 * n + 3, up, p.k1 * s), (2 * n + 2, dn, p.k2 * s)):
                rows += [i, j]
                cols += [j, i]
                vals += [v, v]
    n_idx = np.repeat(np.arange(n_max + 1), 2)
    spin = np.tile([1.0, -1.0], n_max + 1)
    par = sparse.diags_array(np.where(n_idx % 2 == 0, 1.0, -1.0) * spin).tocsr()
    return TruncatedHamiltonian(_coo(dim, rows, cols, vals), f"grm |n,s> n<={n_max}", True, par)


def _ladder(n_max: int):
    """Truncated annihilation operator on n = 0..n_max."""
    return sparse.diags_array(np.sqrt(np.arange(1, n_max + 1, dtype=float)), offsets=1)


_S0 = np.eye(2)
_S1 = np.array([[0.0, 1.0], [1.0, 0.0]])
_S2 = np.array([[0.0, -1j], [1j, 0.0]])
_S3 = np.array([[1.0, 0.0], [0.0, -1.0]])


def _kron(op, s):
    return sparse.kron(sparse.csr_array(op), sparse.csr_array(s), format="csr")


def build_grm_fg_full(p: GrmParams, n_max: int) -> TruncatedHamiltonian:
    """FG-frame GRM divided by gamma: A + B s1 + C s2 + D s3 with

    A = a^dag a, B = Delta, C = i lambda_-/kappa a^dag, D = kappa a + lambda_+/kappa a^dag.
    Similar (not unitary) to H/gamma; Hermitian only when k1 == k2.
    """
    d = derive_grm(p)
    a = _ladder(n_max)
    ad = a.T
    eye = sparse.identity(n_max + 1, format="csr")
    num = sparse.diags_array(np.arange(n_max + 1, dtype=float))
    m = (
        _kron(num, _S0)
        + d.delta * _kron(eye, _S1)
        + _kron(1j * d.lambda_minus / d.kappa * ad, _S2)
        + _kron(d.kappa * a + d.lambda_plus / d.kappa * ad, _S3)
    )
    # i * s2 is real, so the imaginary part vanishes identically
    m = sparse.csr_array(m.real)
    r = sparse.diags_array(np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0))
    par = _kron(r, _S1)
    return TruncatedHamiltonian(m, f"grm-fg |n,s> n<={n_max}", p.k1 == p.k2, par)


def build_grm_similarity(p: GrmParams, n_max: int) -> np.ndarray:
    """W H W^{-1} / gamma computed numerically from the original-frame matrix."""
    d = derive_grm(p)
    w = d.w
    W = np.array([[w, 1 / w], [w, -1 / w]]) / math.sqrt(2)
    Winv = np.array([[1 / w, 1 / w], [w, -w]]) / math.sqrt(2)
    eye = np.eye(n_max + 1)
    h = build_grm_full(p, n_max).dense()
    return np.kron(eye, W) @ h @ np.kron(eye, Winv) / p.gamma


def _warn_collapse(p: Su11Params):
    if p.collapsed:
        warnings.warn(
            f"{p.kind} model with gamma={p.gamma} <= 2 is in the spectral-collapse regime; "
            "truncated spectra will not converge",
            SpectralCollapse,
            stacklevel=3,
        )


def build_su11_full(p: Su11Params, n_max: int) -> TruncatedHamiltonian:
    """gamma (K0 - c) + Delta s1 + s3 (K+ + K-) on |m> x {up, down}, m = 0..n_max.

    K0 |m> = (m + q)|m>, K+ |m> = sqrt((m+1)(m+2q)) |m+1>.
    """
    _warn_collapse(p)
    q = float(p.q)
    m_idx = np.arange(n_max + 1, dtype=float)
    k0 = sparse.diags_array(m_idx + q)
    kp = sparse.diags_array(np.sqrt((m_idx[:-1] + 1) * (m_idx[:-1] + 2 * q)), offsets=-1)
    eye = sparse.identity(n_max + 1, format="csr")
    m = (
        _kron(p.gamma * (k0 - p.c * eye), _S0)
        + p.delta * _kron(eye, _S1)
        + _kron(kp + kp.T, _S3)
    )
    r = sparse.diags_array(np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0))
    return TruncatedHamiltonian(
        sparse.csr_array(m), f"su11 {p.kind} q={p.q} |m,s> m<={n_max}", True, _kron(r, _S1)
    )


def build_two_photon_fock(omega: float, beta: float, g: float, n_photons: int) -> np.ndarray:
    """Dense omega a^dag a + beta s3 + g s1 (a^dag^2 + a^2) on photons 0..n_photons, index 2n+s."""
    a = _ladder(n_photons).toarray()
    ad = a.T
    eye = np.eye(n_photons + 1)
    return omega * np.kron(ad @ a, _S0) + beta * np.kron(eye, _S3) + g * np.kron(ad @ ad + a @ a, _S1)


def build_two_mode_fock(omega: float, beta: float, g: float, n_per_mode: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense two-mode model on |n1, n2, s>; returns (H, n1 - n2 per basis state)."""
    n = n_per_mode + 1
    a = _ladder(n_per_mode).toarray()
    ad = a.T
    e = np.eye(n)
    a1, a2 = np.kron(a, e), np.kron(e, a)
    ad1, ad2 = a1.T, a2.T
    eye = np.eye(n * n)
    h = (
        omega * np.kron(ad1 @ a1 + ad2 @ a2, _S0)
        + beta * np.kron(eye, _S3)
        + g * np.kron(ad1 @ ad2 + a1 @ a2, _S1)
    )
    n1, n2 = np.divmod(np.arange(n * n), n)
    diff = np.repeat(n1 - n2, 2)
    return h, diff


def _rotate(block, op):
    sub = block.conj().T @ op @ block
    vals, rot = linalg.eigh((sub + sub.conj().T) / 2)
    return vals, block @ rot


def _resolve_cluster(block, P, order_op):
    vals, block = _rotate(block, P)
    out = []
    for sign in (-1.0, 1.0):
        sel = np.abs(vals - sign) < 0.5
        if sel.sum() > 1:
            _, b = _rotate(block[:, sel], order_op)
            out.append(b)
        elif sel.any():
            out.append(block[:, sel])
    rest = np.abs(np.abs(vals) - 1) >= 0.5
    if rest.any():
        out.append(block[:, rest])
    return np.concatenate(out, axis=1)


def _parity_labels_general(h: TruncatedHamiltonian, P: np.ndarray):
    # similar-to-Hermitian case: eigenvectors are not orthogonal, no cluster rotation
    vals, vecs = linalg.eig(h.dense())
    order = np.argsort(vals.real, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    expect = np.real(np.einsum("ij,ij->j", vecs.conj(), P @ vecs))
    parities = np.where(expect > 1 - MIXED_TOL, 1, np.where(expect < -1 + MIXED_TOL, -1, 0))
    return vals.real, vecs, parities


def parity_labels(h: TruncatedHamiltonian, energies=None, vectors=None):
    """Eigen-decompose h and label every eigenvector by its Z2 parity.

    Degenerate clusters (spacing < 1e-9) are rotated so the parity operator is
    diagonal inside them; ties within equal parity are broken by the basis index
    expectation so the result is deterministic.

    Returns (energies, vectors, parities); parity 0 flags a vector whose
    |<P>| < 1 - 1e-6.
    """
    if h.parity is None:
        raise ValueError("no parity operator attached to this Hamiltonian")
    P = h.parity.toarray()
    if energies is None:
        if not h.hermitian:
            return _parity_labels_general(h, P)
        energies, vectors = linalg.eigh(h.dense())
    vectors = np.array(vectors, copy=True)
    order_op = np.diag(np.arange(h.dimension, dtype=float))
    i = 0
    n = len(energies)
    while i < n:
        j = i + 1
        while j < n and energies[j] - energies[j - 1] < CLUSTER_TOL:
            j += 1
        if j - i > 1:
            vectors[:, i:j] = _resolve_cluster(vectors[:, i:j], P, order_op)
        i = j
    expect = np.real(np.einsum("ij,ij->j", vectors.conj(), P @ vectors))
    parities = np.where(expect > 1 - MIXED_TOL, 1, np.where(expect < -1 + MIXED_TOL, -1, 0))
    if np.any(parities == 0):
        bad = np.flatnonzero(parities == 0)
        warnings.warn(f"parity-mixed eigenvectors at indices {bad.tolist()}", RuntimeWarning, stacklevel=2)
    return np.asarray(energies), vectors, parities


# ---------------------------------------------------------------------------
# binary dump: b"DRABI1", uint64 dimension, dim*dim float64, all little-endian, row-major

MAGIC = b"DRABI1"


def write_matrix(path, m) -> None:
    arr = m.dense() if isinstance(m, TruncatedHamiltonian) else np.asarray(m)
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise ValueError("binary dump supports real matrices only")
        arr = arr.real
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("binary dump expects a square matrix")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", arr.shape[0]))
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:6] != MAGIC:
        raise ValueError("not a DRABI1 matrix file")
    (dim,) = struct.unpack("<Q", raw[6:14])
    body = raw[14:]
    if len(body) != 8 * dim * dim:
        raise ValueError("truncated DRABI1 payload")
    return np.frombuffer(body, dtype="<f8").reshape(dim, dim).copy()
