import math

import numpy as np
import pytest

from drabi.invariants import (
    CouplingPolar,
    invariant_operators,
    invariant_pattern,
    pattern_motion_scan,
)
from drabi.models import GrmParams, build_grm_full, parity_labels


def test_polar_parametrization():
    p = CouplingPolar(0.8, math.pi / 6).params(1.0, 0.4)
    assert p.k1 == pytest.approx(0.8 * math.cos(math.pi / 6))
    assert p.k2 == pytest.approx(0.4)
    with pytest.raises(ValueError):
        CouplingPolar(-0.1, 0.0)
    with pytest.raises(ValueError):
        CouplingPolar(0.5, 2.0)


def test_uncoupled_invariants_vanish():
    pts = invariant_pattern(GrmParams(1.0, 0.4, 0.0, 0.0), 10)
    assert all(pt.t1 == 0 and pt.t2 == 0 for pt in pts)


def test_jcm_pattern_is_real():
    pts = invariant_pattern(GrmParams(1.0, 0.5, 0.4, 0.0), 20)
    assert max(pt.imag_residual for pt in pts) <= 1e-10
    assert {pt.parity for pt in pts} == {1, -1}


def test_generic_pattern_is_real():
    pts = invariant_pattern(GrmParams(1.0, 0.7, 0.8, 0.3), 20)
    assert all(pt.accepted for pt in pts)


def test_t2_is_sum_of_halves():
    p = GrmParams(1.0, 0.7, 0.8, 0.3)
    n_max = 120
    e, v, _ = parity_labels(build_grm_full(p, n_max))
    ops = invariant_operators(n_max)
    v = v[:, :15]
    diag = lambda op: np.einsum("ij,ij->j", v.conj(), op @ v)  # noqa: E731
    np.testing.assert_allclose(diag(ops["t2"]), diag(ops["ad_sm"]) + diag(ops["ad_sp"]), atol=1e-12)


def test_truncation_stability():
    p = GrmParams(1.0, 0.6, 0.9, 0.4)
    a = invariant_pattern(p, 15, n_max=100)
    b = invariant_pattern(p, 15, n_max=200)
    for x, y in zip(a, b):
        assert (x.parity, x.index_within_parity) == (y.parity, y.index_within_parity)
        assert abs(x.t1 - y.t1) < 1e-6 and abs(x.t2 - y.t2) < 1e-6


def test_energies_match_full_model():
    p = GrmParams(1.3, 0.2, 0.5, 0.7)
    pts = invariant_pattern(p, 8, n_max=100)
    ref = np.sort(np.linalg.eigvalsh(build_grm_full(p, 100).dense()))[:8]
    np.testing.assert_allclose([pt.energy for pt in pts], ref, atol=1e-10)


def test_motion_scan_tracks_labels():
    frames = pattern_motion_scan(math.pi / 4, (0.0, 0.8), 4, 6)
    assert [f.Lambda for f in frames] == pytest.approx([0.0, 0.8 / 3, 1.6 / 3, 0.8])
    assert all(f.error is None for f in frames)
    assert all(pt.t1 == 0 and pt.t2 == 0 for pt in frames[0].points)
    for f in frames:
        labels = [(pt.parity, pt.index_within_parity) for pt in f.points]
        assert len(set(labels)) == len(labels)
        assert all(pt.accepted for pt in f.points)


def test_motion_scan_records_failures():
    frames = pattern_motion_scan(0.0, (0.1, 0.2), 2, 3, gamma=-1.0)
    assert all(f.error and not f.points for f in frames)
