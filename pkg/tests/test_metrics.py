"""TNMSE metrics: normalization, region splits, dB conversion."""

import math

import numpy as np
import pytest

from ancs import metrics


# ---------------------------------------------------------------------------
# nmse


def test_nmse_exact_recovery_is_zero():
    x = np.array([1.0, -2.0, 3.0])
    assert metrics.nmse(x, x) == 0.0


def test_nmse_zero_estimate_is_one():
    x = np.array([1.0, -2.0, 3.0])
    assert metrics.nmse(x, np.zeros(3)) == pytest.approx(1.0, rel=1e-15)


def test_nmse_hand_value():
    x = np.array([3.0, 4.0])  # energy 25
    xhat = np.array([3.0, 3.0])  # error energy 1
    assert metrics.nmse(x, xhat) == pytest.approx(0.04, rel=1e-15)


def test_nmse_zero_energy_reference_is_nan():
    assert math.isnan(metrics.nmse(np.zeros(3), np.ones(3)))


# ---------------------------------------------------------------------------
# tnmse


def test_tnmse_averages_per_step_ratios():
    x = np.array([[3.0, 4.0], [1.0, 0.0]])
    xhat = np.array([[3.0, 3.0], [0.0, 0.0]])
    # Per-step NMSEs are 0.04 and 1.0; the time average weights them equally.
    assert metrics.tnmse(x, xhat) == pytest.approx(0.52, rel=1e-15)


def test_tnmse_skips_zero_energy_steps():
    x = np.array([[3.0, 4.0], [0.0, 0.0]])
    xhat = np.array([[3.0, 3.0], [1.0, 1.0]])
    assert metrics.tnmse(x, xhat) == pytest.approx(0.04, rel=1e-15)


def test_tnmse_all_steps_empty_is_nan():
    assert math.isnan(metrics.tnmse(np.zeros((3, 2)), np.ones((3, 2))))


def test_tnmse_shape_validated():
    with pytest.raises(ValueError):
        metrics.tnmse(np.zeros((2, 3)), np.zeros((3, 2)))


# ---------------------------------------------------------------------------
# region_tnmse


def test_region_tnmse_inside_and_outside():
    x = np.array([[3.0, 4.0, 7.0]])
    xhat = np.array([[3.0, 3.0, 5.0]])
    mask = np.array([[True, True, False]])
    inside = metrics.region_tnmse(x, xhat, mask, inside=True)
    outside = metrics.region_tnmse(x, xhat, mask, inside=False)
    assert inside == pytest.approx(1.0 / 25.0, rel=1e-15)
    assert outside == pytest.approx(4.0 / 49.0, rel=1e-15)


def test_region_tnmse_skips_empty_regions():
    x = np.array([[3.0, 4.0], [5.0, 6.0]])
    xhat = x + 1.0
    masks = np.array([[True, False], [False, False]])
    # Second step has an empty inside-region; only the first contributes.
    got = metrics.region_tnmse(x, xhat, masks, inside=True)
    assert got == pytest.approx(1.0 / 9.0, rel=1e-15)


def test_region_tnmse_all_regions_empty_is_nan():
    x = np.ones((2, 3))
    masks = np.zeros((2, 3), dtype=bool)
    assert math.isnan(metrics.region_tnmse(x, x, masks, inside=True))


def test_region_tnmse_complements_cover_signal():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5, 8))
    xhat = x + rng.normal(scale=0.1, size=(5, 8))
    masks = rng.random((5, 8)) < 0.5
    inside = metrics.region_tnmse(x, xhat, masks, inside=True)
    outside = metrics.region_tnmse(x, xhat, masks, inside=False)
    assert np.isfinite(inside) and np.isfinite(outside)


# ---------------------------------------------------------------------------
# to_db


def test_to_db_values():
    assert metrics.to_db(1.0) == 0.0
    assert metrics.to_db(0.1) == pytest.approx(-10.0, rel=1e-12)
    assert metrics.to_db(100.0) == pytest.approx(20.0, rel=1e-12)


def test_to_db_edge_cases():
    assert metrics.to_db(0.0) == -np.inf
    assert math.isnan(metrics.to_db(float("nan")))
    with pytest.raises(ValueError):
        metrics.to_db(-0.5)


def test_db_roundtrip():
    for v in (1e-6, 0.037, 1.0, 42.0):
        assert 10.0 ** (metrics.to_db(v) / 10.0) == pytest.approx(v, rel=1e-12)


# ---------------------------------------------------------------------------
# TrialRecord


def test_trial_record_defaults():
    rec = metrics.TrialRecord(tnmse_lin=0.1, roi_tnmse_lin=0.2, nonroi_tnmse_lin=float("nan"))
    assert math.isnan(rec.gain_var)
    assert rec.extras == {}
