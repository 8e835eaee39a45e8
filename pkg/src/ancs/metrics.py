"""Reconstruction-error metrics for compressive sampling experiments.

The headline figure of merit is the time-averaged normalized mean squared
error (TNMSE): per time step the squared reconstruction error is normalized
by the true signal energy, and those ratios are averaged over the run.
Region-restricted variants score only the coefficients inside (or outside)
a region-of-interest mask, which is how the attention-driven samplers are
judged on the part of the signal they were asked to protect.

All aggregation here happens in the linear domain; conversion to decibels
is a final presentation step (averaging dB values directly would compute a
geometric mean and understate heavy-tailed errors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "nmse",
    "tnmse",
    "region_tnmse",
    "to_db",
    "TrialRecord",
]

# Signal energies at or below this are treated as zero for normalization
# purposes (the ratio would be meaningless noise amplification).
_ENERGY_FLOOR = 1e-300


def nmse(x_true: np.ndarray, x_hat: np.ndarray) -> float:
    """Normalized squared error ``||x_hat - x_true||^2 / ||x_true||^2``.

    Returns ``nan`` when the reference signal has (numerically) zero
    energy, since the ratio is undefined there.
    """
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x_true.shape != x_hat.shape:
        raise ValueError(
            f"shape mismatch: {x_true.shape} vs {x_hat.shape}"
        )
    energy = float(np.sum(x_true**2))
    if energy <= _ENERGY_FLOOR:
        return float("nan")
    err = float(np.sum((x_hat - x_true) ** 2))
    return err / energy


def tnmse(x_true: np.ndarray, x_hat: np.ndarray) -> float:
    """Time-averaged NMSE over a (T, N) trajectory.

    Each row is a time step; rows are scored by :func:`nmse` and averaged.
    Time steps where the true signal is identically zero are skipped (they
    carry no information about reconstruction quality).  Returns ``nan``
    if every step was skipped.
    """
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x_true.ndim != 2:
        raise ValueError("expected a (T, N) trajectory")
    if x_true.shape != x_hat.shape:
        raise ValueError(
            f"shape mismatch: {x_true.shape} vs {x_hat.shape}"
        )
    vals = [nmse(xt, xh) for xt, xh in zip(x_true, x_hat)]
    vals = [v for v in vals if not np.isnan(v)]
    if not vals:
        return float("nan")
    return float(np.mean(vals))


def region_tnmse(
    x_true: np.ndarray,
    x_hat: np.ndarray,
    masks: np.ndarray,
    inside: bool = True,
) -> float:
    """TNMSE restricted to coefficients inside (or outside) a mask.

    ``masks`` is a boolean (T, N) array, one region-of-interest mask per
    time step.  With ``inside=False`` the complement region is scored.
    Steps where the selected region is empty or carries zero true energy
    are skipped; returns ``nan`` if nothing remains.
    """
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    masks = np.asarray(masks, dtype=bool)
    if x_true.shape != x_hat.shape or x_true.shape != masks.shape:
        raise ValueError("trajectory and mask shapes must all match")
    vals = []
    for xt, xh, mask in zip(x_true, x_hat, masks):
        sel = mask if inside else ~mask
        if not sel.any():
            continue
        v = nmse(xt[sel], xh[sel])
        if not np.isnan(v):
            vals.append(v)
    if not vals:
        return float("nan")
    return float(np.mean(vals))


def to_db(value: float) -> float:
    """Convert a linear power ratio to decibels (``10 log10``).

    Zero maps to ``-inf``; ``nan`` propagates.  Negative inputs are
    rejected because power ratios cannot be negative.
    """
    if np.isnan(value):
        return float("nan")
    if value < 0.0:
        raise ValueError(f"negative power ratio: {value}")
    if value == 0.0:
        return float("-inf")
    return float(10.0 * np.log10(value))


@dataclass
class TrialRecord:
    """Per-trial outcome of one closed-loop run.

    Holds the linear-domain error summaries for a single Monte Carlo
    trial so the harness can aggregate across trials before any dB
    conversion.
    """

    tnmse_lin: float
    roi_tnmse_lin: float
    nonroi_tnmse_lin: float
    gain_var: float = float("nan")
    extras: dict = field(default_factory=dict)
