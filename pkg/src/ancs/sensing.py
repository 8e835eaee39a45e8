"""Non-uniform measurement matrices and noisy linear measurement.

The total sensing energy is fixed at ||Phi||_F^2 = N (the conventional
unit-norm-column budget); column n receives norm
gamma_n = sqrt(N) * cbar_n / sqrt(sum cbar^2), so uniform importance
reproduces the conventional matrix exactly and higher-importance
coefficients get more energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MeasurementEnsemble:
    """Per-step sensing state: column gains, the matrix, and the noise level."""

    gains: np.ndarray
    matrix: np.ndarray
    sigma_n: float

    def __post_init__(self):
        m, n = self.matrix.shape
        if self.gains.shape != (n,):
            raise ValueError("gains length must match matrix columns")
        if self.sigma_n < 0:
            raise ValueError("sigma_n must be non-negative")


def column_gains(cbar) -> np.ndarray:
    """Column norms gamma from importance means; sum(gamma^2) == N exactly."""
    cbar = np.asarray(cbar, dtype=float)
    if cbar.ndim != 1 or cbar.size == 0:
        raise ValueError("cbar must be a non-empty vector")
    if np.any(cbar < 0) or np.any(cbar > 1):
        raise ValueError("importance means must lie in [0, 1]")
    eta = float(np.sqrt((cbar**2).sum()))
    if eta == 0.0:
        raise ValueError("all-zero importance vector cannot allocate energy")
    return np.sqrt(cbar.size) * cbar / eta


def build_matrix(gains: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Fresh Gaussian matrix with exact column norms equal to gains.

    Draws m x n i.i.d. standard normals, normalizes each column to unit norm,
    then scales column n by gains[n]. The normalize-then-scale construction
    pins the norms exactly rather than in expectation. A column drawn with
    zero norm (probability zero) is redrawn.
    """
    gains = np.asarray(gains, dtype=float)
    if m < 1:
        raise ValueError("m must be >= 1")
    n = gains.size
    raw = rng.normal(size=(m, n))
    norms = np.linalg.norm(raw, axis=0)
    while np.any(norms == 0.0):
        dead = norms == 0.0
        raw[:, dead] = rng.normal(size=(m, int(dead.sum())))
        norms = np.linalg.norm(raw, axis=0)
    return raw * (gains / norms)


def measure(matrix: np.ndarray, x: np.ndarray, sigma_n: float, rng: np.random.Generator) -> np.ndarray:
    """y = Phi x + n with white Gaussian noise of standard deviation sigma_n.

    The noise draw always happens (even at sigma_n == 0) to keep generator
    streams aligned across scenarios that differ only in noise level.
    """
    m, n = matrix.shape
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"signal must have shape ({n},), got {x.shape}")
    noise = rng.normal(size=m)
    return matrix @ x + sigma_n * noise


def calibrate_noise(
    n: int, m: int, snr_db: float, lam: float, amp_stationary_var: float
) -> float:
    """Noise standard deviation hitting the requested SNR.

    SNR is defined in the measurement domain under the uniform (unit-norm
    column) baseline, where the expected measurement energy equals the
    expected signal energy E||x||^2 = N * lam * Var[a]:

        sigma_n^2 = E||x||^2 / (M * 10^(SNR/10))
    """
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    expected_energy = n * lam * amp_stationary_var
    sigma_sq = expected_energy / (m * 10.0 ** (snr_db / 10.0))
    return float(np.sqrt(sigma_sq))
