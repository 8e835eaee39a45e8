"""Temporally correlated sparse test signals.

Each coefficient carries two independent processes: a two-state Markov chain
for the support bit (activation probability p01, deactivation p10 chosen so
the stationary activity rate is lambda) and a Gauss-Markov recursion for the
amplitude, a[t] = (1 - rho) a[t-1] + rho v[t] with v ~ N(0, sigma_L^2).
Amplitudes keep evolving while a coefficient is inactive, so a coefficient
re-entering the support carries a fresh stationary draw rather than a stale
value. Signals are composed either directly (canonical basis) or through an
orthonormal DCT synthesis; in the DCT case the region of interest is a third,
independent Markov chain over the canonical-domain coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CANONICAL = "canonical"
DCT = "dct"
BASES = (CANONICAL, DCT)


def derive_p10(lam: float, p01: float, clamp: bool = False) -> float:
    """Deactivation probability that keeps the chain stationary at rate lam.

    Solves (1 - lam) * p01 = lam * p10. Raises ValueError when the resulting
    p10 exceeds 1 (no stationary chain exists at that rate); with clamp=True
    returns 1.0 instead, and the caller is expected to saturate p01 at the
    feasibility boundary lam / (1 - lam) so the stationary rate stays lam
    (see SupportChainParams.from_rate).
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must be in (0, 1), got {lam}")
    if not 0.0 <= p01 <= 1.0:
        raise ValueError(f"p01 must be in [0, 1], got {p01}")
    p10 = p01 * (1.0 - lam) / lam
    if p10 > 1.0:
        if clamp:
            return 1.0
        raise ValueError(
            f"no stationary chain at rate {lam} with p01={p01} (p10 would be {p10:.4g})"
        )
    return p10


def stationary_amp_var(rho: float, sigma_L: float) -> float:
    """Stationary variance of a[t] = (1 - rho) a[t-1] + rho v[t].

    Fixed point of v = (1 - rho)^2 v + rho^2 sigma_L^2, which simplifies to
    rho * sigma_L^2 / (2 - rho).
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    if sigma_L <= 0.0:
        raise ValueError(f"sigma_L must be positive, got {sigma_L}")
    return rho * sigma_L**2 / (2.0 - rho)


@dataclass(frozen=True)
class SupportChainParams:
    """Two-state Markov chain for per-coefficient support bits."""

    lam: float
    p01: float
    p10: float

    @classmethod
    def from_rate(cls, lam: float, p01: float, clamp: bool = False) -> "SupportChainParams":
        """Build a stationary chain; clamp saturates infeasible p01 values.

        Requesting p01 > lam / (1 - lam) has no stationary chain at rate lam.
        With clamp=True the pair saturates at the feasibility boundary
        (p01 = lam / (1 - lam), p10 = 1): the fastest support churn that still
        holds the activity rate -- and hence the sparsity level -- at lam.
        Sweeps over p01 therefore vary temporal correlation only, never
        signal density.
        """
        p10 = derive_p10(lam, p01, clamp=clamp)
        if clamp and p01 * (1.0 - lam) > lam:
            p01 = lam / (1.0 - lam)
        return cls(lam=lam, p01=p01, p10=p10)

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must be in (0, 1), got {self.lam}")
        for name in ("p01", "p10"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if abs((1.0 - self.lam) * self.p01 - self.lam * self.p10) > 1e-9:
            raise ValueError("chain parameters are not stationary at rate lam")


@dataclass(frozen=True)
class AmplitudeParams:
    """Gauss-Markov amplitude recursion parameters."""

    rho: float
    sigma_L: float

    def __post_init__(self):
        stationary_amp_var(self.rho, self.sigma_L)  # validates

    @property
    def sigma_a_stat(self) -> float:
        return float(np.sqrt(stationary_amp_var(self.rho, self.sigma_L)))


@dataclass
class SignalState:
    """Signal snapshot at one time step.

    support and roi are boolean length-N vectors; in the canonical basis roi
    is the support itself (same array). x is the composed signal; in the DCT
    basis the sparse coefficients live in the transform domain and
    x = Psi^T (support * amplitudes).
    """

    t: int
    support: np.ndarray
    amplitudes: np.ndarray
    roi: np.ndarray
    x: np.ndarray


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT analysis matrix (rows orthonormal).

    Row k: w_k * cos(pi * k * (2j + 1) / (2n)) with w_0 = sqrt(1/n) and
    w_k = sqrt(2/n) otherwise, so Psi @ Psi.T == I.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    psi = np.cos(np.pi * k * (2 * j + 1) / (2.0 * n))
    psi *= np.sqrt(2.0 / n)
    psi[0] *= np.sqrt(0.5)
    return psi


def compose_signal(state: SignalState, basis: str, dct: np.ndarray | None = None) -> np.ndarray:
    """Compose x from support and amplitudes (canonical: s*a, DCT: Psi^T(s*a))."""
    sparse = np.where(state.support, state.amplitudes, 0.0)
    if basis == CANONICAL:
        return sparse
    if basis == DCT:
        if dct is None:
            raise ValueError("DCT basis requires the transform matrix")
        return dct.T @ sparse
    raise ValueError(f"unknown basis {basis!r}")


def init_state(
    chain: SupportChainParams,
    amp: AmplitudeParams,
    n: int,
    basis: str,
    rng: np.random.Generator,
    dct: np.ndarray | None = None,
) -> SignalState:
    """Draw a stationary starting state at t=1.

    Support bits are Bernoulli(lam) and amplitudes come from the recursion's
    stationary distribution, so statistics are time-homogeneous from the very
    first step. DCT mode additionally draws independent ROI bits at rate lam.
    """
    support = rng.random(n) < chain.lam
    amplitudes = rng.normal(0.0, amp.sigma_a_stat, size=n)
    if basis == DCT:
        roi = rng.random(n) < chain.lam
    else:
        roi = support
    state = SignalState(t=1, support=support, amplitudes=amplitudes, roi=roi, x=np.empty(0))
    state.x = compose_signal(state, basis, dct)
    return state


def advance_state(
    state: SignalState,
    chain: SupportChainParams,
    amp: AmplitudeParams,
    basis: str,
    rng: np.random.Generator,
    dct: np.ndarray | None = None,
) -> SignalState:
    """Advance support, amplitude, and (DCT mode) ROI processes by one step.

    Amplitudes evolve for every coefficient, active or not. Draw order is
    fixed (support flips, amplitude innovations, then ROI flips) so that runs
    sharing a generator stream stay aligned draw-for-draw.
    """
    n = state.support.size
    flips = rng.random(n)
    support = np.where(state.support, flips >= chain.p10, flips < chain.p01)
    innovations = rng.normal(0.0, amp.sigma_L, size=n)
    amplitudes = (1.0 - amp.rho) * state.amplitudes + amp.rho * innovations
    if basis == DCT:
        roi_flips = rng.random(n)
        roi = np.where(state.roi, roi_flips >= chain.p10, roi_flips < chain.p01)
    else:
        roi = support
    new = SignalState(
        t=state.t + 1, support=support, amplitudes=amplitudes, roi=roi, x=np.empty(0)
    )
    new.x = compose_signal(new, basis, dct)
    return new


def true_roi_report(
    state: SignalState,
    detected: np.ndarray | None,
    fault_rate: float,
    basis: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """ROI report vector alpha for one time step.

    Canonical mode passes the detector output through unchanged -- faults
    there arise from recovery error, not injection. DCT mode reports the
    ground-truth ROI with each bit independently flipped at fault_rate.
    The fault draw always consumes n uniforms in DCT mode so that scenarios
    differing only in fault_rate share identical downstream streams.
    """
    if not 0.0 <= fault_rate <= 1.0:
        raise ValueError(f"fault_rate must be in [0, 1], got {fault_rate}")
    if basis == CANONICAL:
        if detected is None:
            raise ValueError("canonical mode requires detector output")
        return np.asarray(detected, dtype=bool)
    flips = rng.random(state.roi.size) < fault_rate
    return state.roi ^ flips
