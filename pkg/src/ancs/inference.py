"""Mean-field variational inference of coefficient importance.

Generative model per coefficient n, over a sliding window of binary ROI
reports alpha_n:

    r   ~ Beta(b1, b0)                 overall report reliability
    u_n ~ Bernoulli(r)                 is coefficient n's reporting reliable
    c_n ~ Beta(beta1_n, beta0_n)       importance level (probability of ROI)
    alpha_n ~ Bernoulli(c_n) if u_n else Bernoulli(1 - c_n)

The posterior is approximated by a fully factorized distribution
q(c) q(u) q(r) with Beta factors for c_n and r and Bernoulli(tau_n) factors
for u_n. Coordinate ascent on the evidence lower bound gives closed-form
sweeps; with A_n ones out of W_n reports on coefficient n:

    q(c_n): betahat1_n = beta1_n + tau_n A_n + (1 - tau_n)(W_n - A_n)
            betahat0_n = beta0_n + tau_n (W_n - A_n) + (1 - tau_n) A_n
    q(u_n): tau_n = sigmoid(rho1_n - rho0_n) with the rho's built from
            digamma expectations of log c, log(1-c), log r, log(1-r)
    q(r):   bhat1 = b1 + sum tau_n,  bhat0 = b0 + sum (1 - tau_n)

Each sweep can only increase the bound, so the ELBO trace is monotone.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .special import digamma, log_beta

# Beta parameters are clamped here before digamma/log-Beta evaluation.
PARAM_FLOOR = 1e-12


@dataclass(frozen=True)
class PriorHyperParams:
    """Beta hyperparameters: scalars for r, length-N vectors for the c_n."""

    b1: float
    b0: float
    beta1: np.ndarray
    beta0: np.ndarray

    @classmethod
    def uniform(
        cls, n: int, b1: float = 3.0, b0: float = 1.0, beta1: float = 1.0, beta0: float = 1.0
    ) -> "PriorHyperParams":
        return cls(
            b1=b1, b0=b0, beta1=np.full(n, float(beta1)), beta0=np.full(n, float(beta0))
        )

    def __post_init__(self):
        object.__setattr__(self, "beta1", np.asarray(self.beta1, dtype=float))
        object.__setattr__(self, "beta0", np.asarray(self.beta0, dtype=float))
        if self.b1 <= 0 or self.b0 <= 0:
            raise ValueError("reliability prior parameters must be positive")
        if np.any(self.beta1 <= 0) or np.any(self.beta0 <= 0):
            raise ValueError("importance prior parameters must be positive")
        if self.beta1.shape != self.beta0.shape:
            raise ValueError("beta1 and beta0 must have the same length")

    @property
    def n(self) -> int:
        return self.beta1.size

    @property
    def r_mean(self) -> float:
        return self.b1 / (self.b1 + self.b0)


@dataclass
class PosteriorState:
    """Variational parameters after (some) coordinate ascent."""

    bhat1: float
    bhat0: float
    betahat1: np.ndarray
    betahat0: np.ndarray
    tau: np.ndarray

    def cbar(self) -> np.ndarray:
        return expected_importance(self)

    def to_dict(self) -> dict:
        """JSON-ready dict (field names are part of the diagnostics format)."""
        return {
            "bhat1": float(self.bhat1),
            "bhat0": float(self.bhat0),
            "betahat1": self.betahat1.tolist(),
            "betahat0": self.betahat0.tolist(),
            "tau": self.tau.tolist(),
            "cbar": self.cbar().tolist(),
        }


def expected_importance(posterior: PosteriorState) -> np.ndarray:
    """Posterior mean importance cbar_n = betahat1_n / (betahat1_n + betahat0_n)."""
    return posterior.betahat1 / (posterior.betahat1 + posterior.betahat0)


class ObservationWindow:
    """Ring buffer of the last W report vectors plus sufficient statistics.

    ones_count[n] is the number of 1-reports on coefficient n currently in
    the window; obs_count is the number of buffered vectors (every report
    covers all coefficients, so the per-coefficient observation count is the
    same scalar).
    """

    def __init__(self, n: int, capacity: int):
        if n < 1 or capacity < 1:
            raise ValueError("window needs n >= 1 and capacity >= 1")
        self.n = n
        self.capacity = capacity
        self._buffer: deque[np.ndarray] = deque()
        self.ones_count = np.zeros(n, dtype=np.int64)

    def __len__(self) -> int:
        return len(self._buffer)

    @property
    def obs_count(self) -> int:
        return len(self._buffer)

    def push(self, alpha) -> "ObservationWindow":
        """Append a report, evicting the oldest when the buffer is full."""
        alpha = np.asarray(alpha)
        if alpha.shape != (self.n,):
            raise ValueError(f"report must have shape ({self.n},), got {alpha.shape}")
        bits = alpha.astype(np.int64)
        if len(self._buffer) == self.capacity:
            self.ones_count -= self._buffer.popleft()
        self._buffer.append(bits)
        self.ones_count += bits
        return self

    def clear(self) -> None:
        self._buffer.clear()
        self.ones_count[:] = 0

    def contents(self) -> list[np.ndarray]:
        return [b.copy() for b in self._buffer]


def push_observation(window: ObservationWindow, alpha) -> ObservationWindow:
    return window.push(alpha)


def update_c(a_count, w_count, tau, priors: PriorHyperParams):
    """Coordinate update for the importance factors q(c_n)."""
    a_count = np.asarray(a_count, dtype=float)
    miss = w_count - a_count
    betahat1 = priors.beta1 + tau * a_count + (1.0 - tau) * miss
    betahat0 = priors.beta0 + tau * miss + (1.0 - tau) * a_count
    return betahat1, betahat0


def update_u(a_count, w_count, betahat1, betahat0, bhat1, bhat0):
    """Coordinate update for the reliability indicators q(u_n) = Bernoulli(tau_n).

    tau_n = sigmoid(rho1 - rho0), evaluated through exp of the negative
    magnitude only, so extreme log-odds saturate to exactly 0 or 1 instead
    of overflowing.
    """
    a_count = np.asarray(a_count, dtype=float)
    miss = w_count - a_count
    b1c = np.maximum(betahat1, PARAM_FLOOR)
    b0c = np.maximum(betahat0, PARAM_FLOOR)
    psi_sum = digamma(b1c + b0c)
    e_ln_c = digamma(b1c) - psi_sum
    e_ln_1c = digamma(b0c) - psi_sum
    psi_rsum = digamma(max(bhat1, PARAM_FLOOR) + max(bhat0, PARAM_FLOOR))
    e_ln_r = digamma(max(bhat1, PARAM_FLOOR)) - psi_rsum
    e_ln_1r = digamma(max(bhat0, PARAM_FLOOR)) - psi_rsum

    rho1 = e_ln_r + a_count * e_ln_c + miss * e_ln_1c
    rho0 = e_ln_1r + a_count * e_ln_1c + miss * e_ln_c
    d = rho1 - rho0
    out = np.empty_like(np.asarray(d, dtype=float))
    d = np.asarray(d, dtype=float)
    pos = d >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ed = np.exp(d[~pos])
    out[~pos] = ed / (1.0 + ed)
    return out


def update_r(tau, b1: float, b0: float):
    """Coordinate update for the overall reliability factor q(r)."""
    tau = np.asarray(tau, dtype=float)
    return b1 + float(tau.sum()), b0 + float((1.0 - tau).sum())


def _xlogx(t: np.ndarray) -> np.ndarray:
    return np.where(t > 0.0, t * np.log(np.maximum(t, 1e-300)), 0.0)


def elbo(window: ObservationWindow, posterior: PosteriorState, priors: PriorHyperParams) -> float:
    """Evidence lower bound E_q[ln p(reports, c, u, r)] - E_q[ln q]."""
    a = window.ones_count.astype(float)
    w = float(window.obs_count)
    miss = w - a

    b1h = max(posterior.bhat1, PARAM_FLOOR)
    b0h = max(posterior.bhat0, PARAM_FLOOR)
    beta1h = np.maximum(posterior.betahat1, PARAM_FLOOR)
    beta0h = np.maximum(posterior.betahat0, PARAM_FLOOR)
    tau = posterior.tau

    psi_sum = digamma(beta1h + beta0h)
    e_ln_c = digamma(beta1h) - psi_sum
    e_ln_1c = digamma(beta0h) - psi_sum
    psi_rsum = digamma(b1h + b0h)
    e_ln_r = digamma(b1h) - psi_rsum
    e_ln_1r = digamma(b0h) - psi_rsum

    # E[ln p(reports | c, u)]
    ll = tau * (a * e_ln_c + miss * e_ln_1c) + (1.0 - tau) * (a * e_ln_1c + miss * e_ln_c)
    total = float(ll.sum())
    # E[ln p(u | r)]
    total += float((tau * e_ln_r + (1.0 - tau) * e_ln_1r).sum())
    # E[ln p(c)] - E[ln q(c)]
    total += float(
        (
            (priors.beta1 - 1.0) * e_ln_c
            + (priors.beta0 - 1.0) * e_ln_1c
            - log_beta(priors.beta1, priors.beta0)
        ).sum()
    )
    total -= float(
        ((beta1h - 1.0) * e_ln_c + (beta0h - 1.0) * e_ln_1c - log_beta(beta1h, beta0h)).sum()
    )
    # E[ln p(r)] - E[ln q(r)]
    total += (priors.b1 - 1.0) * e_ln_r + (priors.b0 - 1.0) * e_ln_1r - float(
        log_beta(priors.b1, priors.b0)
    )
    total -= (b1h - 1.0) * e_ln_r + (b0h - 1.0) * e_ln_1r - float(log_beta(b1h, b0h))
    # - E[ln q(u)]  (Bernoulli entropy)
    total -= float((_xlogx(tau) + _xlogx(1.0 - tau)).sum())
    return total


def _initial_posterior(priors: PriorHyperParams) -> PosteriorState:
    return PosteriorState(
        bhat1=priors.b1,
        bhat0=priors.b0,
        betahat1=priors.beta1.copy(),
        betahat0=priors.beta0.copy(),
        tau=np.full(priors.n, priors.r_mean),
    )


@dataclass
class InferenceResult:
    posterior: PosteriorState
    sweeps: int
    converged: bool
    elbo_trace: list[float] = field(default_factory=list)


def infer(
    window: ObservationWindow,
    priors: PriorHyperParams,
    max_iter: int = 40,
    tol: float = 1e-6,
    record_elbo: bool = False,
) -> InferenceResult:
    """Coordinate ascent until the importance means stabilize.

    Starts from the priors with tau at the reliability prior mean, sweeps
    c -> u -> r, and stops after max_iter sweeps or when the relative change
    sum((cbar_k - cbar_{k-1})^2) / sum(cbar_{k-1}^2) drops to tol. An empty
    window returns the prior-initialized state untouched.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if window.n != priors.n:
        raise ValueError("window and priors disagree on the number of coefficients")

    state = _initial_posterior(priors)
    if window.obs_count == 0:
        return InferenceResult(posterior=state, sweeps=0, converged=True)

    a = window.ones_count
    w = window.obs_count
    trace: list[float] = []
    if record_elbo:
        trace.append(elbo(window, state, priors))
    cbar_prev = expected_importance(state)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        state.betahat1, state.betahat0 = update_c(a, w, state.tau, priors)
        state.tau = update_u(a, w, state.betahat1, state.betahat0, state.bhat1, state.bhat0)
        state.bhat1, state.bhat0 = update_r(state.tau, priors.b1, priors.b0)
        if record_elbo:
            trace.append(elbo(window, state, priors))
        cbar = expected_importance(state)
        denom = float((cbar_prev**2).sum())
        change = float(((cbar - cbar_prev) ** 2).sum())
        cbar_prev = cbar
        if denom > 0.0 and change / denom <= tol:
            converged = True
            break
    return InferenceResult(posterior=state, sweeps=sweeps, converged=converged, elbo_trace=trace)
