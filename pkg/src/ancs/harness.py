"""Closed-loop Monte Carlo experiment driver.

One trial walks the feedback loop for T steps: infer per-coefficient
importance from the ROI reports seen so far, allocate sensing energy,
measure through a fresh matrix, recover, report the ROI, repeat.  Scenarios
aggregate trials (linear-domain means with standard errors); sweeps vary a
single config field across values and method pairs and produce the result
rows that the tables module serializes.

Determinism contract: trial i of a scenario draws every random quantity
from a generator seeded with (seed, i), and the draw order inside a trial
is fixed (signal evolution, then matrix, then noise, then report faults).
Scenarios that differ only in sampler/estimator therefore see identical
signals, matrices, and noise — method comparisons are paired — and adding
trials never perturbs earlier ones.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import inference, metrics, recovery, sensing, signal_gen
from .metrics import TrialRecord
from .tables import SweepRow

__all__ = [
    "SAMPLERS",
    "ESTIMATORS",
    "METHOD_PAIRS",
    "L1_PAIRS",
    "ScenarioConfig",
    "ScenarioSummary",
    "SweepSpec",
    "run_trial",
    "run_scenario",
    "run_sweep",
    "inspect_trial",
    "PRESET_NAMES",
    "make_preset",
]

SAMPLERS = ("uniform", "ancs")
ESTIMATORS = ("l1", "sa_mmse")
METHOD_PAIRS = (
    ("uniform", "l1"),
    ("ancs", "l1"),
    ("uniform", "sa_mmse"),
    ("ancs", "sa_mmse"),
)
L1_PAIRS = (("uniform", "l1"), ("ancs", "l1"))


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob of one closed-loop experiment; defaults reproduce the
    reference setup (N=200, M=60, T=30, SNR 20 dB, lam=0.1, p01=0.02)."""

    n: int = 200
    m: int = 60
    t_steps: int = 30
    snr_db: float = 20.0
    lam: float = 0.1
    p01: float = 0.02
    fault_rate: float = 0.0
    rho: float = 0.2
    sigma_l: float = 10.0
    threshold: float = 1.0
    basis: str = signal_gen.CANONICAL
    window: int = 5
    b1: float = 3.0
    b0: float = 1.0
    beta1: float = 1.0
    beta0: float = 1.0
    sampler: str = "uniform"
    estimator: str = "l1"
    trials: int = 50
    seed: int = 0
    max_iter: int = 40
    vi_tol: float = 1e-6
    # When the stationary-rate/activation-rate pair is infeasible (p01 too
    # large for lam), saturate the pair at the feasibility boundary
    # (p10 = 1, p01 = lam / (1 - lam)) instead of rejecting the scenario, so
    # p01 sweeps never change the sparsity level.
    clamp_p10: bool = True
    # Diagnostic: run the adaptive plumbing but pin the importance means at
    # 0.5, which must reproduce the uniform baseline exactly.
    force_uniform_importance: bool = False

    def __post_init__(self):
        for name in ("n", "m", "t_steps", "window", "trials", "max_iter"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for name in ("lam", "p01", "fault_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must be in (0, 1], got {self.rho!r}")
        if self.sigma_l <= 0:
            raise ValueError("sigma_l must be positive")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.vi_tol <= 0:
            raise ValueError("vi_tol must be positive")
        if min(self.b1, self.b0, self.beta1, self.beta0) <= 0:
            raise ValueError("prior hyperparameters must be positive")
        if self.basis not in signal_gen.BASES:
            raise ValueError(f"basis must be one of {signal_gen.BASES}, got {self.basis!r}")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(
                f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}"
            )
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")

    def priors(self) -> inference.PriorHyperParams:
        return inference.PriorHyperParams.uniform(
            self.n, b1=self.b1, b0=self.b0, beta1=self.beta1, beta0=self.beta0
        )

    def chain(self) -> signal_gen.SupportChainParams:
        return signal_gen.SupportChainParams.from_rate(
            self.lam, self.p01, clamp=self.clamp_p10
        )

    def amplitude(self) -> signal_gen.AmplitudeParams:
        return signal_gen.AmplitudeParams(rho=self.rho, sigma_L=self.sigma_l)

    def noise_sigma(self) -> float:
        chain = self.chain()
        amp = self.amplitude()
        return sensing.calibrate_noise(
            self.n, self.m, self.snr_db, chain.lam, amp.sigma_a_stat**2
        )


def run_trial(
    cfg: ScenarioConfig, trial_index: int, record_trajectory: bool = False
) -> TrialRecord:
    """Execute one closed-loop trial and score it against the true ROI.

    The per-step order is: importance means from the current posterior
    (0.5 everywhere at t=1, before any report), energy allocation, fresh
    measurement matrix, noisy measurement, recovery, ROI report, window
    push.  Inference runs lazily at the top of the next step, which is
    equivalent to running it right after the push.  Solver non-convergence
    is counted, never raised, so Monte Carlo statistics stay honest.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be >= 0")
    chain = cfg.chain()
    amp = cfg.amplitude()
    priors = cfg.priors()
    sigma_n = cfg.noise_sigma()
    dct = signal_gen.dct_matrix(cfg.n) if cfg.basis == signal_gen.DCT else None

    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, trial_index)))
    window = inference.ObservationWindow(cfg.n, cfg.window)
    adaptive = cfg.sampler == "ancs"
    kalman = (
        recovery.SaMmseFilter(cfg.rho, cfg.sigma_l, sigma_n)
        if cfg.estimator == "sa_mmse"
        else None
    )

    xs = np.empty((cfg.t_steps, cfg.n))
    xhats = np.empty((cfg.t_steps, cfg.n))
    rois = np.empty((cfg.t_steps, cfg.n), dtype=bool)
    supports = np.empty((cfg.t_steps, cfg.n), dtype=bool)
    reports = np.empty((cfg.t_steps, cfg.n), dtype=bool)
    cbars = np.empty((cfg.t_steps, cfg.n)) if record_trajectory else None
    posterior_traj: list[dict | None] = []
    gain_vars = np.empty(cfg.t_steps)
    solver_failures = 0

    state = signal_gen.init_state(chain, amp, cfg.n, cfg.basis, rng, dct)
    for step in range(cfg.t_steps):
        if step > 0:
            state = signal_gen.advance_state(state, chain, amp, cfg.basis, rng, dct)

        posterior = None
        if adaptive:
            result = inference.infer(
                window, priors, max_iter=cfg.max_iter, tol=cfg.vi_tol
            )
            posterior = result.posterior
            if cfg.force_uniform_importance:
                cbar = np.full(cfg.n, 0.5)
            else:
                cbar = posterior.cbar()
            gains = sensing.column_gains(cbar)
        else:
            cbar = np.full(cfg.n, 0.5)
            gains = np.ones(cfg.n)
        if record_trajectory:
            cbars[step] = cbar
            posterior_traj.append(posterior.to_dict() if posterior is not None else None)
        gain_vars[step] = float(np.var(gains))

        phi = sensing.build_matrix(gains, cfg.m, rng)
        y = sensing.measure(phi, state.x, sigma_n, rng)

        if cfg.estimator == "l1":
            rec = recovery.recover(y, phi, sigma_n, basis=cfg.basis, dct=dct)
            xhat = rec.xhat
            if not rec.solver.converged:
                solver_failures += 1
        else:
            obs = phi if cfg.basis == signal_gen.CANONICAL else phi @ dct.T
            coeffs = kalman.step(y, obs, state.support)
            xhat = coeffs if cfg.basis == signal_gen.CANONICAL else dct.T @ coeffs

        if cfg.basis == signal_gen.CANONICAL:
            detected = recovery.detect_roi(xhat, cfg.threshold)
            report = signal_gen.true_roi_report(
                state, detected, cfg.fault_rate, cfg.basis, rng
            )
        else:
            report = signal_gen.true_roi_report(
                state, None, cfg.fault_rate, cfg.basis, rng
            )
        window.push(report)

        xs[step] = state.x
        xhats[step] = xhat
        rois[step] = state.roi
        supports[step] = state.support
        reports[step] = report

    record = TrialRecord(
        tnmse_lin=metrics.tnmse(xs, xhats),
        roi_tnmse_lin=metrics.region_tnmse(xs, xhats, rois, inside=True),
        nonroi_tnmse_lin=metrics.region_tnmse(xs, xhats, rois, inside=False),
        gain_var=float(np.mean(gain_vars)),
        extras={"solver_failures": solver_failures},
    )
    if record_trajectory:
        record.extras.update(
            cbar_traj=cbars,
            posterior_traj=posterior_traj,
            support_traj=supports,
            roi_traj=rois,
            report_traj=reports,
        )
    return record


def _nan_aware_mean(values: np.ndarray) -> float:
    finite = values[~np.isnan(values)]
    if finite.size == 0:
        return float("nan")
    return float(np.mean(finite))


@dataclass
class ScenarioSummary:
    """Linear-domain aggregates over the trials of one scenario."""

    config: ScenarioConfig
    trials: int
    tnmse_lin: float
    tnmse_db: float
    roi_tnmse_lin: float
    roi_tnmse_db: float
    nonroi_tnmse_lin: float
    nonroi_tnmse_db: float
    stderr_lin: float
    gain_var: float
    solver_failures: int
    records: list[TrialRecord] = field(repr=False, default_factory=list)


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> ScenarioSummary:
    """Run cfg.trials independent trials and aggregate them.

    Aggregation happens in the linear domain (mean of per-trial TNMSE with
    its standard error); dB values are derived from the aggregated means.
    Results are independent of the thread count because trial i depends
    only on (cfg, seed, i) and reduction order is fixed by trial index.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    indices = range(cfg.trials)
    if threads == 1:
        records = [run_trial(cfg, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda i: run_trial(cfg, i), indices))

    tn = np.array([r.tnmse_lin for r in records])
    roi = np.array([r.roi_tnmse_lin for r in records])
    nonroi = np.array([r.nonroi_tnmse_lin for r in records])
    tn_mean = float(np.mean(tn))
    roi_mean = _nan_aware_mean(roi)
    nonroi_mean = _nan_aware_mean(nonroi)
    if cfg.trials > 1:
        stderr = float(np.std(tn, ddof=1) / np.sqrt(cfg.trials))
    else:
        stderr = float("nan")
    return ScenarioSummary(
        config=cfg,
        trials=cfg.trials,
        tnmse_lin=tn_mean,
        tnmse_db=metrics.to_db(tn_mean),
        roi_tnmse_lin=roi_mean,
        roi_tnmse_db=metrics.to_db(roi_mean),
        nonroi_tnmse_lin=nonroi_mean,
        nonroi_tnmse_db=metrics.to_db(nonroi_mean),
        stderr_lin=stderr,
        gain_var=float(np.mean([r.gain_var for r in records])),
        solver_failures=int(sum(r.extras.get("solver_failures", 0) for r in records)),
        records=records,
    )


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep: base scenario, field to vary, values, and the
    (sampler, estimator) pairs to run at each value."""

    base: ScenarioConfig
    param: str
    values: tuple
    pairs: tuple = METHOD_PAIRS
    name: str = "custom"

    def __post_init__(self):
        field_names = {f.name for f in fields(ScenarioConfig)}
        if self.param not in field_names:
            raise ValueError(f"swept parameter {self.param!r} is not a config field")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        for value in self.values:
            if not isinstance(value, (int, float, np.integer, np.floating)):
                raise ValueError(f"swept values must be numeric, got {value!r}")
        for pair in self.pairs:
            sampler, estimator = pair
            if sampler not in SAMPLERS or estimator not in ESTIMATORS:
                raise ValueError(f"unknown method pair {pair!r}")


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRow]:
    """Run every (value, method pair) cell of the sweep, in declared order."""
    rows = []
    for value in spec.values:
        for sampler, estimator in spec.pairs:
            cfg = replace(
                spec.base,
                **{spec.param: value},
                sampler=sampler,
                estimator=estimator,
            )
            summary = run_scenario(cfg, threads=threads)
            rows.append(
                SweepRow(
                    scenario_id=spec.name,
                    swept_param=spec.param,
                    swept_value=float(value),
                    sampler=sampler,
                    estimator=estimator,
                    trials=summary.trials,
                    tnmse_lin=summary.tnmse_lin,
                    tnmse_db=summary.tnmse_db,
                    roi_tnmse_db=summary.roi_tnmse_db,
                    nonroi_tnmse_db=summary.nonroi_tnmse_db,
                    stderr_lin=summary.stderr_lin,
                )
            )
    return rows


def inspect_trial(cfg: ScenarioConfig, trial_index: int = 0) -> dict:
    """Posterior trajectory of a single trial, as JSON-ready data.

    Per step: the importance means the sampler used, the full posterior
    (None for the uniform sampler, which runs no inference), the true
    support/ROI, and the ROI report pushed into the window.
    """
    record = run_trial(cfg, trial_index, record_trajectory=True)
    extras = record.extras
    steps = []
    for step in range(cfg.t_steps):
        steps.append(
            {
                "t": step + 1,
                "cbar": extras["cbar_traj"][step].tolist(),
                "posterior": extras["posterior_traj"][step],
                "support": extras["support_traj"][step].astype(int).tolist(),
                "roi": extras["roi_traj"][step].astype(int).tolist(),
                "report": extras["report_traj"][step].astype(int).tolist(),
            }
        )
    return {
        "config": asdict(cfg),
        "trial": trial_index,
        "tnmse_lin": record.tnmse_lin,
        "roi_tnmse_lin": record.roi_tnmse_lin,
        "nonroi_tnmse_lin": record.nonroi_tnmse_lin,
        "steps": steps,
    }


# --- figure presets -------------------------------------------------------

PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7")

_M_GRID = tuple(range(40, 101, 10))


def make_preset(name: str, trials: int | None = None, seed: int | None = None) -> SweepSpec:
    """Sweep specs behind the named figure presets.

    fig3: TNMSE vs support-change rate p01, all four method pairs.
    fig4: TNMSE vs measurement count M, all four method pairs.
    fig5: TNMSE vs SNR, all four method pairs.
    fig6: DCT basis with 10% report faults, TNMSE vs M, l1 pairs.
    fig7: DCT basis, TNMSE vs fault rate at M=60, l1 pairs.
    """
    base = ScenarioConfig()
    if trials is not None:
        base = replace(base, trials=trials)
    if seed is not None:
        base = replace(base, seed=seed)
    if name == "fig3":
        return SweepSpec(
            base=base,
            param="p01",
            values=(0.0, 0.05, 0.1, 0.2, 0.3),
            pairs=METHOD_PAIRS,
            name=name,
        )
    if name == "fig4":
        return SweepSpec(base=base, param="m", values=_M_GRID, pairs=METHOD_PAIRS, name=name)
    if name == "fig5":
        return SweepSpec(
            base=base,
            param="snr_db",
            values=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0),
            pairs=METHOD_PAIRS,
            name=name,
        )
    dct_base = replace(base, basis=signal_gen.DCT)
    if name == "fig6":
        return SweepSpec(
            base=replace(dct_base, fault_rate=0.1),
            param="m",
            values=_M_GRID,
            pairs=L1_PAIRS,
            name=name,
        )
    if name == "fig7":
        return SweepSpec(
            base=dct_base,
            param="fault_rate",
            values=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
            pairs=L1_PAIRS,
            name=name,
        )
    raise ValueError(f"unknown preset {name!r} (expected one of {PRESET_NAMES})")
