"""Adaptive non-uniform compressive sampling.

The package closes the loop between a Bayesian reliability model of noisy
region-of-interest reports, a measurement matrix whose per-column energy
follows the inferred importance, and sparse recovery of a slowly varying
signal. Submodules:

- ``signal_gen``  two-state Markov support with Gauss-Markov amplitudes,
  canonical or DCT-sparse composition, and noise calibration
- ``inference``   mean-field variational posterior over report reliability
- ``sensing``     energy-weighted Gaussian measurement matrices
- ``recovery``    basis-pursuit denoising solver, support detection, and a
  support-aware MMSE Kalman benchmark
- ``metrics``     time-averaged normalized MSE, total and per-region
- ``harness``     Monte Carlo scenarios, sweeps, and figure presets
- ``tables``      CSV/JSON result emission with exact round-trip
- ``cli``         the ``ancs`` command-line entry point
"""

from .harness import (
    METHOD_PAIRS,
    PRESET_NAMES,
    ScenarioConfig,
    ScenarioSummary,
    SweepSpec,
    inspect_trial,
    make_preset,
    run_scenario,
    run_sweep,
    run_trial,
)
from .inference import (
    InferenceResult,
    ObservationWindow,
    PosteriorState,
    PriorHyperParams,
    infer,
)
from .metrics import TrialRecord, nmse, region_tnmse, tnmse, to_db
from .recovery import (
    BpdnProblem,
    BpdnResult,
    SaMmseFilter,
    SaMmseInputs,
    bpdn_solve,
    detect_roi,
    recover,
    sa_mmse,
)
from .sensing import MeasurementEnsemble, build_matrix, calibrate_noise, column_gains, measure
from .signal_gen import (
    AmplitudeParams,
    SignalState,
    SupportChainParams,
    advance_state,
    compose_signal,
    dct_matrix,
    init_state,
    true_roi_report,
)
from .tables import CSV_HEADER, SweepRow, emit, emit_csv, emit_json, parse, parse_csv

__all__ = [
    "METHOD_PAIRS",
    "PRESET_NAMES",
    "ScenarioConfig",
    "ScenarioSummary",
    "SweepSpec",
    "inspect_trial",
    "make_preset",
    "run_scenario",
    "run_sweep",
    "run_trial",
    "InferenceResult",
    "ObservationWindow",
    "PosteriorState",
    "PriorHyperParams",
    "infer",
    "TrialRecord",
    "nmse",
    "region_tnmse",
    "tnmse",
    "to_db",
    "BpdnProblem",
    "BpdnResult",
    "SaMmseFilter",
    "SaMmseInputs",
    "bpdn_solve",
    "detect_roi",
    "recover",
    "sa_mmse",
    "MeasurementEnsemble",
    "build_matrix",
    "calibrate_noise",
    "column_gains",
    "measure",
    "AmplitudeParams",
    "SignalState",
    "SupportChainParams",
    "advance_state",
    "compose_signal",
    "dct_matrix",
    "init_state",
    "true_roi_report",
    "CSV_HEADER",
    "SweepRow",
    "emit",
    "emit_csv",
    "emit_json",
    "parse",
    "parse_csv",
]

__version__ = "0.1.0"
