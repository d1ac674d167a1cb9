"""Compressive phase retrieval of exactly k-sparse complex signals.

Randomized sparse measurement ensembles of size O(k), intensity-only
encoding b = |Ax|, and a near-linear-time peeling decoder that recovers
the signal up to a global phase.
"""

from ._kernels import BACKEND
from .cli import TrialRecord, gen_signal, run_trial
from .decoder import (
    DecodeStats,
    RecoveryResult,
    decode,
    equal_up_to_global_phase,
)
from .defaults import TUNED_C
from .ensemble import (
    BipartiteGraph,
    ConfigError,
    EnsembleConfig,
    StageSchedule,
    build_graph,
    build_schedule,
    default_stage_count,
    solve_beta,
)
from .measure import (
    IntensityBundle,
    MeasurementEnsemble,
    SparseSignal,
    build_ensemble,
    encode,
    entry,
)
from .oracle import consistency_check, consistency_residual

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BipartiteGraph",
    "ConfigError",
    "DecodeStats",
    "EnsembleConfig",
    "IntensityBundle",
    "MeasurementEnsemble",
    "RecoveryResult",
    "SparseSignal",
    "StageSchedule",
    "TUNED_C",
    "TrialRecord",
    "build_ensemble",
    "build_graph",
    "build_schedule",
    "consistency_check",
    "consistency_residual",
    "decode",
    "default_stage_count",
    "encode",
    "entry",
    "equal_up_to_global_phase",
    "gen_signal",
    "run_trial",
    "solve_beta",
    "__version__",
]
