"""Set-membership inference attacks on private states and the filters that blunt them."""

from .config import ConfigError, ExperimentConfig, load_config
from .filters import (
    FilterState,
    QuantizerGrid,
    ReleaseRecord,
    build_p2,
    filter_step,
    filter_step_k0,
    make_seed_set,
    quantizer_release,
    reachable_cover,
    truncated_gaussian_release,
)
from .inference import (
    AdversaryBelief,
    CcgBelief,
    HorizonCapExceeded,
    InconsistentObservation,
    InvariantViolation,
    StepReport,
    attack_step,
    attack_step_ccg,
    init_belief,
    init_belief_ccg,
    measures,
    predict,
    uncertainty_reduction,
)
from .intervals import DimensionError, Interval, PsiMatrix, intersect, minkowski_sum, psi_apply
from .lp import LpProblem, LpSolution, LpStatus, solve
from .system import LinearSystem, Trajectory, case_study_preset, make_rng, simulate

__all__ = [
    "AdversaryBelief",
    "attack_step",
    "attack_step_ccg",
    "build_p2",
    "case_study_preset",
    "CcgBelief",
    "ConfigError",
    "DimensionError",
    "ExperimentConfig",
    "filter_step",
    "filter_step_k0",
    "FilterState",
    "HorizonCapExceeded",
    "InconsistentObservation",
    "init_belief",
    "init_belief_ccg",
    "intersect",
    "Interval",
    "InvariantViolation",
    "LinearSystem",
    "load_config",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "make_rng",
    "make_seed_set",
    "measures",
    "minkowski_sum",
    "predict",
    "psi_apply",
    "PsiMatrix",
    "quantizer_release",
    "QuantizerGrid",
    "reachable_cover",
    "ReleaseRecord",
    "simulate",
    "solve",
    "StepReport",
    "Trajectory",
    "truncated_gaussian_release",
    "uncertainty_reduction",
]

__version__ = "0.1.0"
