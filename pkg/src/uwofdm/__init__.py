"""UW-OFDM link simulator with a PAPR-reducing precoder and PTS/SLM search."""

from .config import (
    ChannelParams,
    HpaParams,
    SystemConfig,
    default_80211_config,
    load_config,
    validate,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionError,
    GuardViolationError,
    RankError,
    SearchSpaceError,
    SingularError,
    UwofdmError,
    ZeroTailError,
)
from .harness import ExperimentSpec, run_design_report, run_experiment
from .linops import StructuralMatrices, build_structural
from .metrics import CurveResult
from .precoder import GeneratorMatrix, ProcrustesSolution, design_prp_generator, solve_procrustes

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "ConfigError",
    "CurveResult",
    "DegenerateInputError",
    "DimensionError",
    "ExperimentSpec",
    "GeneratorMatrix",
    "GuardViolationError",
    "HpaParams",
    "ProcrustesSolution",
    "RankError",
    "SearchSpaceError",
    "SingularError",
    "StructuralMatrices",
    "SystemConfig",
    "UwofdmError",
    "ZeroTailError",
    "build_structural",
    "default_80211_config",
    "design_prp_generator",
    "load_config",
    "run_design_report",
    "run_experiment",
    "solve_procrustes",
    "validate",
    "__version__",
]
