"""Coverage analysis for hybrid GEO/LEO satellite downlinks."""

__version__ = "0.1.0"

from .analytic import CoverageBreakdown, QuadratureSpec, coverage_curve, p_cov_total
from .config import RunConfig, default_run_config, parse_config
from .montecarlo import estimate
from .scenario import GEO, LEO, ScenarioConfig, default_scenario

__all__ = [
    "__version__",
    "CoverageBreakdown",
    "QuadratureSpec",
    "coverage_curve",
    "p_cov_total",
    "RunConfig",
    "default_run_config",
    "parse_config",
    "estimate",
    "GEO",
    "LEO",
    "ScenarioConfig",
    "default_scenario",
]
