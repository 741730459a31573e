"""Geodesic-localized quasimodes on hyperbolic surfaces, at desk scale."""

from .errors import (BallBudgetExceeded, ConfigError, GridTooCoarse, InvalidGap, OverflowGuardFailure,
                     ParseError, ScarlabError, ToleranceNotMet, ValidationError)
from .hyperbolic import GroupElement, KanPoint, NakPoint, kan_decompose, nak_decompose, phase
from .spectral import SmoothCutoff, SpectralWindow, TransformTriple, model_pair, windowed_pair
from .kernel import FejerKernel, kappa_asymptotic, kappa_full, kappa_spectral
from .groups import CollarSpec, GroupModel, cylinder, enumerate_ball, octagon_group, project_kappa
from .experiments import dilute, measure_collar_mass, measure_defect, measure_total_mass
from .config import RunConfig, parse_config
from .report import emit_report

__version__ = "0.1.0"

__all__ = [
    "BallBudgetExceeded",
    "ConfigError",
    "GridTooCoarse",
    "InvalidGap",
    "OverflowGuardFailure",
    "ParseError",
    "ScarlabError",
    "ToleranceNotMet",
    "ValidationError",
    "GroupElement",
    "KanPoint",
    "NakPoint",
    "kan_decompose",
    "nak_decompose",
    "phase",
    "SmoothCutoff",
    "SpectralWindow",
    "TransformTriple",
    "model_pair",
    "windowed_pair",
    "FejerKernel",
    "kappa_asymptotic",
    "kappa_full",
    "kappa_spectral",
    "CollarSpec",
    "GroupModel",
    "cylinder",
    "enumerate_ball",
    "octagon_group",
    "project_kappa",
    "dilute",
    "measure_collar_mass",
    "measure_defect",
    "measure_total_mass",
    "RunConfig",
    "parse_config",
    "emit_report",
]
