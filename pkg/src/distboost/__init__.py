"""Component-wise gradient boosting for GAMLSS with stability selection."""

__version__ = "0.1.0"

from .baselearner import BaseLearnerSpec, Dataset, FittedBaseLearner, LearnerKind, linear_learners
from .dist import DistributionFamily, NegBin, Normal, ZINB, get_family, negative_gradient, nll, offsets
from .engine import (
    BoostConfig,
    BoostingError,
    FitState,
    Method,
    fit,
    fit_cyclical,
    fit_noncyclical,
    predict_params,
    risk,
)
from .simgen import ExperimentSettings, Scenario, generate, make_scenario, run_experiment
from .stabsel import StabSelConfig, StabSelResult, resolve_triple, run_stabsel, tp_fp
from .tune import CVResult, MstopGrid, ResamplingPlan, cv_risk, make_grid

__all__ = [
    "BaseLearnerSpec", "Dataset", "FittedBaseLearner", "LearnerKind", "linear_learners",
    "DistributionFamily", "Normal", "NegBin", "ZINB", "get_family", "nll", "negative_gradient", "offsets",
    "BoostConfig", "BoostingError", "FitState", "Method", "fit", "fit_cyclical", "fit_noncyclical",
    "predict_params", "risk",
    "ExperimentSettings", "Scenario", "generate", "make_scenario", "run_experiment",
    "StabSelConfig", "StabSelResult", "resolve_triple", "run_stabsel", "tp_fp",
    "CVResult", "MstopGrid", "ResamplingPlan", "cv_risk", "make_grid",
]
