"""Anytime tail averaging: constant-memory window means for vector streams.

The estimators keep the estimate available at every step, cost O(1) memory in
the stream length, and match the variance of an exact trailing-window mean of
``k`` samples (fixed ``k``) or ``ceil(c * t)`` samples (a growing window).
A regression benchmark harness and the exact reference oracles used to test
the estimators ship alongside them.
"""

from .averagers import (
    AnytimeWindowAverage,
    ConstantWindow,
    ExponentialAverage,
    GrowingExponentialAverage,
    ProportionalWindow,
    TargetUnattainableError,
    growing_gamma,
    max_recent_weight,
    min_oldest_weight,
    schedule_from_dict,
    target_window,
)
from .experiment import (
    CONSTANT_ROSTER,
    DEFAULT_STEPSIZE,
    PROPORTIONAL_ROSTER,
    ExperimentConfig,
    ExperimentResult,
    RegressionProblem,
    default_problem,
    excess_error,
    make_averager,
    run_experiment,
    sample_batch,
    sgd_step,
)
from .reference import RawTailAverage, TrueTailAverage, WeightTracer

__version__ = "0.1.0"

__all__ = [
    "AnytimeWindowAverage",
    "CONSTANT_ROSTER",
    "DEFAULT_STEPSIZE",
    "ConstantWindow",
    "ExperimentConfig",
    "ExperimentResult",
    "ExponentialAverage",
    "GrowingExponentialAverage",
    "PROPORTIONAL_ROSTER",
    "ProportionalWindow",
    "RawTailAverage",
    "RegressionProblem",
    "TargetUnattainableError",
    "TrueTailAverage",
    "WeightTracer",
    "default_problem",
    "excess_error",
    "growing_gamma",
    "make_averager",
    "max_recent_weight",
    "min_oldest_weight",
    "run_experiment",
    "sample_batch",
    "schedule_from_dict",
    "sgd_step",
    "target_window",
    "__version__",
]
