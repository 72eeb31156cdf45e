"""Stochastic linear regression benchmark for comparing the averagers.

The problem: minimize E[(x'w - y)^2] with x ~ N(0, H) for a diagonal H with
H_ii = 1/i, y = x'w* + noise, constant-stepsize mini-batch SGD, and every
averager in the roster fed the identical iterate sequence.  Curves report the
excess error l(w) - l(w*) = sum_i H_ii (w_i - w*_i)^2 per step, averaged over
independent runs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .averagers import (
    AnytimeWindowAverage,
    ConstantWindow,
    ExponentialAverage,
    GrowingExponentialAverage,
    ProportionalWindow,
    _CEIL_EPS,
)
from .reference import RawTailAverage, TrueTailAverage

__all__ = [
    "CONSTANT_ROSTER",
    "DEFAULT_STEPSIZE",
    "PROPORTIONAL_ROSTER",
    "ExperimentConfig",
    "ExperimentResult",
    "RegressionProblem",
    "default_problem",
    "excess_error",
    "make_averager",
    "run_experiment",
    "sample_batch",
    "sgd_step",
]

CONSTANT_ROSTER = ("expk", "awak", "truek")
PROPORTIONAL_ROSTER = ("raw", "exp", "awa", "awa3", "true")


@dataclass
class RegressionProblem:
    """Diagonal-covariance linear regression with Gaussian label noise."""

    dim: int = 50
    h_diag: np.ndarray | None = None
    w_star: np.ndarray | None = None
    w_start: np.ndarray | None = None
    noise_std: float = 0.1
    batch_size: int = 11

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.h_diag is None:
            self.h_diag = 1.0 / np.arange(1, self.dim + 1)
        else:
            self.h_diag = np.asarray(self.h_diag, dtype=float)
        if self.w_star is None:
            self.w_star = np.ones(self.dim)
        else:
            self.w_star = np.asarray(self.w_star, dtype=float)
        if self.w_start is None:
            self.w_start = np.zeros(self.dim)
        else:
            self.w_start = np.asarray(self.w_start, dtype=float)
        if self.h_diag.shape != (self.dim,) or self.w_star.shape != (self.dim,):
            raise ValueError("h_diag and w_star must match dim")
        if np.any(self.h_diag <= 0.0) or np.any(np.diff(self.h_diag) > 0.0):
            raise ValueError("h_diag must be strictly positive and non-increasing")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self._x_scale = np.sqrt(self.h_diag)


def default_problem(**overrides) -> RegressionProblem:
    """The benchmark defaults: d=50, H_ii=1/i, noise variance 0.01, batches of 11."""
    return RegressionProblem(**overrides)


def sample_batch(rng: np.random.Generator, problem: RegressionProblem):
    """Draw one mini-batch (X, y) with X rows ~ N(0, H) and y = Xw* + noise."""
    x = rng.standard_normal((problem.batch_size, problem.dim)) * problem._x_scale
    y = x @ problem.w_star + rng.standard_normal(problem.batch_size) * problem.noise_std
    return x, y


def sgd_step(w: np.ndarray, x: np.ndarray, y: np.ndarray, stepsize: float) -> np.ndarray:
    """One constant-stepsize step on the mini-batch squared loss mean((Xw - y)^2)."""
    residual = x @ w - y
    grad = (2.0 / y.shape[0]) * (x.T @ residual)
    return w - stepsize * grad


def excess_error(w: np.ndarray, problem: RegressionProblem) -> float:
    """l(w) - l(w*) in closed form for the diagonal model."""
    delta = np.asarray(w, dtype=float) - problem.w_star
    return float(np.dot(problem.h_diag, delta * delta))


def make_averager(averager_id: str, *, k: int | None = None, c: float | None = None,
                  horizon: int | None = None, num_recent: int | None = None):
    """Build a roster averager by id.

    Constant-window ids (``expk``, ``awak``, ``truek``) need ``k``;
    proportional ids (``exp``, ``awa``, ``awa3``, ``true``, ``raw``) need
    ``c`` (and ``horizon`` for ``true``/``raw``).  ``awa3`` keeps three
    accumulators in total; ``num_recent`` overrides the accumulator count of
    any ``awa*`` id.
    """
    def need_k() -> int:
        if k is None:
            raise ValueError(f"averager {averager_id!r} needs a constant window size k")
        return k

    def need_c() -> float:
        if c is None:
            raise ValueError(f"averager {averager_id!r} needs a window fraction c")
        return c

    def awa(schedule, default_recent: int):
        return AnytimeWindowAverage(schedule, num_recent if num_recent is not None else default_recent)

    if averager_id == "expk":
        return ExponentialAverage(need_k())
    if averager_id == "exp":
        return GrowingExponentialAverage(need_c())
    if averager_id == "awak":
        return awa(ConstantWindow(need_k()), 1)
    if averager_id == "awa":
        if k is not None and c is None:
            return awa(ConstantWindow(k), 1)
        return awa(ProportionalWindow(need_c()), 1)
    if averager_id == "awa3":
        if k is not None and c is None:
            return awa(ConstantWindow(k), 2)
        return awa(ProportionalWindow(need_c()), 2)
    if averager_id == "truek":
        return TrueTailAverage(ConstantWindow(need_k()))
    if averager_id == "true":
        cc = need_c()
        if horizon is None:
            raise ValueError("averager 'true' needs the stream horizon to size its buffer")
        capacity = max(1, int(math.ceil(cc * horizon - _CEIL_EPS)))
        return TrueTailAverage(ProportionalWindow(cc), capacity)
    if averager_id == "raw":
        if horizon is None:
            raise ValueError("averager 'raw' needs the stream horizon")
        return RawTailAverage(horizon, need_c())
    raise ValueError(f"unknown averager id {averager_id!r}")


#: Default SGD stepsize.  Calibrated so that by the final step the iterates sit
#: in the noise ball (averaging beats the raw iterate) while enough of the
#: transient remains inside the growing windows to separate the estimators.
DEFAULT_STEPSIZE = 0.12


@dataclass
class ExperimentConfig:
    problem: RegressionProblem = field(default_factory=default_problem)
    horizon: int = 1000
    num_runs: int = 100
    stepsize: float = DEFAULT_STEPSIZE
    averagers: tuple[str, ...] = PROPORTIONAL_ROSTER
    k: int | None = None
    c: float | None = None
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.horizon < 1 or self.num_runs < 1:
            raise ValueError("horizon and num_runs must be >= 1")
        if self.stepsize <= 0.0:
            raise ValueError("stepsize must be positive")
        if (self.k is None) == (self.c is None):
            raise ValueError("exactly one of k and c must be set")
        self.averagers = tuple(self.averagers)


@dataclass
class ExperimentResult:
    """Per-averager excess-error curves, per run and averaged across runs."""

    averager_ids: tuple[str, ...]
    steps: np.ndarray
    run_curves: dict[str, np.ndarray]      # (num_runs, horizon) per averager
    iterate_runs: np.ndarray               # un-averaged iterate, same shape
    stream_digests: tuple[str, ...]        # one iterate-stream hash per run

    @property
    def mean_curves(self) -> dict[str, np.ndarray]:
        return {aid: curves.mean(axis=0) for aid, curves in self.run_curves.items()}

    @property
    def iterate_mean(self) -> np.ndarray:
        return self.iterate_runs.mean(axis=0)

    def final_mean(self, averager_id: str) -> float:
        return float(self.run_curves[averager_id][:, -1].mean())


def _build_roster(config: ExperimentConfig) -> dict:
    return {
        aid: make_averager(aid, k=config.k, c=config.c, horizon=config.horizon)
        for aid in config.averagers
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the benchmark: one shared iterate stream per run, all averagers paired.

    Deterministic in ``config.base_seed``; run ``r`` draws from
    ``default_rng([base_seed, r])``.
    """
    _build_roster(config)  # reject unknown ids before any run starts
    problem = config.problem
    n_runs, horizon = config.num_runs, config.horizon
    run_curves = {aid: np.empty((n_runs, horizon)) for aid in config.averagers}
    iterate_runs = np.empty((n_runs, horizon))
    digests = []

    for run in range(n_runs):
        rng = np.random.default_rng([config.base_seed, run])
        averagers = _build_roster(config)
        w = problem.w_start.copy()
        digest = hashlib.sha1()
        for step in range(horizon):
            x, y = sample_batch(rng, problem)
            w = sgd_step(w, x, y, config.stepsize)
            digest.update(w.tobytes())
            iterate_excess = excess_error(w, problem)
            iterate_runs[run, step] = iterate_excess
            for aid, averager in averagers.items():
                averager.observe(w)
                estimate = averager.estimate()
                if estimate is None:  # raw baseline before averaging starts
                    run_curves[aid][run, step] = iterate_excess
                else:
                    run_curves[aid][run, step] = excess_error(estimate, problem)
        digests.append(digest.hexdigest())

    return ExperimentResult(
        averager_ids=config.averagers,
        steps=np.arange(1, horizon + 1),
        run_curves=run_curves,
        iterate_runs=iterate_runs,
        stream_digests=tuple(digests),
    )
