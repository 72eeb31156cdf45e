"""Constant-memory streaming averagers matched to a trailing-window mean.

Every estimator here answers the question a plain trailing window answers --
"what is the mean of roughly the last ``k_t`` samples?" -- while storing only
a handful of vectors.  The per-sample weights always sum to one, and once an
estimator is warmed up their squared sum equals ``1 / k_t``, so the noise of
the estimate matches the noise of the exact window mean at every step.

Two window laws are supported: a fixed width ``k`` and a width growing as a
fraction ``c`` of the stream seen so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AnytimeWindowAverage",
    "ConstantWindow",
    "ExponentialAverage",
    "GrowingExponentialAverage",
    "ProportionalWindow",
    "TargetUnattainableError",
    "growing_gamma",
    "max_recent_weight",
    "min_oldest_weight",
    "schedule_from_dict",
    "target_window",
]

# Tie-breaker applied before ceiling so that float noise in c*t cannot bump
# an exactly-integer target up by one.  Safe for streams up to ~10^6 steps.
_CEIL_EPS = 1e-9


def _ceil_int(value: float) -> int:
    return int(math.ceil(value - _CEIL_EPS))


class TargetUnattainableError(ValueError):
    """No weighting of the available sample pools reaches the variance target."""


@dataclass(frozen=True)
class ConstantWindow:
    """Fixed trailing window of ``k`` samples."""

    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"window size k must be a positive integer, got {self.k!r}")

    def target(self, t: int) -> int:
        # A window can never cover more samples than the stream has produced.
        return min(self.k, t)


@dataclass(frozen=True)
class ProportionalWindow:
    """Trailing window covering the most recent fraction ``c`` of the stream."""

    c: float

    def __post_init__(self) -> None:
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"window fraction c must lie in (0, 1), got {self.c!r}")

    def target(self, t: int) -> int:
        return min(max(1, _ceil_int(self.c * t)), t)


WindowSchedule = ConstantWindow | ProportionalWindow


def target_window(schedule: WindowSchedule, t: int) -> int:
    """Integer window width the schedule asks for after ``t`` samples."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return schedule.target(t)


def schedule_to_dict(schedule: WindowSchedule) -> dict:
    if isinstance(schedule, ConstantWindow):
        return {"kind": "constant", "k": schedule.k}
    return {"kind": "proportional", "c": schedule.c}


def schedule_from_dict(data: dict) -> WindowSchedule:
    if data["kind"] == "constant":
        return ConstantWindow(int(data["k"]))
    if data["kind"] == "proportional":
        return ProportionalWindow(float(data["c"]))
    raise ValueError(f"unknown schedule kind {data['kind']!r}")


def _as_sample(x, dim: int | None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"samples must be vectors, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: stream is {dim}-dimensional, sample has {v.shape[0]}")
    return v


# ---------------------------------------------------------------------------
# Blend-weight solvers.
#
# All of them pick a weight g for one sample pool against another so that the
# combined estimate has the variance of an equal-weight mean over `target`
# samples:  g^2 / n_a  +  (1 - g)^2 / n_b  ==  1 / target.
# ---------------------------------------------------------------------------


def _pooled_radical(n_old: float, n_recent: float, target: float) -> float:
    # 1/(n_old*target) + 1/(n_recent*target) - 1/(n_old*n_recent), rearranged
    # over a common denominator: the numerator is exact for integer counts,
    # which avoids cancellation when the pools barely cover the target.
    surplus = n_old + n_recent - target
    if surplus < 0.0:
        raise TargetUnattainableError(
            f"pools of {n_old} + {n_recent} samples cannot reach variance 1/{target}"
        )
    return math.sqrt(surplus / (n_old * n_recent * target))


def max_recent_weight(n_recent: int, n_old: int, target: float) -> float:
    """Largest weight the recent pool can carry while hitting the variance target.

    Solves g^2/n_recent + (1-g)^2/n_old = 1/target for the larger root.
    Raises :class:`TargetUnattainableError` when the pools are too small
    (``n_recent + n_old < target``).
    """
    root = _pooled_radical(n_old, n_recent, target)
    g = (n_recent + n_old * n_recent * root) / (n_recent + n_old)
    return min(max(g, 0.0), 1.0)


def min_oldest_weight(n_old: int, n_recent: int, target: float) -> float:
    """Smallest weight the oldest pool needs for the variance target to hold.

    Complementary to :func:`max_recent_weight`: both are roots of the same
    quadratic, and ``min_oldest_weight(a, b, K) + max_recent_weight(b, a, K) == 1``.
    """
    root = _pooled_radical(n_old, n_recent, target)
    g = n_old * (1.0 - n_recent * root) / (n_old + n_recent)
    return min(max(g, 0.0), 1.0)


def _solve_growth_gamma(n_prev: float, target: float) -> float | None:
    """Smaller root of g^2/n_prev + (1-g)^2 = 1/target, or None if complex."""
    a = (n_prev + 1.0) / n_prev
    disc = 1.0 - a * (1.0 - 1.0 / target)
    if disc < 0.0:
        return None
    g = (1.0 - math.sqrt(disc)) / a
    return min(max(g, 0.0), 1.0)


def growing_gamma(t: int, c: float, n_prev: float) -> float:
    """Decay factor for step ``t`` of an average tracking a ``c * t`` window.

    ``n_prev`` is the effective sample size carried in from step ``t - 1``
    (the reciprocal of the squared-weight sum).  The returned factor makes the
    updated squared-weight sum equal ``1 / max(1, c*t)`` whenever that is
    reachable in a single step; otherwise it degrades to a plain running mean,
    which grows the effective sample size as fast as possible.
    """
    if t < 2:
        raise ValueError(f"t must be >= 2, got {t}")
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c!r}")
    if n_prev <= 0.0:
        raise ValueError(f"n_prev must be positive, got {n_prev!r}")
    target = max(1.0, c * t)
    g = _solve_growth_gamma(n_prev, target)
    if g is None:
        g = n_prev / (n_prev + 1.0)
    return g


# ---------------------------------------------------------------------------
# Estimators.
# ---------------------------------------------------------------------------


class ExponentialAverage:
    """Exponentially weighted mean tuned to act like a ``k``-sample window.

    Uses decay ``(k - 1) / (k + 1)``, the setting whose stationary
    squared-weight sum is ``1 / k``.  The first sample initializes the mean,
    so the weights sum to one at every step.
    """

    def __init__(self, k: int):
        if not isinstance(k, int) or k < 1:
            raise ValueError(f"k must be a positive integer, got {k!r}")
        self.k = k
        self.gamma = (k - 1.0) / (k + 1.0)
        self.steps_seen = 0
        self.last_gamma = 0.0
        self._mean: np.ndarray | None = None

    @property
    def dim(self) -> int | None:
        return None if self._mean is None else self._mean.shape[0]

    def observe(self, x) -> None:
        v = _as_sample(x, self.dim)
        if self.steps_seen == 0:
            self._mean = v.copy()
            self.last_gamma = 0.0
        else:
            # Written as a correction so a constant stream is an exact fixed point.
            self._mean += (1.0 - self.gamma) * (v - self._mean)
            self.last_gamma = self.gamma
        self.steps_seen += 1

    def estimate(self) -> np.ndarray:
        if self._mean is None:
            raise ValueError("no samples observed")
        return self._mean.copy()

    def effective_sample_size(self) -> float:
        """Reciprocal of the squared-weight sum; tends to ``k`` as steps grow."""
        if self.steps_seen == 0:
            raise ValueError("no samples observed")
        t = self.steps_seen
        g2 = self.gamma * self.gamma
        head = self.gamma ** (2 * (t - 1))  # weight kept by the first sample
        if t == 1:
            tail = 0.0
        elif self.gamma == 0.0:
            tail = 1.0
        else:
            tail = (1.0 - self.gamma) ** 2 * (1.0 - g2 ** (t - 1)) / (1.0 - g2)
        return 1.0 / (head + tail)

    def snapshot(self) -> dict:
        return {
            "kind": "exponential",
            "k": self.k,
            "steps_seen": self.steps_seen,
            "mean": None if self._mean is None else self._mean.tolist(),
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "ExponentialAverage":
        out = cls(int(data["k"]))
        out.steps_seen = int(data["steps_seen"])
        if data["mean"] is not None:
            out._mean = np.asarray(data["mean"], dtype=float)
        if out.steps_seen > 0 and out._mean is None:
            raise ValueError("snapshot has samples but no mean")
        out.last_gamma = out.gamma if out.steps_seen > 1 else 0.0
        return out


class GrowingExponentialAverage:
    """Exponential mean whose effective window grows as ``c * t``.

    The decay factor is re-solved every step from the tracked effective
    sample size, so the squared-weight sum stays at ``1 / max(1, c*t)`` once
    that target is reachable, and the estimator recovers the target from any
    starting state.
    """

    def __init__(self, c: float):
        if not 0.0 < c < 1.0:
            raise ValueError(f"c must lie in (0, 1), got {c!r}")
        self.c = c
        self.t = 0
        self.n_eff = 0.0
        self.last_gamma = 0.0
        self._mean: np.ndarray | None = None

    @property
    def dim(self) -> int | None:
        return None if self._mean is None else self._mean.shape[0]

    def variance_target(self) -> float:
        """Effective sample size the estimator is aiming at right now."""
        if self.t < 1:
            raise ValueError("no samples observed")
        return max(1.0, self.c * self.t)

    def observe(self, x) -> None:
        v = _as_sample(x, self.dim)
        self.t += 1
        if self.t == 1:
            self._mean = v.copy()
            self.n_eff = 1.0
            self.last_gamma = 0.0
            return
        g = growing_gamma(self.t, self.c, self.n_eff)
        self._mean += (1.0 - g) * (v - self._mean)
        self.n_eff = 1.0 / (g * g / self.n_eff + (1.0 - g) ** 2)
        self.last_gamma = g

    def estimate(self) -> np.ndarray:
        if self._mean is None:
            raise ValueError("no samples observed")
        return self._mean.copy()

    def effective_sample_size(self) -> float:
        if self.t == 0:
            raise ValueError("no samples observed")
        return self.n_eff

    def snapshot(self) -> dict:
        return {
            "kind": "growing_exponential",
            "c": self.c,
            "t": self.t,
            "n_eff": self.n_eff,
            "mean": None if self._mean is None else self._mean.tolist(),
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "GrowingExponentialAverage":
        out = cls(float(data["c"]))
        out.t = int(data["t"])
        out.n_eff = float(data["n_eff"])
        if data["mean"] is not None:
            out._mean = np.asarray(data["mean"], dtype=float)
        if out.t > 0 and (out._mean is None or out.n_eff <= 0.0):
            raise ValueError("snapshot has samples but no mean / effective size")
        return out


class _Accumulator:
    """Running mean plus count for one contiguous block of samples."""

    __slots__ = ("mean", "count")

    def __init__(self, dim: int):
        self.mean = np.zeros(dim)
        self.count = 0

    def add(self, x: np.ndarray) -> None:
        self.count += 1
        self.mean += (x - self.mean) / self.count


class AnytimeWindowAverage:
    """Window mean assembled from block accumulators of increasing recency.

    ``num_recent`` accumulators receive samples (the newest one fills first),
    and one extra slot retains the most recently completed block.  When the
    newest accumulator fills -- after ``ceil(k / num_recent)`` samples for a
    constant window, or when the recent slots jointly cover ``ceil(c * t)``
    samples for a proportional one -- every block shifts one slot toward the
    retired end and the newest slot resets.

    The estimate pools the recent slots by sample count and then mixes in the
    retired block with the smallest weight that achieves the variance of an
    exact ``k_t``-sample mean.
    """

    def __init__(self, schedule: WindowSchedule, num_recent: int = 1):
        if not isinstance(schedule, (ConstantWindow, ProportionalWindow)):
            raise ValueError(f"schedule must be a window schedule, got {schedule!r}")
        if not isinstance(num_recent, int) or num_recent < 1:
            raise ValueError(f"num_recent must be a positive integer, got {num_recent!r}")
        self.schedule = schedule
        self.num_recent = num_recent
        self.t = 0
        self._accs: list[_Accumulator] | None = None
        if isinstance(schedule, ConstantWindow):
            self._block = _ceil_int(schedule.k / num_recent)
        else:
            self._block = None

    @property
    def dim(self) -> int | None:
        return None if self._accs is None else self._accs[0].mean.shape[0]

    @property
    def accumulator_counts(self) -> tuple[int, ...]:
        """Sample counts per slot, oldest first."""
        if self._accs is None:
            return (0,) * (self.num_recent + 1)
        return tuple(acc.count for acc in self._accs)

    def observe(self, x) -> None:
        v = _as_sample(x, self.dim)
        if self._accs is None:
            self._accs = [_Accumulator(v.shape[0]) for _ in range(self.num_recent + 1)]
        self.t += 1
        self._accs[-1].add(v)
        if self._flush_due():
            self._shift()

    def _flush_due(self) -> bool:
        if self._block is not None:
            return self._accs[-1].count >= self._block
        recent = sum(acc.count for acc in self._accs[1:])
        return recent >= self.schedule.target(self.t)

    def _shift(self) -> None:
        # Slot 0 is overwritten; one shift per step.  A proportional stream can
        # sit at its target for a few startup steps while slot 1 is still
        # empty, which the next step's shift resolves.
        dim = self._accs[0].mean.shape[0]
        self._accs = self._accs[1:] + [_Accumulator(dim)]

    def _recent_pool(self) -> tuple[np.ndarray | None, int]:
        pool = None
        total = 0
        for acc in self._accs[1:]:
            if acc.count == 0:
                continue
            if pool is None:
                pool = acc.mean.copy()
                total = acc.count
            else:
                total += acc.count
                pool += (acc.mean - pool) * (acc.count / total)
        return pool, total

    def blend_weights(self) -> np.ndarray:
        """Per-slot weights (oldest first) behind the current estimate."""
        if self.t == 0:
            raise ValueError("no samples observed")
        counts = self.accumulator_counts
        weights = np.zeros(len(counts))
        n_old = counts[0]
        n_recent = sum(counts[1:])
        if n_recent == 0:
            weights[0] = 1.0
            return weights
        if n_old == 0:
            for j, n in enumerate(counts):
                weights[j] = n / n_recent
            return weights
        target = self.schedule.target(self.t)
        try:
            g0 = min_oldest_weight(n_old, n_recent, target)
        except TargetUnattainableError:
            # Not enough samples retained for the target: fall back to the
            # minimum-variance pooling of everything on hand.
            total = n_old + n_recent
            for j, n in enumerate(counts):
                weights[j] = n / total
            return weights
        weights[0] = g0
        for j, n in enumerate(counts[1:], start=1):
            weights[j] = (1.0 - g0) * (n / n_recent)
        return weights

    def estimate(self) -> np.ndarray:
        if self.t == 0:
            raise ValueError("no samples observed")
        pool, n_recent = self._recent_pool()
        old = self._accs[0]
        if n_recent == 0:
            return old.mean.copy()
        if old.count == 0:
            return pool
        target = self.schedule.target(self.t)
        try:
            g0 = min_oldest_weight(old.count, n_recent, target)
        except TargetUnattainableError:
            total = n_recent + old.count
            pool += (old.mean - pool) * (old.count / total)
            return pool
        # Correction form keeps a constant stream an exact fixed point.
        return pool + g0 * (old.mean - pool)

    def effective_sample_size(self) -> float:
        weights = self.blend_weights()
        counts = self.accumulator_counts
        ssq = 0.0
        for w, n in zip(weights, counts):
            if n > 0 and w != 0.0:
                ssq += w * w / n
        return 1.0 / ssq

    def snapshot(self) -> dict:
        return {
            "kind": "anytime_window",
            "schedule": schedule_to_dict(self.schedule),
            "num_recent": self.num_recent,
            "t": self.t,
            "accumulators": None
            if self._accs is None
            else [{"mean": acc.mean.tolist(), "count": acc.count} for acc in self._accs],
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "AnytimeWindowAverage":
        out = cls(schedule_from_dict(data["schedule"]), int(data["num_recent"]))
        out.t = int(data["t"])
        if data["accumulators"] is not None:
            accs = []
            for entry in data["accumulators"]:
                mean = np.asarray(entry["mean"], dtype=float)
                acc = _Accumulator(mean.shape[0])
                acc.mean = mean
                acc.count = int(entry["count"])
                accs.append(acc)
            if len(accs) != out.num_recent + 1:
                raise ValueError("snapshot accumulator count does not match num_recent")
            out._accs = accs
        elif out.t > 0:
            raise ValueError("snapshot has samples but no accumulators")
        return out
