"""Ground-truth companions for the streaming averagers.

``TrueTailAverage`` pays the full memory cost to compute the exact window
mean.  ``RawTailAverage`` is the classic one-shot tail average that only
starts accumulating near a pre-chosen horizon.  ``WeightTracer`` replays an
averager's decisions as an explicit per-sample weight vector, which is what
the test suite audits the weight-sum and variance contracts against.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .averagers import (
    AnytimeWindowAverage,
    ConstantWindow,
    ExponentialAverage,
    GrowingExponentialAverage,
    WindowSchedule,
    _as_sample,
    _CEIL_EPS,
)

__all__ = ["RawTailAverage", "TrueTailAverage", "WeightTracer"]


class TrueTailAverage:
    """Exact trailing-window mean backed by a ring buffer.

    Memory grows with the window: for a proportional schedule the buffer must
    be pre-sized for the horizon (``capacity >= ceil(c * horizon)``).
    """

    def __init__(self, schedule: WindowSchedule, capacity: int | None = None):
        if capacity is None:
            if isinstance(schedule, ConstantWindow):
                capacity = schedule.k
            else:
                raise ValueError("a proportional window needs an explicit capacity")
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.schedule = schedule
        self.capacity = capacity
        self.t = 0
        self._buffer: deque[np.ndarray] = deque(maxlen=capacity)
        self._dim: int | None = None

    @property
    def dim(self) -> int | None:
        return self._dim

    def observe(self, x) -> None:
        v = _as_sample(x, self._dim)
        self._dim = v.shape[0]
        self._buffer.append(v.copy())
        self.t += 1

    def current_window(self) -> int:
        """Number of samples the current estimate averages over."""
        if self.t == 0:
            raise ValueError("no samples observed")
        k_t = self.schedule.target(self.t)
        if k_t > self.capacity:
            raise ValueError(f"window {k_t} exceeds ring capacity {self.capacity}")
        return min(k_t, len(self._buffer))

    def estimate(self) -> np.ndarray:
        m = self.current_window()
        block = list(self._buffer)[-m:]
        return np.mean(np.asarray(block), axis=0)

    def effective_sample_size(self) -> float:
        return float(self.current_window())

    def stored_samples(self) -> int:
        return len(self._buffer)


class RawTailAverage:
    """One-shot tail average over the final fraction ``c`` of a fixed horizon.

    Nothing is averaged until step ``ceil(horizon * (1 - c))``; before that
    :meth:`estimate` returns ``None`` and callers report the bare sample.
    """

    def __init__(self, horizon: int, c: float):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        if not 0.0 < c < 1.0:
            raise ValueError(f"c must lie in (0, 1), got {c!r}")
        self.horizon = horizon
        self.c = c
        self.start_step = max(1, int(math.ceil(horizon * (1.0 - c) - _CEIL_EPS)))
        self.t = 0
        self.count = 0
        self._mean: np.ndarray | None = None
        self._dim: int | None = None

    @property
    def dim(self) -> int | None:
        return self._dim

    @property
    def available(self) -> bool:
        return self.count > 0

    def observe(self, x) -> None:
        v = _as_sample(x, self._dim)
        self._dim = v.shape[0]
        self.t += 1
        if self.t >= self.start_step:
            self.count += 1
            if self._mean is None:
                self._mean = v.copy()
            else:
                self._mean += (v - self._mean) / self.count

    def estimate(self) -> np.ndarray | None:
        if self.t == 0:
            raise ValueError("no samples observed")
        if not self.available:
            return None
        return self._mean.copy()

    def effective_sample_size(self) -> float:
        if self.t == 0:
            raise ValueError("no samples observed")
        return float(max(self.count, 1))

    def snapshot(self) -> dict:
        return {
            "kind": "raw_tail",
            "horizon": self.horizon,
            "c": self.c,
            "t": self.t,
            "count": self.count,
            "mean": None if self._mean is None else self._mean.tolist(),
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "RawTailAverage":
        out = cls(int(data["horizon"]), float(data["c"]))
        out.t = int(data["t"])
        out.count = int(data["count"])
        if data["mean"] is not None:
            out._mean = np.asarray(data["mean"], dtype=float)
        return out


class _Block:
    """Contiguous run of sample indices feeding one accumulator slot."""

    __slots__ = ("start", "count")

    def __init__(self):
        self.start = 0
        self.count = 0


class WeightTracer:
    """Materializes the per-sample weights behind an averager's estimate.

    Wraps a fresh averager and feeds it through :meth:`observe`.  After each
    step the tracer can report the weight vector over samples ``1..t``, its
    sum and squared sum, and the estimate reconstructed from the weights
    alone.  Cost is O(t) per step, so keep traced streams modest (<= 10^4).
    """

    def __init__(self, averager):
        self.averager = averager
        self.t = 0
        if isinstance(averager, (ExponentialAverage, GrowingExponentialAverage)):
            self._mode = "exp"
            self._w = np.zeros(1024)
        elif isinstance(averager, AnytimeWindowAverage):
            self._mode = "awa"
            self._blocks = [_Block() for _ in range(averager.num_recent + 1)]
        elif isinstance(averager, TrueTailAverage):
            self._mode = "ring"
        elif isinstance(averager, RawTailAverage):
            self._mode = "raw"
        else:
            raise ValueError(f"cannot trace averager of type {type(averager).__name__}")

    def observe(self, x) -> None:
        self.averager.observe(x)
        self.t += 1
        if self._mode == "exp":
            if self.t > self._w.shape[0]:
                grown = np.zeros(2 * self._w.shape[0])
                grown[: self._w.shape[0]] = self._w
                self._w = grown
            g = self.averager.last_gamma
            self._w[: self.t - 1] *= g
            self._w[self.t - 1] = 1.0 - g
        elif self._mode == "awa":
            newest = self._blocks[-1]
            if newest.count == 0:
                newest.start = self.t - 1
            newest.count += 1
            if self.averager.accumulator_counts[-1] == 0:
                # The averager folded the sample and then shifted: mirror it.
                self._blocks = self._blocks[1:] + [_Block()]

    def _slot_weights(self) -> np.ndarray:
        return self.averager.blend_weights()

    def weights(self) -> np.ndarray:
        """Weight vector over samples 1..t (index 0 is the first sample)."""
        if self.t == 0:
            raise ValueError("no samples observed")
        if self._mode == "exp":
            return self._w[: self.t].copy()
        out = np.zeros(self.t)
        if self._mode == "awa":
            slot_w = self._slot_weights()
            for block, w in zip(self._blocks, slot_w):
                if block.count > 0:
                    out[block.start : block.start + block.count] = w / block.count
            return out
        if self._mode == "ring":
            m = self.averager.current_window()
            out[self.t - m :] = 1.0 / m
            return out
        # raw: before its start step the reported value is the latest sample
        if self.averager.available:
            m = self.averager.count
            out[self.t - m :] = 1.0 / m
        else:
            out[self.t - 1] = 1.0
        return out

    def weight_sums(self) -> tuple[float, float]:
        """(sum of weights, sum of squared weights) at the current step."""
        if self._mode == "exp":
            w = self._w[: self.t]
            return float(np.sum(w)), float(np.dot(w, w))
        if self._mode == "awa":
            slot_w = self._slot_weights()
            total = 0.0
            ssq = 0.0
            for block, w in zip(self._blocks, slot_w):
                if block.count > 0:
                    total += w
                    ssq += w * w / block.count
            return total, ssq
        w = self.weights()
        return float(np.sum(w)), float(np.dot(w, w))

    def reconstruct(self, stream: np.ndarray) -> np.ndarray:
        """Apply the traced weights to the recorded stream."""
        stream = np.asarray(stream, dtype=float)
        if stream.shape[0] < self.t:
            raise ValueError("stream shorter than the traced prefix")
        return self.weights() @ stream[: self.t]
