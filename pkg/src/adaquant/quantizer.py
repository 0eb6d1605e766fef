"""Threshold quantizer: maps a real value to an output level 1..m+1."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class QuantizerSpec:
    """Ordered thresholds ``c_1 <= ... <= c_m`` of a saturation function.

    Level 1 is ``x <= c_1``, level ``i`` is ``c_{i-1} < x <= c_i`` and level
    ``m + 1`` is ``x > c_m``.
    """

    thresholds: tuple[float, ...]

    def __post_init__(self):
        ts = tuple(float(c) for c in self.thresholds)
        if not ts:
            raise ValueError("at least one threshold is required")
        if any(not math.isfinite(c) for c in ts):
            raise ValueError("thresholds must be finite")
        if any(a > b for a, b in zip(ts, ts[1:])):
            raise ValueError("thresholds not sorted")
        object.__setattr__(self, "thresholds", ts)

    @property
    def m(self) -> int:
        return len(self.thresholds)

    def bound(self) -> float:
        """Smallest admissible bound ``max(c_m, -c_1)``."""
        return max(self.thresholds[-1], -self.thresholds[0])

    @property
    def levels(self) -> int:
        return len(self.thresholds) + 1


def cell_index(x: float, q: QuantizerSpec) -> int:
    # bisect_left counts thresholds strictly below x, which gives the
    # right-closed cells; ties between equal thresholds resolve to the
    # first matching cell.
    return bisect.bisect_left(q.thresholds, x) + 1


def quantize(x: float, q: QuantizerSpec) -> int:
    """Saturation function S(x)."""
    return cell_index(x, q)


def cell_bounds(level: int, q: QuantizerSpec) -> tuple[float, float]:
    """Return ``(lower, upper)`` of the half-open cell ``(lower, upper]``."""
    if not 1 <= level <= q.levels:
        raise ValueError(f"level {level} outside 1..{q.levels}")
    ts = q.thresholds
    lower = -math.inf if level == 1 else ts[level - 2]
    upper = math.inf if level == q.levels else ts[level - 1]
    return lower, upper
