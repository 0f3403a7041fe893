"""Capacity formulas for the depolarizing channel and yield-curve bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


def _binary_entropy(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def classical_capacity_depolarizing(p: float) -> float:
    """``1 - H((1+p)/2, (1-p)/2)`` bits per use."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"channel parameter must lie in [0, 1], got {p}")
    return 1.0 - _binary_entropy((1.0 + p) / 2.0)


def qb_lower_bound(eb: float, capacity: float) -> float:
    """Quantum rate from ebits plus teleportation bits sent over the same channel.

    Each ebit costs ``1/eb`` uses to make and one classical bit, i.e.
    ``1/capacity`` uses, to consume; the rate is ``eb / (1 + eb/capacity)``.
    """
    if eb < 0.0 or capacity < 0.0:
        raise ValueError("yield and capacity must be nonnegative")
    if eb == 0.0 or capacity == 0.0:
        return 0.0
    return eb / (1.0 + eb / capacity)


def p_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid; ``stop`` is included when within ``step/2`` of a grid point."""
    if step <= 0.0:
        raise ValueError("grid step must be positive")
    if not (0.0 <= start <= stop <= 1.0):
        raise ValueError(f"grid [{start}, {stop}] must lie within [0, 1]")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    # decimal-friendly values: round away binary noise from start + i*step
    return [min(stop, round(start + i * step, 12)) for i in range(count)]


@dataclass(frozen=True)
class YieldCurve:
    method: str
    points: tuple[tuple[float, float], ...]
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        ps = [p for p, _ in self.points]
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValueError(f"{self.method}: grid must be strictly increasing")
        for p, y in self.points:
            if not (0.0 <= y <= 1.0 + 1e-12):
                raise ValueError(f"{self.method}: yield {y} at p={p} outside [0, 1]")

    @property
    def grid(self) -> list[float]:
        return [p for p, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [y for _, y in self.points]

    def at(self, p: float) -> float:
        for q, y in self.points:
            if abs(q - p) < 1e-12:
                return y
        raise KeyError(p)


def qb_curve(eb_curve: YieldCurve) -> YieldCurve:
    pts = tuple((p, qb_lower_bound(y, classical_capacity_depolarizing(p))) for p, y in eb_curve.points)
    meta = dict(eb_curve.metadata)
    meta["derived_from"] = eb_curve.method
    return YieldCurve(f"qb-{eb_curve.method}", pts, meta)


def envelope(curves: Sequence[YieldCurve], method: str = "envelope") -> YieldCurve:
    """Pointwise maximum; the first curve wins ties.  ``metadata['winners']`` names the winner per point."""
    if not curves:
        raise ValueError("envelope of an empty list")
    grid = np.asarray(curves[0].grid)
    for c in curves[1:]:
        if len(c.points) != len(grid) or not np.allclose(c.grid, grid, rtol=0.0, atol=1e-12):
            raise ValueError(f"grid of {c.method!r} does not match {curves[0].method!r}")
    values = np.array([c.values for c in curves])
    best = values.argmax(axis=0)
    winners = [curves[i].method for i in best]
    pts = tuple((float(p), float(values[i, j])) for j, (p, i) in enumerate(zip(grid, best)))
    return YieldCurve(method, pts, {"winners": winners, "inputs": [c.method for c in curves]})
