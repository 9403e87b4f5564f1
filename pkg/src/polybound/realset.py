"""Finite unions of disjoint closed intervals and the one-sided enlargement K_eps.

All sets handled by the library are finite unions of closed intervals.
Values are immutable; every constructor normalizes, so touching or
overlapping intervals never survive construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; degenerate points (lo == hi) are allowed."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"interval requires lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, t: float) -> bool:
        return self.lo <= t <= self.hi

    def to_json(self) -> list[float]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class RealSet:
    """Sorted union of pairwise disjoint closed intervals (positive gaps)."""

    parts: tuple[Interval, ...]

    def __post_init__(self) -> None:
        for a, b in zip(self.parts, self.parts[1:]):
            if not b.lo > a.hi:
                raise ValueError("RealSet parts must be sorted with strictly positive gaps")

    @property
    def measure(self) -> float:
        return sum(p.length for p in self.parts)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def hull(self) -> Interval:
        if not self.parts:
            raise ValueError("empty set has no hull")
        return Interval(self.parts[0].lo, self.parts[-1].hi)

    def gaps(self) -> list[Interval]:
        """Bounded open gaps between consecutive parts, as closed intervals."""
        return [Interval(a.hi, b.lo) for a, b in zip(self.parts, self.parts[1:])]

    def contains(self, t: float) -> bool:
        return any(p.contains(t) for p in self.parts)

    def intersect_interval(self, iv: Interval) -> "RealSet":
        kept = []
        for p in self.parts:
            lo, hi = max(p.lo, iv.lo), min(p.hi, iv.hi)
            if lo <= hi:
                kept.append(Interval(lo, hi))
        return RealSet(tuple(kept))

    def union(self, other: "RealSet") -> "RealSet":
        return normalize(list(self.parts) + list(other.parts))

    def to_json(self) -> dict:
        return {"parts": [p.to_json() for p in self.parts]}

    @staticmethod
    def from_json(obj: dict) -> "RealSet":
        if not isinstance(obj, dict) or "parts" not in obj:
            raise ValueError('RealSet JSON must be {"parts": [[lo, hi], ...]}')
        return normalize([Interval(float(lo), float(hi)) for lo, hi in obj["parts"]])


def normalize(intervals: list[Interval]) -> RealSet:
    """Sort and merge a list of intervals into a RealSet.

    Touching intervals ([0,1],[1,2]) merge; total measure is preserved.
    """
    parts = sorted(intervals, key=lambda p: (p.lo, p.hi))
    merged: list[Interval] = []
    for p in parts:
        if merged and p.lo <= merged[-1].hi:
            if p.hi > merged[-1].hi:
                merged[-1] = Interval(merged[-1].lo, p.hi)
        else:
            merged.append(p)
    return RealSet(tuple(merged))


def realset(*pairs: tuple[float, float]) -> RealSet:
    """Convenience constructor: realset((0, 1), (2, 3))."""
    return normalize([Interval(a, b) for a, b in pairs])


def measure(s: RealSet) -> float:
    return s.measure


def k_epsilon(k: RealSet, hull: Interval, eps: float) -> RealSet:
    """K enlarged by the gap end-segments proportionately close to K on one side.

    Inside each bounded gap (a, b) of K the right-attached piece is
    [(b + eps*a)/(1 + eps), b] (points whose distance to K on the right is at
    most eps times the distance on the left) and symmetrically the
    left-attached piece is [a, (a + eps*b)/(1 + eps)].  Points outside the
    convex hull of K are never added: they are not bounded by K on both
    sides.  The added measure per gap is 2*eps*(b - a)/(1 + eps).
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if k.is_empty:
        raise ValueError("k_epsilon of an empty set")
    if k.parts[0].lo < hull.lo or k.parts[-1].hi > hull.hi:
        raise ValueError("K must be contained in the hull interval")
    extra: list[Interval] = []
    for g in k.gaps():
        a, b = g.lo, g.hi
        extra.append(Interval(a, (a + eps * b) / (1.0 + eps)))
        extra.append(Interval((b + eps * a) / (1.0 + eps), b))
    return normalize(list(k.parts) + extra)
