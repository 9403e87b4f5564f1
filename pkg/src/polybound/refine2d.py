"""Fiberwise refinement of a plane region in the straightened model.

Columns discretize the first coordinate; each fiber is an exact RealSet in
the second.  Refining keeps the columns whose fiber carries at least half
the average fiber mass (so at least half the area survives) and then
intersects every surviving fiber with its certified interval, after which
the integral of any degree <= n polynomial along a vertical line through a
refined point dominates the polynomial's derivative values at that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import philox
from .bounds import Certificate, theorem0_pipeline
from .measure import UniformMeasure, sample
from .oracle import integral_abs_set, sphere_coeffs, _u_basis_to_t
from .peano import Polynomial, polyder, polyval
from .realset import Interval, RealSet

MASS_THRESHOLD = 0.5  # fraction of the average fiber mass a column must carry


@dataclass(frozen=True)
class ColumnCell:
    x0: float
    dx: float
    fiber: RealSet

    def __post_init__(self) -> None:
        if self.dx <= 0.0:
            raise ValueError("column width must be positive")

    def to_json(self) -> dict:
        return {"x0": self.x0, "dx": self.dx, "fiber": self.fiber.to_json()}


@dataclass(frozen=True)
class PlaneRegion:
    cells: tuple[ColumnCell, ...]

    @property
    def area(self) -> float:
        return sum(c.dx * c.fiber.measure for c in self.cells)

    @property
    def projection_width(self) -> float:
        return sum(c.dx for c in self.cells if c.fiber.measure > 0.0)

    def to_json(self) -> dict:
        return {"x_cells": [c.to_json() for c in self.cells]}

    @staticmethod
    def from_json(obj: dict) -> "PlaneRegion":
        cells = tuple(
            ColumnCell(float(c["x0"]), float(c["dx"]), RealSet.from_json(c["fiber"]))
            for c in obj["x_cells"]
        )
        return PlaneRegion(cells)


@dataclass(frozen=True)
class RefinementResult:
    refined: PlaneRegion
    c_mass: float
    c_ineq: float
    kept: tuple[bool, ...]
    per_fiber_intervals: tuple[Interval | None, ...]
    certificates: tuple[Certificate | None, ...]
    n: int

    def to_json(self) -> dict:
        return {
            "refined": self.refined.to_json(),
            "c_mass": self.c_mass,
            "c_ineq": self.c_ineq,
            "kept": list(self.kept),
            "per_fiber_intervals": [
                None if iv is None else iv.to_json() for iv in self.per_fiber_intervals
            ],
            "certificates": [
                None if c is None else c.to_json() for c in self.certificates
            ],
            "n": self.n,
        }


def refine(
    omega: PlaneRegion,
    n: int,
    eps: float,
    budget: int = 1000,
    seed: int = 0,
    mc=None,
) -> RefinementResult:
    """Drop light columns, then cut each fiber down to its certified interval.

    The surviving area is at least (1-eps)/(2n) of the original: Fubini
    keeps half the area past the column filter, and each certified interval
    retains at least (1-eps)/n of its fiber.
    """
    if omega.area <= 0.0:
        raise ValueError("region must have positive area")
    area = omega.area
    width = omega.projection_width
    threshold = MASS_THRESHOLD * area / width
    kept: list[bool] = []
    intervals: list[Interval | None] = []
    certs: list[Certificate | None] = []
    refined_cells: list[ColumnCell] = []
    for idx, cell in enumerate(omega.cells):
        if cell.fiber.measure < threshold:
            kept.append(False)
            intervals.append(None)
            certs.append(None)
            continue
        cert = theorem0_pipeline(
            cell.fiber, n, eps, budget=budget, seed=seed + idx, mc=mc
        )
        iv = cert.region.parts[0]
        kept.append(True)
        intervals.append(iv)
        certs.append(cert)
        refined_cells.append(
            ColumnCell(cell.x0, cell.dx, cell.fiber.intersect_interval(iv))
        )
    refined = PlaneRegion(tuple(refined_cells))
    c_mass = (1.0 - eps) / (2.0 * n)
    c_ineq = min((c.constant for c in certs if c is not None), default=0.0)
    if refined.area < c_mass * area - 1e-12:
        raise AssertionError("refinement lost more area than the guarantee")
    return RefinementResult(
        refined, c_mass, c_ineq, tuple(kept), tuple(intervals), tuple(certs), n
    )


@dataclass(frozen=True)
class IntestReport:
    trials: int
    violations: int
    min_slack: float
    negative_control_trials: int = 0
    negative_control_violations: int = 0

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "negative_control_trials": self.negative_control_trials,
            "negative_control_violations": self.negative_control_violations,
        }


def validate_intest(
    result: RefinementResult,
    omega: PlaneRegion,
    trials: int,
    seed: int = 0,
    negative_control: bool = False,
) -> IntestReport:
    """Randomized check of the translated integral inequality.

    Per trial: a kept column, a point s of its refined fiber, and a random
    degree <= n polynomial f; the claim is

        integral |f(t)| chi_fiber(t + s) dt >= c * max_j |K|^{j+1} |f^(j)(0)|

    with c the column's certified constant.  With negative_control, s is
    drawn from the dropped part of the fiber instead and violations are
    tallied separately (they are expected: membership in the certified
    interval is exactly what fails).
    """
    rng = philox(seed, 31)
    kept_idx = [i for i, k in enumerate(result.kept) if k]
    if not kept_idx:
        raise ValueError("no kept columns to validate")
    refined_by_idx: dict[int, RealSet] = {}
    pos = 0
    for i, k in enumerate(result.kept):
        if k:
            refined_by_idx[i] = result.refined.cells[pos].fiber
            pos += 1
    violations = 0
    neg_trials = 0
    neg_violations = 0
    min_slack = math.inf
    for _ in range(trials):
        col = kept_idx[int(rng.integers(len(kept_idx)))]
        cell = omega.cells[col]
        cert = result.certificates[col]
        fiber = cell.fiber
        refined_fiber = refined_by_idx[col]
        if negative_control:
            leftover = _set_difference(fiber, result.per_fiber_intervals[col])
            if leftover.measure <= 0.0:
                continue
            s = float(sample(UniformMeasure(leftover), rng, 1)[0])
            neg_trials += 1
        else:
            s = float(sample(UniformMeasure(refined_fiber), rng, 1)[0])
        cu = sphere_coeffs(rng, 1, result.n + 1)
        ct = _u_basis_to_t(cu, fiber.hull)[0]
        f = Polynomial(tuple(ct))
        shifted = RealSet(
            tuple(Interval(p.lo - s, p.hi - s) for p in fiber.parts)
        )
        lhs = integral_abs_set(f, shifted)
        ksz = fiber.measure
        rhs = cert.constant * max(
            ksz ** (j + 1) * abs(float(polyval(polyder(f.coeffs, j), 0.0)))
            for j in range(result.n + 1)
        )
        slack = lhs - rhs
        if negative_control:
            if slack < -1e-9:
                neg_violations += 1
        else:
            min_slack = min(min_slack, slack)
            if slack < -1e-9:
                violations += 1
    return IntestReport(
        0 if negative_control else trials,
        violations,
        min_slack,
        neg_trials,
        neg_violations,
    )


def _set_difference(s: RealSet, iv: Interval | None) -> RealSet:
    if iv is None:
        return s
    parts = []
    for p in s.parts:
        if p.hi < iv.lo or p.lo > iv.hi:
            parts.append(p)
            continue
        if p.lo < iv.lo:
            parts.append(Interval(p.lo, iv.lo))
        if p.hi > iv.hi:
            parts.append(Interval(iv.hi, p.hi))
    kept = [p for p in parts if p.length > 0.0]
    if not kept:
        return RealSet(())
    out = [kept[0]]
    for p in kept[1:]:
        if p.lo <= out[-1].hi:
            out[-1] = Interval(out[-1].lo, max(out[-1].hi, p.hi))
        else:
            out.append(p)
    return RealSet(tuple(out))