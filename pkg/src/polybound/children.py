"""The spread functional ell_n and the children decomposition of a measure.

ell_n(mu)^n is the ratio of the expected absolute Vandermonde products of
n+1 and n iid samples of mu; it vanishes exactly when mu sits on n or fewer
points.  The (n, eps)-children are the heavy connected components of the
sublevel set  {t : prod_i |t - t_i| <= 2 * eps^{-1} * ell_n^n}  around nodes
chosen so the set captures mass 1 - eps/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import philox
from .measure import (
    AtomicMeasure,
    ProbMeasure,
    UniformMeasure,
    mass,
    mass_interval,
    quantile,
    restrict,
    sample,
    support_hull,
)
from .realset import Interval, RealSet, normalize

EXACT_TENSOR_LIMIT = 10_000_000


class DegenerateMeasureError(ValueError):
    """ell_n is zero: the measure sits on too few points to decompose."""


class NodeSearchError(RuntimeError):
    """Node search exhausted its budget, which signals an ell_n estimation error."""


@dataclass(frozen=True)
class MCBudget:
    samples: int = 200_000
    seed: int = 2024


@dataclass(frozen=True)
class EllEstimate:
    n: int
    value: float
    stderr: float
    method: str  # "exact" or "montecarlo"
    samples: int = 0
    seed: int = 0
    degenerate_denominator: bool = False

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "value": self.value,
            "stderr": self.stderr,
            "method": self.method,
            "samples": self.samples,
            "seed": self.seed,
            "degenerate_denominator": self.degenerate_denominator,
        }


def _abs_vandermonde(pts: np.ndarray) -> np.ndarray:
    """|V_k| along the last axis of a (..., k) array."""
    k = pts.shape[-1]
    out = np.ones(pts.shape[:-1])
    for j in range(k):
        for i in range(j):
            out = out * (pts[..., j] - pts[..., i])
    return np.abs(out)


def _exact_mean_abs_vandermonde(mu: AtomicMeasure, k: int) -> float:
    if k <= 1:
        return 1.0
    m = len(mu.atoms)
    idx = np.indices((m,) * k).reshape(k, -1).T
    pts = mu.points[idx]
    wts = mu.weights[idx].prod(axis=1)
    return float(np.sum(wts * _abs_vandermonde(pts)))


def _mc_mean_abs_vandermonde(
    mu: ProbMeasure, k: int, samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    if k <= 1:
        return 1.0, 0.0
    draws = sample(mu, rng, samples * k).reshape(samples, k)
    vals = _abs_vandermonde(draws)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples))
    return mean, se


def ell_n(mu: ProbMeasure, n: int, budget: MCBudget | None = None) -> EllEstimate:
    """Estimate ell_n(mu); exact tensor sum for small atomic measures.

    Atomic measures with m^{n+1} enumerable terms are computed exactly
    (stderr 0); everything else is Monte Carlo with a delta-method standard
    error, numerator and denominator drawn from disjoint Philox streams.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    budget = budget or MCBudget()
    if isinstance(mu, AtomicMeasure) and len(mu.atoms) ** (n + 1) <= EXACT_TENSOR_LIMIT:
        den = _exact_mean_abs_vandermonde(mu, n)
        if den == 0.0:
            return EllEstimate(n, 0.0, 0.0, "exact", degenerate_denominator=True)
        num = _exact_mean_abs_vandermonde(mu, n + 1)
        return EllEstimate(n, (num / den) ** (1.0 / n), 0.0, "exact")
    num, se_num = _mc_mean_abs_vandermonde(
        mu, n + 1, budget.samples, philox(budget.seed, 1)
    )
    den, se_den = _mc_mean_abs_vandermonde(
        mu, n, budget.samples, philox(budget.seed, 2)
    )
    if den <= 0.0:
        return EllEstimate(
            n, 0.0, 0.0, "montecarlo", budget.samples, budget.seed, True
        )
    value = (num / den) ** (1.0 / n) if num > 0.0 else 0.0
    stderr = 0.0
    if num > 0.0:
        rel = math.sqrt((se_num / num) ** 2 + (se_den / den) ** 2)
        stderr = value * rel / n
    return EllEstimate(n, value, stderr, "montecarlo", budget.samples, budget.seed)


@dataclass(frozen=True)
class ChildrenDecomposition:
    """Nodes, sublevel threshold, and the heavy components with their masses."""

    n: int
    eps: float
    nodes: tuple[float, ...]
    threshold: float
    children: tuple[Interval, ...]
    child_masses: tuple[float, ...]
    ell: EllEstimate

    @property
    def total_mass(self) -> float:
        return float(sum(self.child_masses))

    @property
    def total_length(self) -> float:
        return float(sum(c.length for c in self.children))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "nodes": list(self.nodes),
            "threshold": self.threshold,
            "children": [c.to_json() for c in self.children],
            "child_masses": list(self.child_masses),
            "ell": self.ell.to_json(),
        }


def _product_abs(nodes: tuple[float, ...], t: float) -> float:
    out = 1.0
    for x in nodes:
        out *= abs(t - x)
    return out


def _interior_max_point(nodes: tuple[float, ...], lo: float, hi: float) -> float:
    """Critical point of prod |t - t_i| in (lo, hi) between consecutive nodes.

    h(t) = sum 1/(t - t_i) is strictly decreasing from +inf to -inf there.
    """
    a, b = lo, hi
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        h = sum(1.0 / (m - x) for x in nodes)
        if h > 0.0:
            a = m
        else:
            b = m
        if b - a <= 1e-15 * (1.0 + abs(a) + abs(b)):
            break
    return 0.5 * (a + b)


def _branch_crossing(
    nodes: tuple[float, ...], tau: float, lo: float, hi: float
) -> float:
    """Solve prod |t - t_i| = tau on a branch where it is monotone in [lo, hi]."""
    flo = _product_abs(nodes, lo) - tau
    a, b = lo, hi
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = _product_abs(nodes, m) - tau
        if fm == 0.0:
            return m
        if (fm > 0.0) == (flo > 0.0):
            a, flo = m, fm
        else:
            b = m
        if b - a <= 1e-15 * (1.0 + abs(a) + abs(b)):
            break
    return 0.5 * (a + b)


def sublevel_set(nodes: tuple[float, ...], tau: float) -> RealSet:
    """{t : prod_i |t - t_i| <= tau} as a union of <= len(nodes) intervals."""
    if tau < 0.0:
        raise ValueError("threshold must be nonnegative")
    ts = tuple(sorted(nodes))
    n = len(ts)
    if tau == 0.0:
        return normalize([Interval(x, x) for x in ts])
    span = max(ts[-1] - ts[0], 1.0)
    # outer crossings: |g| grows monotonically away from the extreme nodes
    reach = max(tau ** (1.0 / n), 1e-12 * span)
    while _product_abs(ts, ts[0] - reach) <= tau:
        reach *= 2.0
    left = _branch_crossing(ts, tau, ts[0] - reach, ts[0])
    reach = max(tau ** (1.0 / n), 1e-12 * span)
    while _product_abs(ts, ts[-1] + reach) <= tau:
        reach *= 2.0
    right = _branch_crossing(ts, tau, ts[-1], ts[-1] + reach)
    intervals: list[Interval] = []
    start = left
    for k in range(n - 1):
        c = _interior_max_point(ts, ts[k], ts[k + 1])
        if _product_abs(ts, c) > tau:
            up = _branch_crossing(ts, tau, ts[k], c)
            down = _branch_crossing(ts, tau, c, ts[k + 1])
            intervals.append(Interval(min(start, up), max(start, up)))
            start = down
    intervals.append(Interval(min(start, right), max(start, right)))
    return normalize(intervals)


def _distinct_nodes(points: np.ndarray, span: float) -> tuple[float, ...]:
    pts = sorted(float(x) for x in points)
    out: list[float] = []
    step = max(span, 1.0) * 1e-9
    for x in pts:
        if out and x <= out[-1]:
            x = out[-1] + step
        out.append(x)
    return tuple(out)


def decompose(
    mu: ProbMeasure,
    n: int,
    eps: float,
    budget: MCBudget | None = None,
) -> ChildrenDecomposition:
    """The (n, eps)-children of mu.

    Children are the connected components of the sublevel set (intersected
    with the convex hull of the support) whose mass is at least eps/(2n);
    zero-length children are meaningful for atomic measures only - for
    uniform measures they carry no mass and are dropped by the mass filter.
    Raises DegenerateMeasureError when ell_n(mu) = 0.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    budget = budget or MCBudget()
    ell = ell_n(mu, n, budget)
    if ell.value <= 0.0:
        raise DegenerateMeasureError(
            f"ell_{n} vanishes (measure supported on <= {n} points)"
        )
    tau = 2.0 * ell.value**n / eps
    hull = support_hull(mu)
    target = 1.0 - 0.5 * eps
    span = hull.length

    def eval_nodes(nodes: tuple[float, ...]) -> tuple[float, RealSet]:
        es = sublevel_set(nodes, tau).intersect_interval(hull)
        return mass(mu, es), es

    best_nodes = _distinct_nodes(
        np.array([quantile(mu, k / (n + 1)) for k in range(1, n + 1)]), span
    )
    best_mass, best_set = eval_nodes(best_nodes)
    if best_mass < target:
        rng = philox(budget.seed, 3)
        for _ in range(200):
            cand = _distinct_nodes(np.sort(sample(mu, rng, n)), span)
            m, es = eval_nodes(cand)
            if m > best_mass:
                best_nodes, best_mass, best_set = cand, m, es
            if best_mass >= target:
                break
    if best_mass < target:
        grid = [quantile(mu, q) for q in np.linspace(0.0, 1.0, 257)]
        for _ in range(4):
            improved = False
            for i in range(n):
                for g in grid:
                    cand = list(best_nodes)
                    cand[i] = g
                    cand_t = _distinct_nodes(np.array(sorted(cand)), span)
                    m, es = eval_nodes(cand_t)
                    if m > best_mass + 1e-15:
                        best_nodes, best_mass, best_set = cand_t, m, es
                        improved = True
            if best_mass >= target or not improved:
                break
    if best_mass < target:
        raise NodeSearchError(
            f"no node configuration reached mass {target:.6f} "
            f"(best {best_mass:.6f}); ell_{n} estimate is suspect"
        )
    comps = best_set.parts
    if len(comps) > n:
        raise AssertionError("sublevel set exceeded n components")
    kept = [
        (c, mass_interval(mu, c))
        for c in comps
        if mass_interval(mu, c) >= eps / (2.0 * n)
    ]
    children = tuple(c for c, _ in kept)
    masses = tuple(m for _, m in kept)
    total_len = sum(c.length for c in children)
    provable = 2.0 * n * tau ** (1.0 / n)
    if total_len > provable * (1.0 + 1e-9):
        raise AssertionError("children exceed the provable sublevel length bound")
    if sum(masses) < 1.0 - eps - 1e-12:
        raise AssertionError("children lost too much mass")
    return ChildrenDecomposition(
        n, eps, best_nodes, tau, children, masses, ell
    )


def atoms_as_children(mu: AtomicMeasure, n: int, eps: float) -> ChildrenDecomposition:
    """Degenerate decomposition for atomic measures on <= n points."""
    pts = tuple(x for x, _ in mu.atoms)
    return ChildrenDecomposition(
        n,
        eps,
        pts,
        0.0,
        tuple(Interval(x, x) for x in pts),
        tuple(w for _, w in mu.atoms),
        EllEstimate(n, 0.0, 0.0, "exact", degenerate_denominator=len(pts) < n),
    )


def decompose_or_points(
    mu: ProbMeasure, n: int, eps: float, budget: MCBudget | None = None
) -> ChildrenDecomposition:
    """decompose, short-circuiting atomic measures on <= n points."""
    if isinstance(mu, AtomicMeasure) and len(mu.atoms) <= n:
        return atoms_as_children(mu, n, eps)
    return decompose(mu, n, eps, budget)


@dataclass(frozen=True)
class TreeNode:
    """One interval of the iterated decomposition; the root has no interval."""

    interval: Interval | None
    conditional_mass: float
    absolute_mass: float
    decomposition: ChildrenDecomposition | None
    children: tuple["TreeNode", ...] = field(default=())

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["TreeNode"]:
        if self.is_leaf:
            return [self]
        out: list[TreeNode] = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def to_json(self) -> dict:
        return {
            "interval": None if self.interval is None else self.interval.to_json(),
            "conditional_mass": self.conditional_mass,
            "absolute_mass": self.absolute_mass,
            "decomposition": None
            if self.decomposition is None
            else self.decomposition.to_json(),
            "children": [c.to_json() for c in self.children],
        }


def children_tree(
    mu: ProbMeasure,
    n: int,
    eps_prime: float,
    budget: MCBudget | None = None,
) -> TreeNode:
    """Iterated children: level k holds the (n-k+1, eps')-children of level k-1.

    Children of an interval are the children of the restricted normalized
    measure.  Leaves are the final 1-children; their total absolute mass is
    at least (1 - eps')^n.
    """

    def build(m: ProbMeasure, level_n: int, abs_mass: float) -> tuple[
        ChildrenDecomposition, tuple[TreeNode, ...]
    ]:
        dec = decompose_or_points(m, level_n, eps_prime, budget)
        kids = []
        for iv, cm in zip(dec.children, dec.child_masses):
            child_abs = abs_mass * cm
            if level_n <= 1:
                kids.append(TreeNode(iv, cm, child_abs, None))
                continue
            sub = restrict(m, iv)
            sub_dec, sub_kids = build(sub, level_n - 1, child_abs)
            kids.append(TreeNode(iv, cm, child_abs, sub_dec, sub_kids))
        return dec, tuple(kids)

    dec, kids = build(mu, n, 1.0)
    return TreeNode(None, 1.0, 1.0, dec, kids)
