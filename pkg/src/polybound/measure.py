"""Probability measures on the line and the minimal-covering-length functional.

Two kinds are supported: the uniform (normalized Lebesgue) measure on a
RealSet and a finitely atomic measure.  The length functional
``length_n_eps(mu, n, eps)`` is the least total length of at most n closed
intervals capturing mu-mass at least 1 - eps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .realset import Interval, RealSet, normalize


@dataclass(frozen=True)
class UniformMeasure:
    """Normalized Lebesgue measure on a RealSet of positive measure."""

    support: RealSet

    def __post_init__(self) -> None:
        if self.support.measure <= 0.0:
            raise ValueError("uniform measure needs support of positive measure")

    def to_json(self) -> dict:
        return {"uniform": self.support.to_json()}


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many atoms (point, weight); weights positive, summing to 1."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("atomic measure needs at least one atom")
        pts = [x for x, _ in self.atoms]
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("atom points must be strictly increasing")
        if any(w <= 0.0 for _, w in self.atoms):
            raise ValueError("atom weights must be positive")
        total = math.fsum(w for _, w in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom weights must sum to 1, got {total}")

    @property
    def points(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def to_json(self) -> dict:
        return {"atoms": [[x, w] for x, w in self.atoms]}


ProbMeasure = Union[UniformMeasure, AtomicMeasure]


def measure_from_json(obj: dict) -> ProbMeasure:
    if "uniform" in obj:
        return UniformMeasure(RealSet.from_json(obj["uniform"]))
    if "atoms" in obj:
        return AtomicMeasure(tuple((float(x), float(w)) for x, w in obj["atoms"]))
    raise ValueError('measure JSON must carry "uniform" or "atoms"')


def support_set(mu: ProbMeasure) -> RealSet:
    """The support as a RealSet (point intervals for atoms)."""
    if isinstance(mu, UniformMeasure):
        return mu.support
    return normalize([Interval(x, x) for x, _ in mu.atoms])


def support_hull(mu: ProbMeasure) -> Interval:
    return support_set(mu).hull


def mass(mu: ProbMeasure, s: RealSet) -> float:
    """mu(S), exact for both kinds."""
    if isinstance(mu, UniformMeasure):
        total = mu.support.measure
        hit = 0.0
        for iv in s.parts:
            hit += mu.support.intersect_interval(iv).measure
        return hit / total
    pts, wts = mu.points, mu.weights
    inside = np.zeros(len(pts), dtype=bool)
    for iv in s.parts:
        inside |= (pts >= iv.lo) & (pts <= iv.hi)
    return float(np.sum(wts[inside]))


def mass_interval(mu: ProbMeasure, iv: Interval) -> float:
    return mass(mu, RealSet((iv,)))


def restrict(mu: ProbMeasure, iv: Interval) -> ProbMeasure:
    """Normalized restriction mu(I)^{-1} mu|_I, same kind as mu."""
    if isinstance(mu, UniformMeasure):
        cut = mu.support.intersect_interval(iv)
        if cut.measure <= 0.0:
            raise ValueError(f"restriction to zero-mass interval [{iv.lo}, {iv.hi}]")
        return UniformMeasure(cut)
    kept = [(x, w) for x, w in mu.atoms if iv.lo <= x <= iv.hi]
    if not kept:
        raise ValueError(f"restriction to zero-mass interval [{iv.lo}, {iv.hi}]")
    total = math.fsum(w for _, w in kept)
    return AtomicMeasure(tuple((x, w / total) for x, w in kept))


def quantile(mu: ProbMeasure, q: float) -> float:
    """Smallest t with mu((-inf, t]) >= q, for q in (0, 1]."""
    q = min(max(q, 0.0), 1.0)
    if isinstance(mu, UniformMeasure):
        total = mu.support.measure
        want = q * total
        acc = 0.0
        for p in mu.support.parts:
            if acc + p.length >= want:
                return p.lo + (want - acc)
            acc += p.length
        return mu.support.parts[-1].hi
    acc = 0.0
    for x, w in mu.atoms:
        acc += w
        if acc >= q - 1e-15:
            return x
    return mu.atoms[-1][0]


def sample(mu: ProbMeasure, rng: np.random.Generator, size: int) -> np.ndarray:
    """iid draws from mu."""
    if isinstance(mu, UniformMeasure):
        parts = mu.support.parts
        lens = np.array([p.length for p in parts])
        los = np.array([p.lo for p in parts])
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        u = rng.random(size) * cum[-1]
        idx = np.minimum(np.searchsorted(cum, u, side="right") - 1, len(parts) - 1)
        return los[idx] + (u - cum[idx])
    idx = rng.choice(len(mu.atoms), size=size, p=mu.weights / mu.weights.sum())
    return mu.points[idx]


def shortest_mass_interval(mu: ProbMeasure, q: float) -> Interval:
    """Shortest closed interval with mu-mass >= q (exact; leftmost tie).

    Uniform case: the window length as a function of the unrolled start is
    piecewise constant with jumps only where a window edge crosses a gap, so
    gap positions and their q-shifts are the only candidates.
    """
    if not (0.0 < q <= 1.0):
        raise ValueError("q must be in (0, 1]")
    if isinstance(mu, AtomicMeasure):
        pts, wts = mu.points, mu.weights
        m = len(pts)
        prefix = np.concatenate([[0.0], np.cumsum(wts)])
        best: tuple[float, float, float] | None = None
        b = 0
        for a in range(m):
            b = max(b, a)
            while b < m and prefix[b + 1] - prefix[a] < q - 1e-15:
                b += 1
            if b >= m:
                break
            length = float(pts[b] - pts[a])
            if best is None or length < best[0]:
                best = (length, float(pts[a]), float(pts[b]))
        if best is None:
            return Interval(float(pts[0]), float(pts[-1]))
        return Interval(best[1], best[2])
    comps = mu.support.parts
    total = mu.support.measure
    need = min(q * total, total)
    cum = [0.0]
    for c in comps:
        cum.append(cum[-1] + c.length)
    gap_pos = cum[1:-1]  # unrolled positions of the gaps

    def to_real_right(u: float) -> float:
        i = min(np.searchsorted(cum, u, side="right") - 1, len(comps) - 1)
        i = max(i, 0)
        return comps[i].lo + (u - cum[i])

    def to_real_left(u: float) -> float:
        i = min(np.searchsorted(cum, u, side="left") - 1, len(comps) - 1)
        i = max(i, 0)
        return comps[i].lo + (u - cum[i])

    candidates = {0.0, total - need}
    for p in gap_pos:
        candidates.add(p)
        candidates.add(p - need)
    best_u, best_len = None, math.inf
    for u in sorted(candidates):
        if u < -1e-12 or u > total - need + 1e-12:
            continue
        u = min(max(u, 0.0), total - need)
        a, b = to_real_right(u), to_real_left(u + need)
        if b - a < best_len - 1e-15:
            best_u, best_len = u, b - a
    a, b = to_real_right(best_u), to_real_left(best_u + need)
    return Interval(a, b)


@dataclass(frozen=True)
class LengthResult:
    """Optimal value and a feasible witness for the length functional."""

    value: float
    witness: tuple[Interval, ...]

    def to_json(self) -> dict:
        return {"value": self.value, "witness": [iv.to_json() for iv in self.witness]}


def length_n_eps(mu: ProbMeasure, n: int, eps: float) -> LengthResult:
    """Least total length of <= n closed intervals with mu-mass >= 1 - eps.

    Exact for atomic measures (Pareto dynamic program over runs of
    consecutive atoms) and for uniform measures with <= 14 support components
    (block-structure enumeration; above that a greedy labeling gives a
    certified upper bound).  The uniform witness is trimmed with a 1e-9*eps
    relative margin so its recomputed mass clears 1 - eps in floats.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if isinstance(mu, AtomicMeasure):
        result = _length_atomic(mu, n, eps)
    else:
        result = _length_uniform(mu, n, eps)
        floor = (1.0 - eps) * mu.support.measure
        if result.value < floor - 1e-12 * max(1.0, floor):
            raise AssertionError("uniform length below the (1-eps)|K| floor")
    got = mass(mu, normalize(list(result.witness)))
    if got < 1.0 - eps:
        raise AssertionError("length_n_eps witness fails its mass constraint")
    return result


def _length_atomic(mu: AtomicMeasure, n: int, eps: float) -> LengthResult:
    xs = [x for x, _ in mu.atoms]
    ws = [w for _, w in mu.atoms]
    m = len(xs)
    target = 1.0 - eps
    # Entries: (mass, length, runs) where runs is a tuple of (first, last)
    # atom-index pairs.  States keyed by (intervals used, run currently open).
    states: dict[tuple[int, bool], list[tuple[float, float, tuple]]] = {
        (0, False): [(0.0, 0.0, ())]
    }
    for i in range(m):
        nxt: dict[tuple[int, bool], list[tuple[float, float, tuple]]] = {}

        def push(key, entry):
            nxt.setdefault(key, []).append(entry)

        for (k, is_open), entries in states.items():
            for massv, length, runs in entries:
                if is_open:
                    a, b = runs[-1]
                    push(
                        (k, True),
                        (massv + ws[i], length + xs[i] - xs[b], runs[:-1] + ((a, i),)),
                    )
                    push((k, False), (massv, length, runs))
                    if k < n:  # close and immediately start a fresh run here
                        push((k + 1, True), (massv + ws[i], length, runs + ((i, i),)))
                else:
                    push((k, False), (massv, length, runs))
                    if k < n:
                        push((k + 1, True), (massv + ws[i], length, runs + ((i, i),)))
        states = {key: _pareto(entries) for key, entries in nxt.items()}
    final: list[tuple[float, float, tuple]] = []
    for entries in states.values():
        final.extend(entries)
    final = _pareto(final)
    candidates = sorted(final, key=lambda e: (e[1], tuple(e[2])))
    for _, length, runs in candidates:
        witness = tuple(Interval(xs[a], xs[b]) for a, b in runs)
        if not witness:
            continue
        if mass(mu, normalize(list(witness))) >= target:
            return LengthResult(length, witness)
    raise AssertionError("atomic length DP found no feasible cover")


def _pareto(entries: list[tuple[float, float, tuple]]) -> list[tuple[float, float, tuple]]:
    """Keep entries not dominated in (mass up, length down)."""
    entries = sorted(entries, key=lambda e: (e[1], -e[0], e[2]))
    kept: list[tuple[float, float, tuple]] = []
    best_mass = -1.0
    for e in entries:
        if e[0] > best_mass:
            kept.append(e)
            best_mass = e[0]
    return kept


def _length_uniform(mu: UniformMeasure, n: int, eps: float) -> LengthResult:
    comps = mu.support.parts
    p = len(comps)
    total = mu.support.measure
    gaps = [b.lo - a.hi for a, b in zip(comps, comps[1:])]
    comp_len = [c.length for c in comps]
    eps_eff = eps * (1.0 - 1e-9)
    budget = eps_eff * total

    best: tuple[float, tuple[tuple[int, int], ...]] | None = None
    for runs in _candidate_runs(p, n, gaps):
        covered = sum(comp_len[i] for a, b in runs for i in range(a, b + 1))
        excluded = total - covered
        if excluded > budget:
            continue
        swallowed = sum(sum(gaps[a:b]) for a, b in runs)
        value = (1.0 - eps_eff) * total + swallowed
        if best is None or value < best[0]:
            best = (value, runs)
    if best is None:
        raise AssertionError("no feasible uniform cover found")
    _, runs = best
    covered = sum(comp_len[i] for a, b in runs for i in range(a, b + 1))
    trim = budget - (total - covered)
    witness = _trim_windows(comps, runs, trim)
    value = sum(iv.length for iv in witness)
    return LengthResult(value, witness)


def _candidate_runs(
    p: int, n: int, gaps: list[float]
) -> list[tuple[tuple[int, int], ...]]:
    """Ways to choose k <= min(n, p) disjoint runs of component indices.

    Exhaustive for p <= 12 via the standard bijection with 2k-subsets of
    [0, p + k): runs may be adjacent (a split exactly at a gap).  Beyond
    that, a single greedy candidate: cover every component and split at the
    longest min(n, p) - 1 gaps, which is a certified upper bound.
    """
    kmax = min(n, p)
    if p <= 12:
        out = []
        for k in range(1, kmax + 1):
            for xs in itertools.combinations(range(p + k), 2 * k):
                out.append(
                    tuple(
                        (xs[2 * i] - i, xs[2 * i + 1] - i - 1) for i in range(k)
                    )
                )
        return out
    split_after = sorted(
        sorted(range(p - 1), key=lambda i: -gaps[i])[: kmax - 1]
    )
    runs = []
    start = 0
    for cut in split_after:
        runs.append((start, cut))
        start = cut + 1
    runs.append((start, p - 1))
    return [tuple(runs)]


def _trim_windows(
    comps: tuple[Interval, ...],
    runs: tuple[tuple[int, int], ...],
    trim: float,
) -> tuple[Interval, ...]:
    """Shave `trim` worth of covered component length off window left edges."""
    windows: list[Interval] = []
    r = max(trim, 0.0)
    for a, b in runs:
        lo, hi = comps[a].lo, comps[b].hi
        i = a
        while r > 0.0 and i <= b:
            seg_lo = max(lo, comps[i].lo)
            seg_len = comps[i].hi - seg_lo
            if r < seg_len:
                lo = seg_lo + r
                r = 0.0
            else:
                r -= seg_len
                lo = comps[i + 1].lo if i < b else hi
            i += 1
        if hi > lo:
            windows.append(Interval(lo, hi))
    if not windows:  # eps ~ 1 corner: keep a point so the witness is nonempty
        windows.append(Interval(comps[-1].hi, comps[-1].hi))
    return tuple(windows)
