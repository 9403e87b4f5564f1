"""Brute-force ground truth: worst-ratio certification over the coefficient sphere.

Certified constants are empirical sphere minima (upper bounds on the true
minimal ratio): uniform sampling of unit coefficient vectors in the monomial
basis of the hull rescaled to [0, 1], followed by Nelder-Mead polish of the
best starts in projective coordinates.  Everything is deterministic given a
seed.  Batched helpers (companion-matrix eigenvalues) make 1e4-size
validation sweeps cheap; they are the independent route against the scalar
bisection machinery in peano.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from ._rng import philox
from .measure import AtomicMeasure, ProbMeasure, UniformMeasure, measure_from_json
from .peano import Polynomial, affine_substitute, polyder, polyint, polyval, poly_sup
from .realset import Interval, RealSet

# ---------------------------------------------------------------------------
# batched polynomial machinery (coeff arrays are ascending, shape (N, d+1))


def batch_eval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate N polynomials at M points -> (N, M)."""
    powers = x[None, :] ** np.arange(coeffs.shape[1])[:, None]
    return coeffs @ powers


def batch_derivative(coeffs: np.ndarray, order: int = 1) -> np.ndarray:
    c = coeffs
    for _ in range(order):
        if c.shape[1] <= 1:
            return np.zeros((c.shape[0], 1))
        c = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
    return c


def batch_real_roots(coeffs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Real roots inside [lo, hi], padded with `hi` -> (N, d) sorted rows.

    Rows are grouped by effective degree so companion matrices stay square;
    eigenvalues with relative imaginary part below 1e-9 count as real.
    """
    n, width = coeffs.shape
    d = width - 1
    out = np.full((n, max(d, 1)), hi, dtype=float)
    if d < 1:
        return out
    scale = np.max(np.abs(coeffs), axis=1)
    scale[scale == 0.0] = 1.0
    eff_deg = np.zeros(n, dtype=int)
    for k in range(d, 0, -1):
        mask = (eff_deg == 0) & (np.abs(coeffs[:, k]) > 1e-13 * scale)
        eff_deg[mask] = k
    for k in range(1, d + 1):
        rows = np.where(eff_deg == k)[0]
        if len(rows) == 0:
            continue
        if k == 1:
            r = -coeffs[rows, 0] / coeffs[rows, 1]
            good = (r >= lo) & (r <= hi)
            out[rows[good], 0] = r[good]
            continue
        comp = np.zeros((len(rows), k, k))
        comp[:, 1:, :-1] = np.eye(k - 1)[None, :, :]
        comp[:, :, -1] = -coeffs[rows, :k] / coeffs[rows, k][:, None]
        ev = np.linalg.eigvals(comp)
        real = np.abs(ev.imag) <= 1e-9 * (1.0 + np.abs(ev.real))
        vals = np.where(real, ev.real, np.inf)
        vals = np.where((vals >= lo) & (vals <= hi), vals, hi)
        vals.sort(axis=1)
        out[rows, :k] = vals
    out.sort(axis=1)
    return out


def batch_abs_integral_interval(coeffs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Exact integral of |p| over [lo, hi] for each row -> (N,)."""
    if hi <= lo:
        return np.zeros(coeffs.shape[0])
    roots = batch_real_roots(coeffs, lo, hi)
    breaks = np.concatenate(
        [np.full((coeffs.shape[0], 1), lo), roots, np.full((coeffs.shape[0], 1), hi)],
        axis=1,
    )
    anti = np.concatenate(
        [np.zeros((coeffs.shape[0], 1)), coeffs / np.arange(1, coeffs.shape[1] + 1)],
        axis=1,
    )
    powers = breaks[:, None, :] ** np.arange(anti.shape[1])[None, :, None]
    vals = np.einsum("nd,ndm->nm", anti, powers)
    return np.abs(np.diff(vals, axis=1)).sum(axis=1)


def batch_abs_integral_set(coeffs: np.ndarray, s: RealSet) -> np.ndarray:
    total = np.zeros(coeffs.shape[0])
    for part in s.parts:
        total += batch_abs_integral_interval(coeffs, part.lo, part.hi)
    return total


def batch_abs_integral_measure(coeffs: np.ndarray, mu: ProbMeasure) -> np.ndarray:
    """integral of |p| dmu for each row -> (N,)."""
    if isinstance(mu, UniformMeasure):
        return batch_abs_integral_set(coeffs, mu.support) / mu.support.measure
    vals = np.abs(batch_eval(coeffs, mu.points))
    return vals @ mu.weights


def batch_sup_abs_interval(coeffs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """sup of |p| over [lo, hi] for each row -> (N,)."""
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return np.abs(batch_eval(coeffs, np.array([lo])))[:, 0]
    crit = batch_real_roots(batch_derivative(coeffs), lo, hi)
    pts = np.concatenate(
        [np.full((coeffs.shape[0], 1), lo), crit, np.full((coeffs.shape[0], 1), hi)],
        axis=1,
    )
    powers = pts[:, None, :] ** np.arange(coeffs.shape[1])[None, :, None]
    vals = np.abs(np.einsum("nd,ndm->nm", coeffs, powers))
    return vals.max(axis=1)


def batch_sup_abs_set(coeffs: np.ndarray, s: RealSet) -> np.ndarray:
    best = np.zeros(coeffs.shape[0])
    for part in s.parts:
        best = np.maximum(best, batch_sup_abs_interval(coeffs, part.lo, part.hi))
    return best


# ---------------------------------------------------------------------------
# scalar exact integration (certify numerator path)


def integral_abs_measure(p: Polynomial, mu: ProbMeasure) -> float:
    """Exact scalar integral of |p| dmu."""
    return float(
        batch_abs_integral_measure(np.asarray(p.coeffs, dtype=float)[None, :], mu)[0]
    )


def integral_abs_set(p: Polynomial, s: RealSet) -> float:
    return float(batch_abs_integral_set(np.asarray(p.coeffs)[None, :], s)[0])


# ---------------------------------------------------------------------------
# ratio problems


@dataclass(frozen=True)
class RatioProblem:
    """min over unit-sphere p of  [int_K |p| dmu] / [|K|^{j+1} sup_region |p^{(j)}|]."""

    K: RealSet
    mu: ProbMeasure
    region: RealSet
    n: int
    j: int

    def __post_init__(self) -> None:
        if not (0 <= self.j <= self.n):
            raise ValueError("need 0 <= j <= n")
        hull = self.K.hull
        rh = self.region.hull
        if rh.lo < hull.lo - 1e-12 or rh.hi > hull.hi + 1e-12:
            raise ValueError("region must sit inside the hull of K")

    def to_json(self) -> dict:
        return {
            "K": self.K.to_json(),
            "mu": self.mu.to_json(),
            "region": self.region.to_json(),
            "n": self.n,
            "j": self.j,
        }

    @staticmethod
    def from_json(obj: dict) -> "RatioProblem":
        return RatioProblem(
            RealSet.from_json(obj["K"]),
            measure_from_json(obj["mu"]),
            RealSet.from_json(obj["region"]),
            int(obj["n"]),
            int(obj["j"]),
        )


@dataclass(frozen=True)
class RatioResult:
    min_ratio: float
    witness: Polynomial
    samples: int
    seed: int
    refine_steps: int

    def to_json(self) -> dict:
        return {
            "min_ratio": self.min_ratio,
            "witness_coeffs": self.witness.to_json(),
            "samples": self.samples,
            "seed": self.seed,
            "refine_steps": self.refine_steps,
        }


class DegenerateDenominatorError(ValueError):
    """The ratio denominator vanished for every sampled polynomial."""


def sphere_coeffs(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    c = rng.standard_normal((count, dim))
    norms = np.linalg.norm(c, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return c / norms


def _u_basis_to_t(coeffs_u: np.ndarray, hull: Interval) -> np.ndarray:
    """Coefficients sampled in u = (t - lo)/w, converted to the t monomial basis."""
    w = hull.length if hull.length > 0.0 else 1.0
    out = np.zeros_like(coeffs_u)
    for i in range(coeffs_u.shape[0]):
        out[i] = affine_substitute(coeffs_u[i], 1.0 / w, -hull.lo / w)
    return out


def minimize_poly_ratio(
    num_fn: Callable[[np.ndarray], np.ndarray],
    den_fn: Callable[[np.ndarray], np.ndarray],
    degree: int,
    hull: Interval,
    budget: int,
    seed: int,
    polish_starts: int = 10,
) -> tuple[float, np.ndarray, int]:
    """Sphere search + Nelder-Mead polish over a generic polynomial ratio.

    num_fn/den_fn map (N, degree+1) t-basis coefficient batches to (N,)
    values.  Returns (min ratio, t-basis witness coefficients, polish steps).
    Degenerate samples (tiny denominator) are skipped; if every sample
    degenerates, DegenerateDenominatorError is raised.
    """
    rng = philox(seed, 11)
    cu = sphere_coeffs(rng, budget, degree + 1)
    ct = _u_basis_to_t(cu, hull)
    num = num_fn(ct)
    den = den_fn(ct)
    floor = 1e-13 * max(float(np.max(den)), 1e-300)
    ratios = np.where(den > floor, num / np.maximum(den, floor), np.inf)
    if not np.any(np.isfinite(ratios)):
        raise DegenerateDenominatorError("denominator vanished on every sample")
    order = np.argsort(ratios, kind="stable")
    best_ratio = float(ratios[order[0]])
    best_u = cu[order[0]].copy()
    steps = 0

    def objective_for(fixed_idx: int, sign: float) -> Callable[[np.ndarray], float]:
        def obj(z: np.ndarray) -> float:
            full = np.insert(z, fixed_idx, sign)
            nrm = np.linalg.norm(full)
            if not np.isfinite(nrm) or nrm == 0.0:
                return np.inf
            ct1 = _u_basis_to_t((full / nrm)[None, :], hull)
            nv = float(num_fn(ct1)[0])
            dv = float(den_fn(ct1)[0])
            if dv <= floor:
                return np.inf
            return nv / dv

        return obj

    if degree == 0:  # single projective coordinate: nothing to polish
        return best_ratio, _u_basis_to_t(best_u[None, :], hull)[0], 0
    polished = 0
    for idx in order[: min(polish_starts, budget)]:
        # a start far above the already-polished minimum cannot realistically
        # descend below it; skipping keeps the polish cost near two NM runs
        if polished >= 2 and ratios[idx] > 1.25 * best_ratio + 1e-12:
            continue
        start = cu[idx]
        fixed = int(np.argmax(np.abs(start)))
        sign = math.copysign(1.0, start[fixed])
        z0 = np.delete(start / abs(start[fixed]), fixed)
        res = optimize.minimize(
            objective_for(fixed, sign),
            z0,
            method="Nelder-Mead",
            options={
                "xatol": 1e-10,
                "fatol": 1e-14,
                "maxiter": 500,
                "maxfev": 800,
            },
        )
        steps += int(res.nit)
        polished += 1
        if np.isfinite(res.fun) and res.fun < best_ratio:
            best_ratio = float(res.fun)
            full = np.insert(res.x, fixed, sign)
            best_u = full / np.linalg.norm(full)
    witness_t = _u_basis_to_t(best_u[None, :], hull)[0]
    nv = float(num_fn(witness_t[None, :])[0])
    dv = float(den_fn(witness_t[None, :])[0])
    final = nv / dv if dv > floor else best_ratio
    return min(best_ratio, final), witness_t, steps


def certify_ratio(prob: RatioProblem, budget: int = 2000, seed: int = 0) -> RatioResult:
    """Certified (empirical) minimum of the problem ratio over the sphere.

    Numerator: exact piecewise integration of |p| dmu.  Denominator:
    |K|^{j+1} times poly_sup over each region component.
    """
    if budget < 1000:
        raise ValueError("budget must be at least 1000")
    ksz = prob.K.measure
    scale = ksz ** (prob.j + 1)

    def num_fn(ct: np.ndarray) -> np.ndarray:
        return batch_abs_integral_measure(ct, prob.mu)

    def den_fn(ct: np.ndarray) -> np.ndarray:
        out = np.zeros(ct.shape[0])
        for i in range(ct.shape[0]):
            p = Polynomial(tuple(ct[i]))
            out[i] = max(
                poly_sup(p, part.lo, part.hi, prob.j)[0] for part in prob.region.parts
            )
        return scale * out

    ratio, witness_t, steps = minimize_poly_ratio(
        num_fn, den_fn, prob.n, prob.K.hull, budget, seed
    )
    return RatioResult(ratio, Polynomial(tuple(witness_t)), budget, seed, steps)


# ---------------------------------------------------------------------------
# certificate validation


@dataclass(frozen=True)
class ValidationReport:
    trials: int
    violations: int
    min_slack: float
    worst: Polynomial | None
    negative_control_violations: int = 0

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "worst_coeffs": None if self.worst is None else self.worst.to_json(),
            "negative_control_violations": self.negative_control_violations,
        }


def validate_inequality(cert, trials: int, seed: int = 0) -> ValidationReport:
    """Check a certificate's inequality on fresh sphere polynomials.

    The certificate's own witness polynomial is always trial zero, so an
    artificially inflated constant is caught deterministically.  Violation
    means slack = lhs - rhs < -1e-9 for some j in the certificate's range.
    """
    from .bounds import certificate_sides  # deferred: bounds imports oracle

    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if trials == 0:
        return ValidationReport(0, 0, math.inf, None)
    rng = philox(seed, 17)
    hull = cert.K.hull
    ct = _u_basis_to_t(sphere_coeffs(rng, trials, cert.n + 1), hull)
    if cert.oracle_meta.witness is not None:
        w = np.zeros(cert.n + 1)
        wc = np.asarray(cert.oracle_meta.witness.coeffs)[: cert.n + 1]
        w[: len(wc)] = wc
        ct[0] = w  # witness is stored in the t basis already
    lhs, rhs = certificate_sides(cert, ct)
    slack = lhs[:, None] - rhs
    min_slack = float(slack.min())
    violations = int(np.sum(np.any(slack < -1e-9, axis=1)))
    worst = None
    if violations or trials:
        i = int(np.unravel_index(np.argmin(slack), slack.shape)[0])
        worst = Polynomial(tuple(ct[i]))
    return ValidationReport(trials, violations, min_slack, worst)


# ---------------------------------------------------------------------------
# eps = 0 failure search


@dataclass(frozen=True)
class CounterexampleRow:
    m: int
    best_eps0_constant: float
    pipeline_constant: float


@dataclass(frozen=True)
class CounterexampleReport:
    n: int
    rows: tuple[CounterexampleRow, ...]
    strictly_decreasing: bool
    pipeline_floor: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rows": [
                {
                    "m": r.m,
                    "best_eps0_constant": r.best_eps0_constant,
                    "pipeline_constant": r.pipeline_constant,
                }
                for r in self.rows
            ],
            "strictly_decreasing": self.strictly_decreasing,
            "pipeline_floor": self.pipeline_floor,
        }


def counterexample_family(m: int) -> RealSet:
    """Three components: two length-omega end caps and a sqrt(omega) middle bar."""
    w = 4.0 ** -(m + 1)
    bar = 2.0 ** -(m + 1)
    return RealSet(
        (
            Interval(0.0, w),
            Interval(0.5 - bar / 2.0, 0.5 + bar / 2.0),
            Interval(1.0 - w, 1.0),
        )
    )


def _eps0_candidate_intervals(k: RealSet, n: int) -> list[Interval]:
    """Intervals with |K cap I| >= |K|/n (exactly, up to 1e-12)."""
    pts: list[float] = []
    for part in k.parts:
        pts.extend([part.lo, part.hi])
        if part.length > 0.0:
            for q in (0.25, 0.5, 0.75):
                pts.append(part.lo + q * part.length)
    pts = sorted(set(pts))
    need = k.measure / n - 1e-12
    out = []
    for i, a in enumerate(pts):
        for b in pts[i:]:
            if k.intersect_interval(Interval(a, b)).measure >= need:
                out.append(Interval(a, b))
    return out


def search_counterexample(
    n: int, family_size: int, seed: int = 0, budget: int = 1000, eps: float = 0.25
) -> CounterexampleReport:
    """Empirical decay of the best eps=0 constant along the family.

    For each family member every candidate interval capturing measure
    |K|/n at eps = 0 is certified; the best (largest) constant is reported
    next to the eps>0 pipeline constant on the same set.  The family is
    ours; no claim is made that it matches any previously known one.
    """
    from .bounds import theorem0_pipeline  # deferred: bounds imports oracle

    if n < 1:
        raise ValueError("n must be positive")
    rows = []
    for m in range(1, family_size + 1):
        k = counterexample_family(m)
        ksz = k.measure
        best = 0.0
        for iv in _eps0_candidate_intervals(k, n):
            cs = []
            for j in range(n + 1):
                prob = RatioProblem(k, UniformMeasure(k), RealSet((iv,)), n, j)
                cs.append(ksz * certify_ratio(prob, budget, seed).min_ratio)
            best = max(best, min(cs))
        pipe = theorem0_pipeline(k, n, eps, budget=budget, seed=seed)
        rows.append(CounterexampleRow(m, best, pipe.constant))
    decreasing = all(
        b.best_eps0_constant < a.best_eps0_constant for a, b in zip(rows, rows[1:])
    )
    floor = min((r.pipeline_constant for r in rows), default=0.0)
    return CounterexampleReport(n, tuple(rows), decreasing, floor)
