"""Main integral lower bounds: explicit-constant form, the n-component set E,
the heavy interval I', the end-to-end uniform-measure pipeline, and the
re-centering inequality.

Constants that the underlying results leave existential are certified
empirically by the oracle module (sphere minima with Nelder-Mead polish) and
shipped inside Certificate values together with the data needed to re-run
validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .children import MCBudget, children_tree, ell_n
from .measure import (
    AtomicMeasure,
    ProbMeasure,
    UniformMeasure,
    length_n_eps,
    mass,
    mass_interval,
    measure_from_json,
    restrict,
    shortest_mass_interval,
    support_hull,
    support_set,
)
from .oracle import (
    RatioProblem,
    batch_abs_integral_measure,
    batch_derivative,
    batch_sup_abs_set,
    certify_ratio,
    integral_abs_measure,
    minimize_poly_ratio,
    sphere_coeffs,
)
from ._rng import philox
from .peano import (
    Polynomial,
    affine_substitute,
    polyder,
    polyval,
    poly_inf_abs,
    poly_sup,
    real_roots_bisection,
)
from .realset import Interval, RealSet, k_epsilon, normalize


@dataclass(frozen=True)
class PolyTypeWitness:
    """A polynomial whose n-th derivative keeps one sign on the hull.

    constant_C bounds sup_hull |f^(n)| by C * inf_{K_eps} |f^(n)|.
    """

    f: Polynomial
    n: int
    constant_C: float
    sign: int


def poly_range(p: Polynomial, lo: float, hi: float) -> tuple[float, float]:
    """Signed (min, max) of p over [lo, hi]."""
    if hi < lo:
        raise ValueError("empty interval")
    pts = [lo, hi] + real_roots_bisection(polyder(p.coeffs), lo, hi)
    vals = [float(polyval(p.coeffs, x)) for x in pts]
    return min(vals), max(vals)


def poly_type_witness(
    f: Polynomial, n: int, K: RealSet, hull: Interval, eps: float
) -> PolyTypeWitness:
    """Validate sign-constancy of f^(n) on the hull and compute the constant C."""
    g = f.derivative(n)
    if g.is_zero:
        return PolyTypeWitness(f, n, 1.0, 1)
    gmin, gmax = poly_range(g, hull.lo, hull.hi)
    scale = max(abs(gmin), abs(gmax))
    if gmin < -1e-12 * scale and gmax > 1e-12 * scale:
        raise ValueError("f^(n) changes sign on the hull")
    sign = 1 if gmax > 0.0 else -1
    sup = poly_sup(f, hull.lo, hull.hi, n)[0]
    keps = k_epsilon(K, hull, eps)
    inf = poly_inf_abs(f, keps.parts, n)
    if inf <= 0.0:
        if sup <= 0.0:
            return PolyTypeWitness(f, n, 1.0, sign)
        raise ValueError("f^(n) vanishes on K_eps: no finite constant")
    return PolyTypeWitness(f, n, sup / inf, sign)


def theorem1_bound(
    mu: ProbMeasure,
    K: RealSet,
    n: int,
    eps: float,
    witness: PolyTypeWitness,
    budget: MCBudget | None = None,
) -> tuple[float, float]:
    """Sides of the explicit-constant bound: returns (lhs, rhs) with lhs >= rhs.

    lhs is the exact integral of |f| dmu, rhs is ell_n^n / (n+1)! times the
    infimum of |f^(n)| over the hull of K.
    """
    if witness.n != n:
        raise ValueError("witness order does not match n")
    f = witness.f
    lhs = integral_abs_measure(f, mu)
    ell = ell_n(mu, n, budget)
    hull = K.hull
    inf_d = poly_inf_abs(f, [hull], n)
    rhs = ell.value**n / math.factorial(n + 1) * inf_d
    return lhs, rhs


def theorem1_keps_sides(
    mu: ProbMeasure,
    K: RealSet,
    n: int,
    eps: float,
    witness: PolyTypeWitness,
    ell_value: float,
) -> tuple[float, float]:
    """(lhs, core) for the sharper form lhs >= c * core with
    core = ell^n * inf over K_eps of |f^(n)|."""
    f = witness.f
    lhs = integral_abs_measure(f, mu)
    keps = k_epsilon(K, K.hull, eps)
    core = ell_value**n * poly_inf_abs(f, keps.parts, n)
    return lhs, core


@dataclass(frozen=True)
class OracleMeta:
    samples: int
    seed: int
    witness: Polynomial | None
    refine_steps: int = 0
    constants_by_j: tuple[tuple[int, float], ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "witness_coeffs": None if self.witness is None else self.witness.to_json(),
            "refine_steps": self.refine_steps,
            "constants_by_j": [[j, c] for j, c in self.constants_by_j],
        }


@dataclass(frozen=True)
class Certificate:
    """A region, a j-range, and an empirically certified constant.

    Carries the problem data (mu, K, n, eps and auxiliary scalars) so that
    `oracle.validate_inequality` can re-check the claim from the JSON alone.
    """

    kind: str  # theorem0 | theorem1 | theorem2 | corollary
    region: RealSet
    j_range: tuple[int, ...]
    constant: float
    oracle_meta: OracleMeta
    K: RealSet
    mu: ProbMeasure
    n: int
    eps: float
    ell_value: float | None = None
    lnorm_value: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("theorem0", "theorem1", "theorem2", "corollary"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if self.constant <= 0.0:
            raise ValueError("certificate constant must be positive")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "region": self.region.to_json(),
            "j": list(self.j_range),
            "constant": self.constant,
            "oracle": self.oracle_meta.to_json(),
            "K": self.K.to_json(),
            "mu": self.mu.to_json(),
            "n": self.n,
            "eps": self.eps,
            "ell": self.ell_value,
            "lnorm": self.lnorm_value,
        }

    @staticmethod
    def from_json(obj: dict) -> "Certificate":
        om = obj.get("oracle", {})
        witness = om.get("witness_coeffs")
        meta = OracleMeta(
            int(om.get("samples", 0)),
            int(om.get("seed", 0)),
            None if witness is None else Polynomial(tuple(witness)),
            int(om.get("refine_steps", 0)),
            tuple((int(j), float(c)) for j, c in om.get("constants_by_j", [])),
        )
        return Certificate(
            obj["kind"],
            RealSet.from_json(obj["region"]),
            tuple(int(j) for j in obj["j"]),
            float(obj["constant"]),
            meta,
            RealSet.from_json(obj["K"]),
            measure_from_json(obj["mu"]),
            int(obj["n"]),
            float(obj["eps"]),
            obj.get("ell"),
            obj.get("lnorm"),
        )


def certificate_sides(cert: Certificate, ct: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(lhs, rhs-per-j) of the certificate inequality for a coefficient batch."""
    if cert.kind == "theorem0":
        ksz = cert.K.measure
        lhs = ksz * batch_abs_integral_measure(ct, cert.mu)
        rhs = np.stack(
            [
                cert.constant
                * ksz ** (j + 1)
                * batch_sup_abs_set(batch_derivative(ct, j), cert.region)
                for j in cert.j_range
            ],
            axis=1,
        )
        return lhs, rhs
    if cert.kind == "theorem2":
        lhs = batch_abs_integral_measure(ct, cert.mu)
        rhs = cert.constant * batch_sup_abs_set(ct, cert.region)[:, None]
        return lhs, rhs
    if cert.kind == "corollary":
        lhs = batch_abs_integral_measure(ct, cert.mu)
        iv = cert.region.parts[0]
        lnorm = cert.lnorm_value if cert.lnorm_value is not None else iv.length
        rhs = np.stack(
            [
                cert.constant
                * min(iv.length, lnorm) ** j
                * batch_sup_abs_set(batch_derivative(ct, j), cert.region)
                for j in cert.j_range
            ],
            axis=1,
        )
        return lhs, rhs
    if cert.kind == "theorem1":
        lhs = batch_abs_integral_measure(ct, cert.mu)
        nfact = math.factorial(cert.n)
        lead = np.zeros(ct.shape[0])
        if ct.shape[1] > cert.n:
            lead = np.abs(ct[:, cert.n]) * nfact
        ell = cert.ell_value or 0.0
        rhs = (cert.constant * ell**cert.n * lead)[:, None]
        return lhs, rhs
    raise ValueError(f"unknown certificate kind {cert.kind!r}")


# ---------------------------------------------------------------------------
# gap closing


def _merge_clusters(clusters: list[Interval], n: int) -> list[Interval]:
    """Merge interval clusters until at most n remain.

    One merge step: over each window of n+1 consecutive clusters (midpoint
    representatives), the interior index maximizing the omitted-point
    Vandermonde marks its shorter adjacent gap; the globally shortest marked
    gap is absorbed.
    """
    clusters = sorted(clusters, key=lambda c: (c.lo, c.hi))
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1 and len(clusters) > 1:
        return [Interval(clusters[0].lo, clusters[-1].hi)]
    while len(clusters) > n:
        best: tuple[float, int] | None = None  # (gap length, left index)
        for w in range(len(clusters) - n):
            window = clusters[w : w + n + 1]
            reps = [c.mid for c in window]
            kbest, vbest = None, -math.inf
            for k in range(1, n):
                rest = reps[:k] + reps[k + 1 :]
                v = abs(_vandermonde(rest))
                if v > vbest:
                    kbest, vbest = k, v
            gap_l = window[kbest].lo - window[kbest - 1].hi
            gap_r = window[kbest + 1].lo - window[kbest].hi
            if gap_l <= gap_r:
                cand = (gap_l, w + kbest - 1)
            else:
                cand = (gap_r, w + kbest)
            if best is None or cand < best:
                best = cand
        _, i = best
        clusters[i : i + 2] = [Interval(clusters[i].lo, clusters[i + 1].hi)]
    return clusters


def _vandermonde(points: list[float]) -> float:
    out = 1.0
    for j in range(len(points)):
        for i in range(j):
            out *= points[j] - points[i]
    return out


def close_gaps(points: list[float], n: int) -> RealSet:
    """A closed set with <= n components containing all points such that
    sup over it of |f| <= (n+1) 2^n max_j |f(t_j)| for every degree <= n
    polynomial with sign-constant n-th derivative."""
    if not points:
        raise ValueError("need at least one point")
    pts = sorted(points)
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("points must be distinct")
    clusters = [Interval(p, p) for p in pts]
    return RealSet(tuple(_merge_clusters(clusters, n)))


# ---------------------------------------------------------------------------
# theorem pipelines


def _build_e_set(
    mu: ProbMeasure, K: RealSet, n: int, eps: float, mc: MCBudget | None
) -> RealSet:
    """The <= n component set E of mass >= 1 - eps via the children tree."""
    if isinstance(mu, AtomicMeasure) and len(mu.atoms) <= n:
        return support_set(mu)
    eps_prime = 1.0 - (1.0 - eps) ** (1.0 / n)
    tree = children_tree(mu, n, eps_prime, mc)
    leaves = [leaf.interval for leaf in tree.leaves() if leaf.interval is not None]
    e0 = normalize(leaves)
    merged = _merge_clusters(list(e0.parts), n)
    e = RealSet(tuple(merged))
    if mass(mu, e) < 1.0 - eps - 1e-9:
        raise AssertionError("E lost mass during gap closing")
    return e


def _select_iprime(mu: ProbMeasure, e: RealSet, n: int, eps: float) -> Interval:
    """The certified interval: E's heaviest component, shrunk to the shortest
    subinterval still carrying (1-eps)/n mass.

    Shrinking can only increase the certified constant (monotone
    consistency) and is what keeps the eps > 0 pipeline bounded away from
    zero on the eps = 0 failure family.
    """
    need = (1.0 - eps) / n
    masses = [mass_interval(mu, c) for c in e.parts]
    i_best = max(range(len(masses)), key=lambda i: (masses[i], -i))
    comp = e.parts[i_best]
    comp_mass = masses[i_best]
    if comp_mass < need - 1e-9:
        raise AssertionError("pigeonhole failed: no component holds (1-eps)/n mass")
    if comp_mass <= need or comp.length == 0.0:
        return comp
    sub = restrict(mu, comp)
    iv = shortest_mass_interval(sub, min(need / comp_mass, 1.0))
    if mass_interval(mu, iv) < need - 1e-9:
        return comp
    return iv


def theorem2_set(
    mu: ProbMeasure,
    K: RealSet,
    n: int,
    eps: float,
    budget: int = 2000,
    seed: int = 0,
    mc: MCBudget | None = None,
) -> Certificate:
    """Certificate for: integral |f| dmu >= c * C^{-1} * sup_E |f|.

    E has at most n components and mu(E) >= 1 - eps; atomic measures on
    <= n points short-circuit to E = the support itself.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must be in (0, 1)")
    e = _build_e_set(mu, K, n, eps, mc)

    def num_fn(ct: np.ndarray) -> np.ndarray:
        return batch_abs_integral_measure(ct, mu)

    def den_fn(ct: np.ndarray) -> np.ndarray:
        return batch_sup_abs_set(ct, e)

    ratio, wit, steps = minimize_poly_ratio(
        num_fn, den_fn, n, support_hull(mu), budget, seed
    )
    meta = OracleMeta(budget, seed, Polynomial(tuple(wit)), steps)
    return Certificate("theorem2", e, (0,), ratio, meta, K, mu, n, eps)


def corollary_interval(
    mu: ProbMeasure,
    K: RealSet,
    n: int,
    eps: float,
    budget: int = 2000,
    seed: int = 0,
    mc: MCBudget | None = None,
) -> Certificate:
    """Certificate on the heaviest component I' of E (mass >= (1-eps)/n):
    integral |f| dmu >= c * min(|I'|^j, |mu|_{n,eps}^j) * sup_{I'} |f^(j)|."""
    e = _build_e_set(mu, K, n, eps, mc)
    iprime = _select_iprime(mu, e, n, eps)
    lnorm = length_n_eps(mu, n, eps).value
    region = RealSet((iprime,))

    def num_fn(ct: np.ndarray) -> np.ndarray:
        return batch_abs_integral_measure(ct, mu)

    consts: list[tuple[int, float]] = []
    worst: tuple[float, np.ndarray] | None = None
    steps_total = 0
    for j in range(n + 1):
        factor = min(iprime.length, lnorm) ** j
        if factor == 0.0 and j > 0:
            # point interval: the right-hand side vanishes identically and
            # the inequality is trivial at this j
            consts.append((j, math.inf))
            continue

        def den_fn(ct: np.ndarray, _j=j, _f=factor) -> np.ndarray:
            return _f * batch_sup_abs_set(batch_derivative(ct, _j), region)

        ratio, wit, steps = minimize_poly_ratio(
            num_fn, den_fn, n, support_hull(mu), budget, seed + j
        )
        steps_total += steps
        consts.append((j, ratio))
        if worst is None or ratio < worst[0]:
            worst = (ratio, wit)
    constant = min(c for _, c in consts if math.isfinite(c))
    meta = OracleMeta(
        budget,
        seed,
        Polynomial(tuple(worst[1])),
        steps_total,
        tuple((j, c) for j, c in consts if math.isfinite(c)),
    )
    return Certificate(
        "corollary",
        region,
        tuple(range(n + 1)),
        constant,
        meta,
        K,
        mu,
        n,
        eps,
        lnorm_value=lnorm,
    )


def theorem0_pipeline(
    K: RealSet,
    n: int,
    eps: float,
    budget: int = 2000,
    seed: int = 0,
    mc: MCBudget | None = None,
) -> Certificate:
    """End-to-end certificate for the uniform measure on K:

        integral_K |p| dt >= c * |K|^{j+1} * sup_I |p^(j)|   (j = 0..n)

    with I an interval satisfying |K cap I| >= (1-eps)/n * |K|.
    """
    if K.measure <= 0.0:
        raise ValueError("K must have positive measure")
    mu = UniformMeasure(K)
    e = _build_e_set(mu, K, n, eps, mc)
    iprime = _select_iprime(mu, e, n, eps)
    region = RealSet((iprime,))
    ksz = K.measure
    consts: list[tuple[int, float]] = []
    worst: tuple[float, Polynomial] | None = None
    steps_total = 0
    for j in range(n + 1):
        res = certify_ratio(RatioProblem(K, mu, region, n, j), budget, seed + j)
        c_j = ksz * res.min_ratio
        steps_total += res.refine_steps
        consts.append((j, c_j))
        if worst is None or c_j < worst[0]:
            worst = (c_j, res.witness)
    constant = min(c for _, c in consts)
    meta = OracleMeta(budget, seed, worst[1], steps_total, tuple(consts))
    return Certificate(
        "theorem0", region, tuple(range(n + 1)), constant, meta, K, mu, n, eps
    )


def theorem1_certificate(
    mu: ProbMeasure,
    K: RealSet,
    n: int,
    eps: float,
    budget: int = 1000,
    seed: int = 0,
    mc: MCBudget | None = None,
) -> Certificate:
    """Certified constant for the sharper K_eps form:

        integral |f| dmu >= c * ell_n^n * inf_{K_eps} |f^(n)|

    certified over degree-n sphere polynomials (with polish) plus
    constructed higher-degree polynomials whose n-th derivative keeps one
    sign on the hull.
    """
    ell = ell_n(mu, n, mc)
    if ell.value <= 0.0:
        raise ValueError("ell_n vanishes: the sharper form is vacuous")
    hull = K.hull
    keps = k_epsilon(K, hull, eps)
    nfact = math.factorial(n)

    def num_fn(ct: np.ndarray) -> np.ndarray:
        return batch_abs_integral_measure(ct, mu)

    def den_fn(ct: np.ndarray) -> np.ndarray:
        lead = np.abs(ct[:, n]) * nfact if ct.shape[1] > n else np.zeros(ct.shape[0])
        return ell.value**n * lead

    ratio, wit, steps = minimize_poly_ratio(num_fn, den_fn, n, hull, budget, seed)
    # higher-degree members: f^(n) = linear or quadratic without roots in the hull
    rng = philox(seed, 23)
    best_hi = math.inf
    for _ in range(200):
        extra = int(rng.integers(1, 3))
        root = hull.hi + (0.1 + rng.random()) * max(hull.length, 1.0)
        if rng.random() < 0.5:
            root = hull.lo - (0.1 + rng.random()) * max(hull.length, 1.0)
        gcoef = np.array([-root, 1.0])
        if extra == 2:
            gcoef = np.convolve(gcoef, np.array([-root - rng.random(), 1.0]))
        coeffs = gcoef.copy()
        for _ in range(n):  # integrate n times, random integration constants
            coeffs = np.concatenate([[rng.standard_normal()], coeffs / np.arange(1, len(coeffs) + 1)])
        coeffs = coeffs / np.linalg.norm(coeffs)
        p = Polynomial(tuple(coeffs))
        inf_d = poly_inf_abs(p, keps.parts, n)
        if inf_d <= 0.0:
            continue
        lhs = integral_abs_measure(p, mu)
        best_hi = min(best_hi, lhs / (ell.value**n * inf_d))
    constant = min(ratio, best_hi)
    meta = OracleMeta(budget, seed, Polynomial(tuple(wit)), steps)
    return Certificate(
        "theorem1", keps, (n,), constant, meta, K, mu, n, eps, ell_value=ell.value
    )


# ---------------------------------------------------------------------------
# re-centering


def recenter_bound(
    f: Polynomial, iprime: Interval, ell: float, n: int
) -> list[tuple[float, float]]:
    """Per-j sides of the re-centering comparison on I':

        lhs_j = min(|I'|^j, ell^j) * sup |f^(j)|
        rhs_j = sup |f| + ell^j * sup |f^(n)|
    """
    if f.degree > n:
        raise ValueError("f must have degree at most n")
    lo, hi = iprime.lo, iprime.hi
    sup0 = poly_sup(f, lo, hi, 0)[0]
    supn = poly_sup(f, lo, hi, n)[0]
    out = []
    for j in range(n + 1):
        supj = poly_sup(f, lo, hi, j)[0]
        lhs = min(iprime.length, ell) ** j * supj
        rhs = sup0 + ell**j * supn
        out.append((lhs, rhs))
    return out


def recenter_constant(
    iprime: Interval, ell: float, n: int, budget: int = 2000, seed: int = 0
) -> float:
    """Certified C with lhs_j <= C * rhs_j for all j and unit-sphere f."""
    rng = philox(seed, 29)
    best = 0.0
    cu = sphere_coeffs(rng, budget, n + 1)
    w = max(iprime.length, 1e-12)
    for c in cu:
        coeffs = np.zeros(n + 1)
        coeffs[: n + 1] = affine_substitute(c, 1.0 / w, -iprime.lo / w)[: n + 1]
        p = Polynomial(tuple(coeffs))
        for lhs, rhs in recenter_bound(p, iprime, ell, n):
            if rhs > 0.0:
                best = max(best, lhs / rhs)
    return best
