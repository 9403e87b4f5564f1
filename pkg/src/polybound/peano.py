"""Polynomials, Vandermonde products, divided differences, and the averaging kernel.

The kernel attached to nodes t_1 < ... < t_{n+1} is the nonnegative,
integral-one, piecewise polynomial (degree <= n-1) function psi with

    [t_1, ..., t_{n+1}] f = (1/n!) * integral of f^{(n)}(s) psi(s) ds

for every C^n function f.  Pieces are stored in local coordinates
u = s - t_k on [t_k, t_{k+1}] (the shift kills the catastrophic cancellation
a global monomial basis would suffer for offset node sets); each piece is
still a Polynomial of degree at most n-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

N_MAX = 12


def polyval(coeffs: Sequence[float], x):
    """Horner evaluation; x may be scalar or ndarray."""
    acc = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(list(coeffs)):
        acc = acc * x + c
    return acc if acc.shape else float(acc)


def polyder(coeffs: Sequence[float], order: int = 1) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    for _ in range(order):
        if len(c) <= 1:
            return np.zeros(1)
        c = c[1:] * np.arange(1, len(c))
    return c


def polyint(coeffs: Sequence[float]) -> np.ndarray:
    """Antiderivative with zero constant term."""
    c = np.asarray(coeffs, dtype=float)
    return np.concatenate([[0.0], c / np.arange(1, len(c) + 1)])


def polymul(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    return np.convolve(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def affine_substitute(coeffs: Sequence[float], alpha: float, beta: float) -> np.ndarray:
    """Coefficients of p(alpha*u + beta) given those of p(x)."""
    c = np.asarray(coeffs, dtype=float)
    if len(c) == 0:
        return np.zeros(1)
    out = np.array([c[-1]])
    for k in range(len(c) - 2, -1, -1):
        out = np.convolve(out, [beta, alpha])
        out[0] += c[k]
    return out


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = list(float(v) for v in coeffs)
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, ascending coefficients, degree capped at N_MAX."""

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(self.coeffs))
        if any(not math.isfinite(c) for c in self.coeffs):
            raise ValueError("polynomial coefficients must be finite")
        if self.degree > N_MAX:
            raise ValueError(f"degree {self.degree} exceeds the cap {N_MAX}")

    @staticmethod
    def of(*coeffs: float) -> "Polynomial":
        return Polynomial(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, x):
        return polyval(self.coeffs, x)

    def derivative(self, order: int = 1) -> "Polynomial":
        return Polynomial(tuple(polyder(self.coeffs, order)))

    def shift(self, beta: float) -> "Polynomial":
        """p(u + beta) as a polynomial in u."""
        return Polynomial(tuple(affine_substitute(self.coeffs, 1.0, beta)))

    def to_json(self) -> list[float]:
        return list(self.coeffs)


@dataclass(frozen=True)
class NodeSet:
    """Strictly increasing node tuple t_1 < ... < t_{n+1}."""

    nodes: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("at least one node required")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ValueError("nodes must be strictly increasing")

    @property
    def n(self) -> int:
        """Degree parameter: one less than the node count."""
        return len(self.nodes) - 1


def vandermonde(points: Sequence[float]) -> float:
    """prod_{j > i} (t_j - t_i); empty and singleton products are 1."""
    pts = list(points)
    out = 1.0
    for j in range(len(pts)):
        for i in range(j):
            out *= pts[j] - pts[i]
    return out


def divided_difference(f: Callable[[float], float], nodes: NodeSet) -> float:
    """Newton-table divided difference of f at the nodes.

    Equal to the alternating Vandermonde-ratio combination of the f values;
    for a polynomial of degree n with leading coefficient a and n+1 nodes the
    result is exactly a.
    """
    xs = nodes.nodes
    table = [float(f(x)) for x in xs]
    m = len(xs)
    for level in range(1, m):
        table = [
            (table[i + 1] - table[i]) / (xs[i + level] - xs[i])
            for i in range(m - level)
        ]
    return table[0]


def divided_difference_vandermonde(f: Callable[[float], float], nodes: NodeSet) -> float:
    """Direct alternating-ratio form; the cross-check route for the table."""
    xs = nodes.nodes
    n = len(xs) - 1
    den = vandermonde(xs)
    total = 0.0
    for i, x in enumerate(xs):
        rest = xs[:i] + xs[i + 1 :]
        total += (-1.0) ** (n - i) * float(f(x)) * vandermonde(rest)
    return total / den


@dataclass(frozen=True)
class PeanoKernel:
    """Piecewise-polynomial averaging kernel for a node set.

    pieces[k] is a Polynomial in the local variable u = s - nodes[k], valid
    for u in [0, nodes[k+1] - nodes[k]]; psi vanishes outside the hull.
    """

    nodes: NodeSet
    pieces: tuple[Polynomial, ...]

    @property
    def support(self) -> tuple[float, float]:
        return self.nodes.nodes[0], self.nodes.nodes[-1]

    def __call__(self, s):
        ts = np.asarray(self.nodes.nodes)
        x = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(ts, x, side="right") - 1, 0, len(ts) - 2)
        out = np.zeros_like(x)
        for k, piece in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                out = np.where(sel, polyval(piece.coeffs, x - ts[k]), out)
        out = np.where((x < ts[0]) | (x > ts[-1]), 0.0, out)
        return out if out.shape else float(out)

    def integral(self) -> float:
        ts = self.nodes.nodes
        total = 0.0
        for k, piece in enumerate(self.pieces):
            anti = polyint(piece.coeffs)
            total += polyval(anti, ts[k + 1] - ts[k])
        return total

    def integrate_poly(self, coeffs: Sequence[float]) -> float:
        """Exact integral of g(s) * psi(s) ds for polynomial g (global coords)."""
        ts = self.nodes.nodes
        total = 0.0
        for k, piece in enumerate(self.pieces):
            local_g = affine_substitute(coeffs, 1.0, ts[k])
            anti = polyint(polymul(local_g, piece.coeffs))
            total += polyval(anti, ts[k + 1] - ts[k])
        return total


def peano_kernel(nodes: NodeSet) -> PeanoKernel:
    """Construct psi from its closed form sum over nodes right of s.

    On each inter-node interval psi(s) = sum_{t_i > s} n (t_i - s)^{n-1} / D_i
    with D_i = prod_{j != i} (t_i - t_j).  For n = 1 this is the normalized
    indicator of [t_1, t_2].
    """
    ts = nodes.nodes
    n = nodes.n
    if n < 1:
        raise ValueError("kernel undefined for a single node")
    tl = [np.longdouble(t) for t in ts]
    denoms = []
    for i in range(n + 1):
        d = np.longdouble(1.0)
        for j in range(n + 1):
            if j != i:
                d *= tl[i] - tl[j]
        denoms.append(d)
    binom = [math.comb(n - 1, m) for m in range(n)]
    pieces = []
    for k in range(n):
        # The full sum over i vanishes (it is a divided difference of a
        # degree n-1 polynomial), so each piece may use whichever half-sum
        # has fewer terms; edge pieces then suffer no cancellation at all.
        # The cancelling accumulation runs in extended precision: the final
        # coefficients are modest but intermediate terms are not.
        if k + 1 <= n - k:
            span, sign = range(0, k + 1), -1.0
        else:
            span, sign = range(k + 1, n + 1), 1.0
        coeffs = np.zeros(n, dtype=np.longdouble)
        for i in span:
            c = tl[i] - tl[k]  # (t_i - s) = (c - u) in local coordinates
            for m in range(n):
                coeffs[m] += (
                    sign * n * binom[m] * c ** (n - 1 - m) * (-1.0) ** m / denoms[i]
                )
        pieces.append(Polynomial(tuple(float(c) for c in coeffs)))
    kernel = PeanoKernel(nodes, tuple(pieces))
    total = kernel.integral()
    if abs(total - 1.0) > 1e-10:
        raise AssertionError(f"kernel integral {total} deviates from 1")
    return kernel


def kernel_identity_residual(f: Polynomial, nodes: NodeSet) -> float:
    """| divided difference - (1/n!) * integral f^{(n)} psi |, exact integration."""
    n = nodes.n
    kernel = peano_kernel(nodes)
    dd = divided_difference(f, nodes)
    deriv = polyder(f.coeffs, n)
    rhs = kernel.integrate_poly(deriv) / math.factorial(n)
    return abs(dd - rhs)


def cauchy_root_bound(coeffs: Sequence[float]) -> float:
    """All real roots lie in [-B, B] with B = 1 + max |a_i| / |a_d|."""
    c = np.asarray(coeffs, dtype=float)
    nz = np.nonzero(c)[0]
    if len(nz) == 0 or nz[-1] == 0:
        return 0.0
    d = nz[-1]
    return 1.0 + float(np.max(np.abs(c[:d])) / abs(c[d]))


def real_roots_bisection(
    coeffs: Sequence[float], lo: float, hi: float, cells: int | None = None
) -> list[float]:
    """Real roots in [lo, hi] by sign-change bisection on a dense grid.

    The grid is clipped to the Cauchy bound first.  Only odd-multiplicity
    roots are guaranteed; that is exactly what sign-based splitting of |p|
    needs.
    """
    c = _trim(coeffs)
    deg = len(c) - 1
    if deg <= 0:
        return []
    if deg == 1:
        r = -c[0] / c[1]
        return [r] if lo <= r <= hi else []
    b = cauchy_root_bound(c)
    a0, b0 = max(lo, -b), min(hi, b)
    if a0 > b0:
        return []
    cells = cells if cells is not None else 24 * (deg + 1)
    xs = np.linspace(a0, b0, cells + 1)
    vals = polyval(c, xs)
    roots: list[float] = []
    for i in range(cells):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(float(xs[i]))
            continue
        if va * vb < 0.0:
            a, bb = float(xs[i]), float(xs[i + 1])
            fa = va
            while bb - a > 1e-15 * (1.0 + abs(a) + abs(bb)):
                m = 0.5 * (a + bb)
                fm = polyval(c, m)
                if fm == 0.0:
                    a = bb = m
                    break
                if fa * fm < 0.0:
                    bb = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + bb))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    out: list[float] = []
    for r in sorted(roots):
        if not out or r - out[-1] > 1e-13 * (1.0 + abs(r)):
            out.append(r)
    return out


def poly_sup(p: Polynomial, lo: float, hi: float, j: int = 0) -> tuple[float, float]:
    """(sup, argmax) of |p^{(j)}| over [lo, hi], ties toward the leftmost point.

    Candidates are the endpoints, the sign-change roots of p^{(j+1)}, and
    refined local maxima of |p^{(j)}| on a dense grid (the latter catches
    even-multiplicity critical points the bisection cannot see).
    """
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    if hi < lo:
        raise ValueError("empty interval")
    g = polyder(p.coeffs, j)
    g = np.asarray(_trim(g))
    if len(g) == 1:
        return abs(float(g[0])), lo
    if hi == lo:
        return abs(float(polyval(g, lo))), lo
    candidates = [lo, hi]
    candidates += real_roots_bisection(polyder(g), lo, hi)
    deg = len(g) - 1
    xs = np.linspace(lo, hi, 16 * (deg + 1) + 1)
    vals = np.abs(polyval(g, xs))
    interior = np.where((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    for i in interior:
        a, b = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, len(xs) - 1)])
        for _ in range(120):
            m1 = a + (b - a) / 3.0
            m2 = b - (b - a) / 3.0
            if abs(polyval(g, m1)) < abs(polyval(g, m2)):
                a = m1
            else:
                b = m2
            if b - a <= 1e-14 * (1.0 + abs(a) + abs(b)):
                break
        candidates.append(0.5 * (a + b))
    candidates = sorted(candidates)
    cand_vals = [abs(float(polyval(g, x))) for x in candidates]
    best = max(cand_vals)
    for x, v in zip(candidates, cand_vals):
        if v >= best * (1.0 - 1e-12):
            return best, x
    return best, candidates[0]


def poly_inf_abs(p: Polynomial, region_parts, j: int = 0) -> float:
    """inf of |p^{(j)}| over a union of closed intervals.

    Zero as soon as p^{(j)} has a root in some part; otherwise the minimum
    over endpoints and interior extrema.
    """
    g = np.asarray(_trim(polyder(p.coeffs, j)))
    best = math.inf
    for iv in region_parts:
        lo, hi = iv.lo, iv.hi
        if len(g) == 1:
            best = min(best, abs(float(g[0])))
            continue
        if lo < hi and real_roots_bisection(g, lo, hi):
            return 0.0
        pts = [lo, hi] + real_roots_bisection(polyder(g), lo, hi)
        best = min(best, min(abs(float(polyval(g, x))) for x in pts))
    return best
