import math

import numpy as np
import pytest
from scipy.interpolate import BSpline

from polybound.peano import (
    NodeSet,
    Polynomial,
    divided_difference,
    divided_difference_vandermonde,
    kernel_identity_residual,
    peano_kernel,
    polyder,
    poly_inf_abs,
    poly_sup,
    real_roots_bisection,
    vandermonde,
)
from polybound.realset import Interval


def random_nodes(rng, n, lo=-5.0, hi=5.0, min_gap=1e-2):
    while True:
        ts = np.sort(rng.uniform(lo, hi, n + 1))
        if np.min(np.diff(ts)) >= min_gap:
            return NodeSet(tuple(float(t) for t in ts))


def test_vandermonde_examples():
    assert vandermonde([0, 1]) == 1.0
    assert vandermonde([0, 1, 2]) == 2.0
    assert vandermonde([0, 0, 1]) == 0.0
    assert vandermonde([]) == 1.0
    assert vandermonde([3.7]) == 1.0


def test_divided_difference_examples():
    assert divided_difference(Polynomial.of(0, 0, 1), NodeSet((0, 1, 2))) == 1.0
    assert divided_difference(Polynomial.of(0, 1), NodeSet((0, 1, 2))) == 0.0
    assert divided_difference(Polynomial.of(0, 0, 0, 1), NodeSet((0, 1, 3, 4))) == 1.0


def test_divided_difference_leading_coefficient():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        nodes = random_nodes(rng, n)
        coeffs = rng.standard_normal(n + 1)
        coeffs[-1] = rng.choice([-1.0, 1.0]) * (0.5 + rng.random())
        p = Polynomial(tuple(coeffs))
        dd = divided_difference(p, nodes)
        assert math.isclose(dd, coeffs[-1], rel_tol=1e-12, abs_tol=1e-12)


def test_divided_difference_matches_vandermonde_ratio():
    # the Newton table against the alternating-ratio form on tame nodes
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        nodes = random_nodes(rng, n, lo=0.0, hi=3.0, min_gap=0.2)
        p = Polynomial(tuple(rng.standard_normal(n + 2)))
        a = divided_difference(p, nodes)
        b = divided_difference_vandermonde(p, nodes)
        assert math.isclose(a, b, rel_tol=1e-8, abs_tol=1e-10)


def test_kernel_n1_is_normalized_indicator():
    k = peano_kernel(NodeSet((0.0, 1.0)))
    assert k(0.5) == 1.0
    assert k(-0.1) == 0.0
    assert k(1.1) == 0.0
    assert math.isclose(k.integral(), 1.0, abs_tol=1e-12)
    k2 = peano_kernel(NodeSet((2.0, 6.0)))
    assert math.isclose(k2(3.0), 0.25)


def test_kernel_tent_example():
    k = peano_kernel(NodeSet((0.0, 1.0, 2.0)))
    assert math.isclose(k(1.0), 1.0, abs_tol=1e-12)
    assert math.isclose(k(0.5), 0.5, abs_tol=1e-12)
    assert math.isclose(k(1.5), 0.5, abs_tol=1e-12)
    assert math.isclose(k(0.0), 0.0, abs_tol=1e-12)
    assert math.isclose(k.integral(), 1.0, abs_tol=1e-12)


def test_kernel_quadratic_bspline_example():
    k = peano_kernel(NodeSet((0.0, 1.0, 2.0, 3.0)))
    assert math.isclose(k(1.5), 0.75, abs_tol=1e-12)
    assert math.isclose(k.integral(), 1.0, abs_tol=1e-12)


def test_kernel_matches_bspline_basis():
    # psi = normalized B-spline: basis_element * n / (t_{n+1} - t_1)
    rng = np.random.default_rng(8)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        nodes = random_nodes(rng, n)
        k = peano_kernel(nodes)
        ts = np.array(nodes.nodes)
        spline = BSpline.basis_element(ts, extrapolate=False)
        scale = n / (ts[-1] - ts[0])
        xs = rng.uniform(ts[0], ts[-1], 300)
        ours = k(xs)
        theirs = np.nan_to_num(spline(xs)) * scale
        assert np.max(np.abs(ours - theirs)) <= 1e-8 * max(1.0, np.max(np.abs(theirs)))


def test_kernel_invariants_random_ensemble():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        nodes = random_nodes(rng, n)
        k = peano_kernel(nodes)
        ts = np.array(nodes.nodes)
        assert math.isclose(k.integral(), 1.0, abs_tol=1e-10)
        xs = np.linspace(ts[0], ts[-1], 1000)
        vals = k(xs)
        assert vals.min() >= -1e-12
        outside = np.array([ts[0] - 1e-9, ts[-1] + 1e-9, ts[0] - 5, ts[-1] + 5])
        assert np.all(k(outside) == 0.0)
        # C^{n-2} continuity across interior nodes
        for order in range(max(n - 1, 0)):
            for j in range(1, n):
                left_piece = k.pieces[j - 1]
                right_piece = k.pieces[j]
                gap = ts[j] - ts[j - 1]
                lv = float(np.polyval(polyder(left_piece.coeffs, order)[::-1], gap))
                rv = float(np.polyval(polyder(right_piece.coeffs, order)[::-1], 0.0))
                scale = max(1.0, abs(lv), abs(rv))
                assert abs(lv - rv) <= 1e-8 * scale


def test_kernel_identity_examples():
    assert kernel_identity_residual(Polynomial.of(0, 0, 1), NodeSet((0, 1, 2))) <= 1e-12
    assert (
        kernel_identity_residual(Polynomial.of(0, 5, 0, 1), NodeSet((0, 1, 2, 3)))
        <= 1e-12
    )
    assert kernel_identity_residual(Polynomial.of(4.2), NodeSet((0, 1, 2))) <= 1e-12


def test_kernel_identity_random():
    rng = np.random.default_rng(10)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        nodes = random_nodes(rng, n)
        deg = int(rng.integers(0, n + 5))
        f = Polynomial(tuple(rng.standard_normal(deg + 1)))
        dd = divided_difference(f, nodes)
        assert kernel_identity_residual(f, nodes) <= 1e-9 * max(1.0, abs(dd))


def test_kernel_rejects_single_node():
    with pytest.raises(ValueError):
        peano_kernel(NodeSet((0.0,)))


def test_poly_sup_examples():
    val, arg = poly_sup(Polynomial.of(0, -1, 1), 0.0, 1.0, 0)
    assert math.isclose(val, 0.25, rel_tol=1e-12)
    assert abs(arg - 0.5) < 1e-6
    val, arg = poly_sup(Polynomial.of(0, -1, 1), 0.0, 1.0, 1)
    assert math.isclose(val, 1.0, rel_tol=1e-12)
    val, arg = poly_sup(Polynomial.of(0, -3, 0, 1), -2.0, 2.0, 0)
    assert math.isclose(val, 2.0, rel_tol=1e-12)
    assert arg == -2.0  # leftmost among the four tied maximizers


def _sup_by_numpy_roots(coeffs, lo, hi, j):
    g = polyder(coeffs, j)
    pts = [lo, hi]
    dg = polyder(g)
    if len(dg) > 1:
        roots = np.roots(dg[::-1])
        for r in roots:
            if abs(r.imag) < 1e-9 and lo <= r.real <= hi:
                pts.append(float(r.real))
    return max(abs(float(np.polyval(g[::-1], x))) for x in pts)


def test_poly_sup_against_numpy_roots():
    rng = np.random.default_rng(12)
    for _ in range(200):
        deg = int(rng.integers(1, 7))
        p = Polynomial(tuple(rng.standard_normal(deg + 1)))
        lo = float(rng.uniform(-3, 0))
        hi = float(rng.uniform(0.1, 3))
        j = int(rng.integers(0, deg + 1))
        ours = poly_sup(p, lo, hi, j)[0]
        ref = _sup_by_numpy_roots(np.array(p.coeffs), lo, hi, j)
        assert math.isclose(ours, ref, rel_tol=1e-9, abs_tol=1e-12)


def test_poly_inf_abs():
    p = Polynomial.of(0, -1, 1)  # t^2 - t, roots at 0 and 1
    assert poly_inf_abs(p, [Interval(-1, 2)]) == 0.0
    assert poly_inf_abs(p, [Interval(2, 3)]) == 2.0
    assert poly_inf_abs(Polynomial.of(5.0), [Interval(0, 1)]) == 5.0


def test_real_roots_bisection():
    # (t-1)(t-2)(t-3)
    coeffs = (-6.0, 11.0, -6.0, 1.0)
    roots = real_roots_bisection(coeffs, 0.0, 4.0)
    assert len(roots) == 3
    for r, expect in zip(roots, (1.0, 2.0, 3.0)):
        assert abs(r - expect) < 1e-10


def test_polynomial_degree_cap():
    with pytest.raises(ValueError):
        Polynomial(tuple([0.0] * 13 + [1.0]))
    Polynomial(tuple([0.0] * 12 + [1.0]))  # degree 12 is allowed
