import math

import numpy as np
import pytest

from polybound.realset import Interval, RealSet, k_epsilon, normalize, realset


def test_normalize_merges_overlap():
    assert normalize([Interval(0, 1), Interval(0.5, 2)]).to_json() == {
        "parts": [[0, 2]]
    }


def test_normalize_sorts():
    assert normalize([Interval(2, 3), Interval(0, 1)]).to_json() == {
        "parts": [[0, 1], [2, 3]]
    }


def test_normalize_degenerate_point():
    s = normalize([Interval(0, 0)])
    assert s.to_json() == {"parts": [[0, 0]]}
    assert s.measure == 0.0


def test_normalize_merges_touching():
    assert normalize([Interval(0, 0.5), Interval(0.5, 1)]).to_json() == {
        "parts": [[0, 1]]
    }


def test_normalize_idempotent_and_measure_preserving():
    rng = np.random.default_rng(0)
    for _ in range(50):
        points = rng.random((8, 2))
        ivs = [Interval(min(a, b), max(a, b)) for a, b in points]
        s = normalize(ivs)
        assert normalize(list(s.parts)).parts == s.parts
        # measure of the union computed by dense grid as a sanity bound
        xs = np.linspace(-0.1, 1.1, 6001)
        covered = np.zeros(len(xs), dtype=bool)
        for iv in ivs:
            covered |= (xs >= iv.lo) & (xs <= iv.hi)
        approx = covered.mean() * 1.2
        assert abs(s.measure - approx) < 5e-3


def test_interval_rejects_bad_endpoints():
    with pytest.raises(ValueError):
        Interval(1, 0)
    with pytest.raises(ValueError):
        Interval(float("nan"), 1)
    with pytest.raises(ValueError):
        Interval(0, float("inf"))


def test_measure_examples():
    assert realset((0, 1), (2, 3)).measure == 2.0
    assert realset((0, 0)).measure == 0.0
    assert math.isclose(realset((0, 0.2), (0.8, 1)).measure, 0.4)


def test_k_epsilon_frozen_example():
    k = realset((0, 1), (2, 3))
    ke = k_epsilon(k, Interval(0, 3), 0.5)
    expect = [[0, 4 / 3], [5 / 3, 3]]
    got = ke.to_json()["parts"]
    assert len(got) == 2
    for (a, b), (ea, eb) in zip(got, expect):
        assert math.isclose(a, ea, abs_tol=1e-15)
        assert math.isclose(b, eb, abs_tol=1e-15)


def test_k_epsilon_no_gap_is_identity():
    k = realset((0, 1))
    assert k_epsilon(k, Interval(0, 1), 0.7).parts == k.parts


def test_k_epsilon_small_eps_limit():
    k = realset((0, 1), (2, 3))
    ke = k_epsilon(k, Interval(0, 3), 1e-9)
    assert abs(ke.measure - k.measure) < 1e-8


def test_k_epsilon_rejects_bad_eps():
    k = realset((0, 1), (2, 3))
    for eps in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            k_epsilon(k, Interval(0, 3), eps)


def test_k_epsilon_gap_measure_and_sandwich():
    rng = np.random.default_rng(1)
    for _ in range(30):
        cuts = np.sort(rng.random(6))
        k = realset((cuts[0], cuts[1]), (cuts[2], cuts[3]), (cuts[4], cuts[5]))
        if len(k.parts) != 3:
            continue
        hull = k.hull
        eps = float(rng.uniform(0.05, 0.95))
        ke = k_epsilon(k, hull, eps)
        # sandwich: K subset K_eps subset hull
        for p in k.parts:
            assert any(q.lo <= p.lo and p.hi <= q.hi for q in ke.parts)
        assert ke.parts[0].lo >= hull.lo and ke.parts[-1].hi <= hull.hi
        # added measure per gap is exactly 2 eps g / (1 + eps)
        for g in k.gaps():
            added = ke.intersect_interval(g).measure
            assert math.isclose(added, 2 * eps * g.length / (1 + eps), rel_tol=1e-12)


def test_k_epsilon_monotone_in_eps():
    k = realset((0, 0.5), (2, 2.5), (4, 5))
    hull = k.hull
    prev = None
    for eps in (0.1, 0.2, 0.4, 0.8):
        ke = k_epsilon(k, hull, eps)
        if prev is not None:
            for p in prev.parts:  # previous set contained in the larger one
                assert any(q.lo <= p.lo + 1e-15 and p.hi <= q.hi + 1e-15 for q in ke.parts)
        prev = ke


def _dist_to_k(t: float, k: RealSet, side: int) -> float:
    """inf {d >= 0 : t + side*d in K}; +inf when K misses that side."""
    best = math.inf
    for p in k.parts:
        if p.lo <= t <= p.hi:
            return 0.0
        if side > 0 and p.lo > t:
            best = min(best, p.lo - t)
        if side < 0 and p.hi < t:
            best = min(best, t - p.hi)
    return best


def in_k_eps_reference(t: float, k: RealSet, eps: float) -> bool:
    dr = _dist_to_k(t, k, +1)
    dl = _dist_to_k(t, k, -1)
    if dr == 0.0 or dl == 0.0:
        return True
    if math.isinf(dr) or math.isinf(dl):
        return False
    return dr <= eps * dl or dl <= eps * dr


def test_k_epsilon_matches_inf_distance_definition():
    # closed form vs direct evaluation of the one-sided distance condition
    k = realset((0, 0.3), (1.0, 1.1), (2.0, 2.6))
    hull = k.hull
    rng = np.random.default_rng(7)
    for eps in (0.15, 0.5):
        ke = k_epsilon(k, hull, eps)
        for g in k.gaps():
            ts = rng.uniform(g.lo, g.hi, 10_000)
            for t in ts:
                closed_form = ke.contains(float(t))
                reference = in_k_eps_reference(float(t), k, eps)
                if closed_form != reference:
                    # only boundary points may disagree, within float noise
                    assert min(abs(t - q) for p in ke.parts for q in (p.lo, p.hi)) < 1e-9
