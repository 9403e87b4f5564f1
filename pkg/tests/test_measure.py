import itertools
import math

import numpy as np
import pytest

from polybound.measure import (
    AtomicMeasure,
    UniformMeasure,
    length_n_eps,
    mass,
    measure_from_json,
    restrict,
    shortest_mass_interval,
)
from polybound.realset import Interval, realset


TWO_ATOMS = AtomicMeasure(((0.0, 0.5), (1.0, 0.5)))


def test_mass_examples():
    assert mass(UniformMeasure(realset((0, 1))), realset((0, 0.25))) == 0.25
    assert mass(TWO_ATOMS, realset((0, 0))) == 0.5
    assert math.isclose(
        mass(UniformMeasure(realset((0, 0.2), (0.8, 1))), realset((0, 0.5))), 0.5
    )


def test_restrict_examples():
    u = restrict(UniformMeasure(realset((0, 1))), Interval(0, 0.5))
    assert u.support.to_json() == {"parts": [[0, 0.5]]}
    a = restrict(TWO_ATOMS, Interval(-0.1, 0.1))
    assert a.atoms == ((0.0, 1.0),)
    u2 = restrict(UniformMeasure(realset((0, 0.2), (0.8, 1))), Interval(0.1, 0.9))
    assert u2.support.to_json() == {"parts": [[0.1, 0.2], [0.8, 0.9]]}


def test_restrict_zero_mass_errors():
    with pytest.raises(ValueError):
        restrict(TWO_ATOMS, Interval(0.4, 0.6))
    with pytest.raises(ValueError):
        restrict(UniformMeasure(realset((0, 1))), Interval(2, 3))


def test_atomic_validation():
    with pytest.raises(ValueError):
        AtomicMeasure(((0.0, 0.5), (0.0, 0.5)))
    with pytest.raises(ValueError):
        AtomicMeasure(((0.0, 0.7), (1.0, 0.7)))
    with pytest.raises(ValueError):
        AtomicMeasure(((0.0, -0.5), (1.0, 1.5)))


def test_length_atomic_examples():
    res = length_n_eps(TWO_ATOMS, 1, 0.4)
    assert res.value == 1.0
    assert [iv.to_json() for iv in res.witness] == [[0.0, 1.0]]
    res = length_n_eps(TWO_ATOMS, 1, 0.5)
    assert res.value == 0.0
    assert [iv.to_json() for iv in res.witness] == [[0.0, 0.0]]


def test_length_uniform_examples():
    u = UniformMeasure(realset((0, 0.2), (0.8, 1)))
    res = length_n_eps(u, 2, 1e-9)
    assert math.isclose(res.value, 0.4, abs_tol=1e-6)
    res1 = length_n_eps(u, 1, 0.25)
    assert math.isclose(res1.value, 0.9, abs_tol=1e-6)
    assert mass(u, realset(*[(iv.lo, iv.hi) for iv in res1.witness])) >= 0.75


def test_length_uniform_floor_contract():
    # value >= (1 - eps) |K| for uniform measures, asserted on every call
    rng = np.random.default_rng(3)
    for _ in range(40):
        cuts = np.sort(rng.random(6))
        parts = [(cuts[0], cuts[1]), (cuts[2], cuts[3]), (cuts[4], cuts[5])]
        support = realset(*parts)
        if support.measure <= 0:
            continue
        mu = UniformMeasure(support)
        n = int(rng.integers(1, 4))
        eps = float(rng.uniform(0.05, 0.9))
        res = length_n_eps(mu, n, eps)
        assert res.value >= (1 - eps) * support.measure - 1e-12
        assert len(res.witness) <= n
        assert mass(mu, realset(*[(iv.lo, iv.hi) for iv in res.witness])) >= 1 - eps


def _brute_force_atomic(mu: AtomicMeasure, n: int, eps: float) -> float:
    xs = [x for x, _ in mu.atoms]
    ws = [w for _, w in mu.atoms]
    m = len(xs)
    best = math.inf
    for k in range(1, min(n, m) + 1):
        for cut in itertools.combinations(range(m + k), 2 * k):
            runs = [(cut[2 * i] - i, cut[2 * i + 1] - i - 1) for i in range(k)]
            if any(a > b or b >= m for a, b in runs):
                continue
            covered = sum(ws[i] for a, b in runs for i in range(a, b + 1))
            if covered >= 1 - eps:
                best = min(best, sum(xs[b] - xs[a] for a, b in runs))
    return best


def test_length_atomic_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(30):
        m = int(rng.integers(2, 13))
        pts = np.sort(rng.random(m))
        pts += np.arange(m) * 1e-6  # enforce distinctness
        w = rng.exponential(1.0, m)
        w /= w.sum()
        w[-1] = 1.0 - w[:-1].sum()
        mu = AtomicMeasure(tuple((float(x), float(v)) for x, v in zip(pts, w)))
        n = int(rng.integers(1, 5))
        eps = float(rng.uniform(0.05, 0.8))
        dp = length_n_eps(mu, n, eps).value
        brute = _brute_force_atomic(mu, n, eps)
        assert math.isclose(dp, brute, rel_tol=1e-12, abs_tol=1e-12)


def test_length_monotone_in_n_and_eps():
    u = UniformMeasure(realset((0, 0.1), (0.3, 0.5), (0.9, 1.4)))
    a = AtomicMeasure(((0.0, 0.2), (0.3, 0.3), (0.7, 0.1), (2.0, 0.4)))
    for mu in (u, a):
        vals_n = [length_n_eps(mu, n, 0.25).value for n in (1, 2, 3, 4)]
        assert all(b <= a + 1e-12 for a, b in zip(vals_n, vals_n[1:]))
        vals_eps = [length_n_eps(mu, 2, eps).value for eps in (0.4, 0.3, 0.2, 0.1)]
        assert all(b >= a - 1e-12 for a, b in zip(vals_eps, vals_eps[1:]))


def test_shortest_mass_interval():
    u = UniformMeasure(realset((0, 0.2), (0.8, 1)))
    iv = shortest_mass_interval(u, 0.5)
    assert math.isclose(iv.lo, 0.0, abs_tol=1e-12)
    assert math.isclose(iv.hi, 0.2, rel_tol=1e-12)
    iv = shortest_mass_interval(u, 0.6)
    assert math.isclose(iv.length, 0.84, rel_tol=1e-9)
    a = AtomicMeasure(((0.0, 0.25), (0.4, 0.25), (1.0, 0.5)))
    assert shortest_mass_interval(a, 0.5).to_json() == [1.0, 1.0]
    assert shortest_mass_interval(a, 0.75).to_json() == [0.4, 1.0]


def test_measure_json_round_trip():
    for mu in (TWO_ATOMS, UniformMeasure(realset((0, 0.2), (0.8, 1)))):
        again = measure_from_json(mu.to_json())
        assert again == mu
