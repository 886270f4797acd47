# Rounding operator: exact laws, sampling, scaled convolution
# ==============================================================================
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrarma.rounding import (round_dist, round_sample, scaled_round_pmf, split)

from _oracles import scaled_round_pmf_by_enumeration

finite_reals = st.floats(min_value=-1e6, max_value=1e6,
                         allow_nan=False, allow_infinity=False)


# ------------------------------------------------------------------
# split
# ------------------------------------------------------------------
def test_split_examples():
    assert split(2.3).floor == 2
    assert split(2.3).frac == pytest.approx(0.3)
    assert split(-1.3).floor == -2
    assert split(-1.3).frac == pytest.approx(0.7)
    assert split(5.0) == split(5)
    assert split(5.0).floor == 5
    assert split(5.0).frac == 0.0


def test_split_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            split(bad)


@given(finite_reals)
def test_split_reconstructs(z):
    s = split(z)
    assert 0.0 <= s.frac < 1.0
    assert s.floor + s.frac == pytest.approx(z, abs=1e-9 * max(1.0, abs(z)))


@given(finite_reals)
def test_split_negation_identity(z):
    s = split(z)
    neg = split(-z)
    if s.frac == 0.0:
        assert neg.floor == -s.floor and neg.frac == 0.0
    else:
        assert neg.floor == -s.floor - 1
        assert neg.frac == pytest.approx(1.0 - s.frac, abs=1e-9)


def test_split_snaps_float_noise():
    # 0.1 * 30 is 3.0000000000000004 in float64
    s = split(0.1 * 30)
    assert (s.floor, s.frac) == (3, 0.0)
    s = split(3.0 - 1e-14)
    assert (s.floor, s.frac) == (3, 0.0)


# ------------------------------------------------------------------
# round_dist
# ------------------------------------------------------------------
def test_round_dist_examples():
    d = round_dist(2.3)
    assert d.support == (2, 3)
    assert d.pmf(2) == pytest.approx(0.7)
    assert d.pmf(3) == pytest.approx(0.3)
    assert d.mean == pytest.approx(2.3)
    assert d.variance == pytest.approx(0.21)

    d = round_dist(5)
    assert d.pmf(5) == 1.0 and d.pmf(6) == 0.0

    d = round_dist(-1.3)
    assert d.pmf(-2) == pytest.approx(0.3)
    assert d.pmf(-1) == pytest.approx(0.7)
    assert d.mean == pytest.approx(-1.3)


@given(finite_reals)
def test_round_dist_normalized_mean_variance(z):
    d = round_dist(z)
    frac = split(z).frac
    assert d.lower_prob + d.upper_prob == pytest.approx(1.0, abs=1e-15)
    assert d.mean == pytest.approx(split(z).value, abs=1e-12 * max(1.0, abs(z)))
    assert d.variance == pytest.approx(frac * (1.0 - frac), abs=1e-12)


@given(finite_reals)
def test_round_dist_reflection(z):
    d = round_dist(z)
    r = round_dist(-z)
    for y in d.support:
        assert r.pmf(-y) == pytest.approx(d.pmf(y), abs=1e-9)


def test_pgf_at_one_and_domain():
    d = round_dist(1.5)
    assert d.pgf(1.0) == pytest.approx(1.0)
    assert d.pgf(0.5) == pytest.approx(0.5 * 0.5 + 0.5 * 0.25)
    with pytest.raises(ValueError):
        d.pgf(0.0)


# ------------------------------------------------------------------
# round_sample
# ------------------------------------------------------------------
def test_round_sample_integer_is_deterministic(rng):
    assert all(round_sample(4, rng) == 4 for _ in range(100))


def test_round_sample_monte_carlo_mean(rng):
    draws = round_sample(np.full(10**6, 0.5), rng)
    assert abs(draws.mean() - 0.5) < 0.002  # 4 sigma of sqrt(0.25 / 1e6)


def test_round_sample_monte_carlo_variance(rng):
    draws = round_sample(np.full(10**6, -1.3), rng)
    assert abs(draws.mean() - (-1.3)) < 0.002
    assert abs(draws.var() - 0.21) < 0.003


def test_round_sample_rejects_non_finite(rng):
    with pytest.raises(ValueError):
        round_sample(math.inf, rng)


# ------------------------------------------------------------------
# scaled_round_pmf
# ------------------------------------------------------------------
def test_scaled_round_point_mass():
    point = {3: 1.0}
    assert scaled_round_pmf(0.5, point, 1) == pytest.approx(0.5)
    assert scaled_round_pmf(0.5, point, 2) == pytest.approx(0.5)
    assert scaled_round_pmf(0.5, point, 0) == 0.0


def test_scaled_round_alpha_zero():
    uniform = {0: 0.5, 1: 0.5}
    assert scaled_round_pmf(0.0, uniform, 0) == 1.0
    assert scaled_round_pmf(0.0, uniform, 1) == 0.0


def test_scaled_round_uniform_example():
    uniform = {0: 0.5, 1: 0.5}
    assert scaled_round_pmf(0.5, uniform, 0) == pytest.approx(0.75, abs=1e-14)
    assert scaled_round_pmf(0.5, uniform, 1) == pytest.approx(0.25, abs=1e-14)
    for y in (0, 1):
        oracle = scaled_round_pmf_by_enumeration(0.5, uniform, y)
        assert scaled_round_pmf(0.5, uniform, y) == pytest.approx(oracle, abs=1e-14)


def test_scaled_round_validation():
    uniform = {0: 0.5, 1: 0.5}
    with pytest.raises(ValueError):
        scaled_round_pmf(1.0, uniform, 0)
    with pytest.raises(ValueError):
        scaled_round_pmf(-1.0, uniform, 0)
    with pytest.raises(ValueError):
        scaled_round_pmf(0.5, {0: 0.6, 1: 0.5}, 0)
    with pytest.raises(ValueError):
        scaled_round_pmf(0.5, {0: 1.5, 1: -0.5}, 0)


def _random_pmf(rng, span=12):
    support = np.arange(-span, span + 1)
    weights = rng.random(support.size) * (rng.random(support.size) < 0.6)
    if weights.sum() == 0.0:
        weights[rng.integers(support.size)] = 1.0
    weights /= weights.sum()
    return {int(k): float(w) for k, w in zip(support, weights) if w > 0.0}


def test_scaled_round_matches_enumeration_randomized(rng):
    # also exercised by the acceptance suite at >= 100 cases
    for _ in range(150):
        alpha = float(rng.uniform(-0.99, 0.99))
        if abs(alpha) < 1e-3:
            alpha = 0.37
        pmf = _random_pmf(rng)
        y = int(rng.integers(-15, 16))
        ours = scaled_round_pmf(alpha, pmf, y)
        oracle = scaled_round_pmf_by_enumeration(alpha, pmf, y)
        assert ours == pytest.approx(oracle, abs=1e-14)


def test_scaled_round_total_mass_and_mean(rng):
    for _ in range(40):
        alpha = float(rng.uniform(-0.99, 0.99))
        if abs(alpha) < 1e-3:
            alpha = -0.41
        pmf = _random_pmf(rng)
        lo = math.floor(alpha * min(pmf)) - 2 if alpha > 0 else \
            math.floor(alpha * max(pmf)) - 2
        hi = math.ceil(alpha * max(pmf)) + 2 if alpha > 0 else \
            math.ceil(alpha * min(pmf)) + 2
        ys = range(lo, hi + 1)
        probs = [scaled_round_pmf(alpha, pmf, y) for y in ys]
        assert math.fsum(probs) == pytest.approx(1.0, abs=1e-10)
        mean = math.fsum(y * p for y, p in zip(ys, probs))
        expected = alpha * math.fsum(x * px for x, px in pmf.items())
        assert mean == pytest.approx(expected, abs=1e-10)


def test_scaled_round_tiny_alpha_uses_support_loop():
    pmf = {0: 0.25, 1: 0.5, 2: 0.25}
    # window is ~4e4 wide; the pmf-iteration branch must give the same value
    assert scaled_round_pmf(1e-4, pmf, 0) == pytest.approx(
        scaled_round_pmf_by_enumeration(1e-4, pmf, 0), abs=1e-14)
