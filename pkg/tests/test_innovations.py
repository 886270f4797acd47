# Skellam innovations and the InnovationModel interface
# ==============================================================================
import math

import numpy as np
import pytest

from mrarma.errors import TruncationError
from mrarma.innovations import InnovationModel, Skellam, skellam_log_pmf

from _oracles import skellam_pmf_by_convolution, skellam_pmf_highprec

# frozen from the Poisson-convolution oracle (sum of squared Poisson(1)
# weights), converged far below 1e-12
SKELLAM11_PMF0 = 0.30850832255367105


class DegenerateAtZero(InnovationModel):
    """Point mass at 0; exercises the open innovation interface."""

    def pmf(self, k):
        return np.where(np.asarray(k) == 0, 1.0, 0.0)

    def log_pmf(self, k):
        return np.log(np.maximum(self.pmf(k), 1e-300))

    def sample(self, rng, size=None):
        return 0 if size is None else np.zeros(size, dtype=np.int64)

    @property
    def mean(self):
        return 0.0

    @property
    def variance(self):
        return 0.0

    def pgf(self, s):
        return 1.0


# ------------------------------------------------------------------
# pmf against the Poisson-convolution oracle
# ------------------------------------------------------------------
def test_pmf_zero_frozen_oracle_value():
    assert math.exp(skellam_log_pmf(1.0, 1.0, 0)) == pytest.approx(
        SKELLAM11_PMF0, abs=1e-12)


def test_moment_identities():
    s = Skellam(1.5, 0.5)
    assert s.mean == pytest.approx(1.0)
    assert s.variance == pytest.approx(2.0)


def test_symmetry_when_rates_match():
    s = Skellam(1.0, 1.0)
    assert s.pmf(3) == pytest.approx(s.pmf(-3), rel=1e-14)


def test_pmf_matches_convolution_small_rates():
    for l1, l2 in [(1.0, 1.0), (1.5, 0.5), (0.142, 0.23), (4.0, 2.5),
                   (20.0, 14.0), (0.001, 5.0)]:
        s = Skellam(l1, l2)
        ks = np.arange(-50, 51)
        values = s.pmf(ks)
        for k, v in zip(ks, values):
            oracle = skellam_pmf_by_convolution(l1, l2, int(k))
            if oracle > 1e-250:
                assert abs(v - oracle) <= 1e-13 * oracle, (l1, l2, k)


def test_pmf_matches_convolution_large_rates():
    # float64 term noise in the oracle matters at this scale, so the oracle
    # runs in multi-precision; |k| <= 50, rates up to 300
    for l1, l2 in [(100.0, 100.0), (150.0, 155.0), (199.0, 210.0),
                   (300.0, 300.0), (300.0, 0.01)]:
        s = Skellam(l1, l2)
        for k in range(-50, 51, 7):
            oracle = skellam_pmf_highprec(l1, l2, k)
            if oracle > 1e-250:
                assert abs(float(s.pmf(k)) - oracle) <= 1e-13 * oracle, (l1, l2, k)


def test_log_pmf_vectorized_matches_scalar():
    s = Skellam(2.0, 3.0)
    ks = np.array([-4, -1, 0, 2, 7])
    np.testing.assert_allclose(s.log_pmf(ks),
                               [s.log_pmf(int(k)) for k in ks], rtol=1e-15)


def test_invalid_rates_rejected():
    for bad in [(0.0, 1.0), (1.0, -2.0), (math.inf, 1.0), (math.nan, 1.0)]:
        with pytest.raises(ValueError):
            Skellam(*bad)


def test_from_moments_roundtrip():
    s = Skellam.from_moments(1.0, 2.0)
    assert (s.lambda1, s.lambda2) == (1.5, 0.5)
    with pytest.raises(ValueError):
        Skellam.from_moments(3.0, 2.0)


# ------------------------------------------------------------------
# pgf
# ------------------------------------------------------------------
@pytest.mark.parametrize("s_value", [0.2, 0.5, 0.9])
def test_pgf_matches_series(s_value):
    dist = Skellam(1.5, 0.5)
    lo, hi = dist.support_window(1e-12)
    # s**k amplifies the negative tail by s**-|k|, so the series needs a
    # wider window than the pmf mass alone suggests
    ks = np.arange(lo - 40, hi + 41)
    series_value = float(np.sum(dist.pmf(ks) * s_value ** ks.astype(float)))
    assert dist.pgf(s_value) == pytest.approx(series_value, abs=1e-9)


def test_pgf_domain():
    dist = Skellam(1.0, 1.0)
    assert dist.pgf(1.0) == pytest.approx(1.0)
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            dist.pgf(bad)


# ------------------------------------------------------------------
# sampling
# ------------------------------------------------------------------
def test_sample_mean_monte_carlo(rng):
    draws = Skellam(1.0, 1.0).sample(rng, size=10**6)
    assert abs(draws.mean()) < 0.006  # 4 sigma of sqrt(2 / 1e6)


def test_sample_variance_monte_carlo(rng):
    draws = Skellam(1.5, 0.5).sample(rng, size=10**6)
    assert abs(draws.var() - 2.0) < 0.02


def test_sample_pmf_self_consistency(rng):
    n = 200_000
    for l1, l2 in [(1.0, 1.0), (2.5, 0.7)]:
        dist = Skellam(l1, l2)
        draws = dist.sample(rng, size=n)
        p0 = float(dist.pmf(0))
        se = math.sqrt(p0 * (1.0 - p0) / n)
        assert abs((draws == 0).mean() - p0) < 3.0 * se


def test_sample_scalar_type(rng):
    assert isinstance(Skellam(1.0, 1.0).sample(rng), int)


# ------------------------------------------------------------------
# support_window
# ------------------------------------------------------------------
def test_support_window_contains_bulk():
    lo, hi = Skellam(1.0, 1.0).support_window(1e-12)
    assert lo <= -12 and hi >= 12


def test_support_window_degenerate():
    assert DegenerateAtZero().support_window(1e-9) == (0, 0)


def test_support_window_table_scale():
    lo, hi = Skellam(20.0, 14.0).support_window(1e-12)
    assert hi - lo < 200
    # window must actually hold the mass
    ks = np.arange(lo, hi + 1)
    assert float(Skellam(20.0, 14.0).pmf(ks).sum()) > 1.0 - 1e-12


def test_support_window_moments_match_pmf():
    dist = Skellam(1.5, 0.5)
    lo, hi = dist.support_window(1e-12)
    ks = np.arange(lo, hi + 1).astype(float)
    pmf = dist.pmf(np.arange(lo, hi + 1))
    mean = float(pmf @ ks)
    var = float(pmf @ (ks - mean) ** 2)
    assert mean == pytest.approx(dist.mean, abs=1e-8)
    assert var == pytest.approx(dist.variance, abs=1e-8)


def test_support_window_tolerance_domain():
    dist = Skellam(1.0, 1.0)
    for bad in (0.0, 1e-5, -1e-9):
        with pytest.raises(ValueError):
            dist.support_window(bad)


def test_support_window_expansion_cap():
    class Heavy(DegenerateAtZero):
        # mass never accumulates; expansion must hit the cap
        def pmf(self, k):
            return np.zeros_like(np.asarray(k, dtype=float))

        @property
        def mean(self):
            return 0.0

    with pytest.raises(TruncationError):
        Heavy().support_window(1e-9)


# ------------------------------------------------------------------
# extreme-rate robustness (asymptotic branch)
# ------------------------------------------------------------------
def test_huge_rates_do_not_overflow():
    s = Skellam(2.0e8, 2.0e8)
    values = s.pmf(np.array([0, 10, -40]))
    assert np.all(np.isfinite(values)) and np.all(values > 0.0)
    # mode height of an approximately normal law with sd sqrt(4e8)
    assert float(values[0]) == pytest.approx(
        1.0 / math.sqrt(2 * math.pi * 4.0e8), rel=1e-4)


def test_windowed_series_branch_matches_reference():
    # huge order relative to argument: the 1/(8x) expansion diverges and the
    # peak-windowed series takes over
    import mpmath as mp
    from mrarma.innovations import _log_scaled_bessel_i_windowed

    with mp.workdps(40):
        reference = float(mp.log(mp.besseli(60, 25000)) - 25000)
    ours = _log_scaled_bessel_i_windowed(60.0, 25000.0)
    assert ours == pytest.approx(reference, abs=1e-10)
