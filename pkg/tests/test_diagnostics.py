# Diagnostics: sample pacf and Pearson residuals
# ==============================================================================
import math

import numpy as np
import pytest

from mrarma.diagnostics import (pearson_residuals, pearson_residuals_approx,
                                sample_acf, sample_pacf)
from mrarma.errors import ZeroVarianceError
from mrarma.innovations import Skellam
from mrarma.model import MrarmaSpec, simulate

from _oracles import pacf_by_regression

SKELLAM11 = Skellam(1.0, 1.0)


def ar_spec(*alphas, innovation=SKELLAM11):
    return MrarmaSpec(alphas=alphas, betas=(), innovation=innovation)


# ------------------------------------------------------------------
# pacf
# ------------------------------------------------------------------
def test_pacf_white_noise_inside_band(rng):
    x = SKELLAM11.sample(rng, size=10**5)
    pacf = sample_pacf(x, 20)
    assert np.all(np.abs(pacf) < 3.0 / math.sqrt(x.size))


def test_pacf_ar1_cuts_off():
    sim = simulate(ar_spec(0.5), 10**5, seed=13)
    pacf = sample_pacf(sim.series, 5)
    assert pacf[0] == pytest.approx(0.5, abs=0.02)
    assert np.all(np.abs(pacf[1:]) < 0.02)


def test_pacf_first_equals_acf(rng):
    x = SKELLAM11.sample(rng, size=4000)
    assert sample_pacf(x, 3)[0] == pytest.approx(sample_acf(x, 1)[0],
                                                 abs=1e-14)


def test_pacf_matches_regression_oracle():
    sim = simulate(ar_spec(0.6, -0.3), 3000, seed=14)
    pacf = sample_pacf(sim.series, 6)
    oracle = pacf_by_regression(sim.series, 6)
    # Durbin-Levinson works on the 1/n acvf, the regression oracle on raw
    # least squares; they agree up to O(1/n) end effects
    np.testing.assert_allclose(pacf, oracle, atol=5e-3)


def test_pacf_validation():
    with pytest.raises(ZeroVarianceError):
        sample_pacf(np.full(50, 1), 2)
    with pytest.raises(ValueError):
        sample_pacf(np.arange(10) % 3, 0)


# ------------------------------------------------------------------
# Durbin-Levinson against exact linear algebra
# ------------------------------------------------------------------
def test_pacf_solves_yule_walker_exactly(rng):
    x = SKELLAM11.sample(rng, size=2000)
    max_lag = 5
    pacf = sample_pacf(x, max_lag)
    # exact pacf from the Toeplitz systems of the sample acf
    xc = x - x.mean()
    n = x.size
    rho = np.array([float(xc[:n - h] @ xc[h:]) / float(xc @ xc)
                    for h in range(max_lag + 1)])
    for h in range(1, max_lag + 1):
        system = np.array([[rho[abs(i - j)] for j in range(h)]
                           for i in range(h)])
        phi = np.linalg.solve(system, rho[1:h + 1])
        assert pacf[h - 1] == pytest.approx(phi[-1], abs=1e-10)


# ------------------------------------------------------------------
# Pearson residuals
# ------------------------------------------------------------------
def test_residuals_of_true_model_standardized():
    spec = ar_spec(0.5, innovation=Skellam(1.5, 0.5))
    sim = simulate(spec, 10**4, seed=15)
    report = pearson_residuals(sim.series, spec)
    assert -0.05 < report.mean < 0.05
    assert 0.9 < report.variance < 1.1
    assert report.significance_band == pytest.approx(
        1.96 / math.sqrt(report.residuals.size))


def test_residual_acf_mostly_inside_band():
    # the band is a per-lag 5% band, so each lag should sit inside it in
    # well over 90% of replications (jointly over all 20 lags would only
    # happen ~0.95**20 of the time)
    spec = ar_spec(0.5)
    reps = 30
    inside = np.zeros(20)
    for rep in range(reps):
        sim = simulate(spec, 10**4, seed=400 + rep)
        report = pearson_residuals(sim.series, spec)
        inside += np.abs(report.acf) < report.significance_band
    assert inside.mean() / reps >= 0.9
    assert np.all(inside / reps >= 0.8)


def test_misspecified_model_flagged():
    true_spec = ar_spec(0.5)
    wrong_spec = ar_spec(0.0)
    sim = simulate(true_spec, 10**4, seed=16)
    report = pearson_residuals(sim.series, wrong_spec)
    assert abs(report.acf[0]) > report.significance_band


def test_portmanteau_statistic_calibration():
    # sum of squared residual acf values behaves like chi-square(20)/n
    spec = ar_spec(0.5, innovation=Skellam(1.5, 0.5))
    reps = 200
    threshold = 37.566  # 99% quantile of chi-square with 20 dof
    ok = 0
    for rep in range(reps):
        sim = simulate(spec, 10**4, seed=8000 + rep)
        report = pearson_residuals(sim.series, spec)
        n = report.residuals.size
        statistic = n * float(np.sum(report.acf ** 2))
        ok += int(statistic < threshold)
    assert ok >= 0.95 * reps


def test_residuals_validation():
    spec = MrarmaSpec(alphas=(0.5,), betas=(0.2,), innovation=SKELLAM11)
    with pytest.raises(ValueError):
        pearson_residuals(np.arange(100) % 5, spec)
    with pytest.raises(ValueError):
        pearson_residuals(np.array([1, 2]), ar_spec(0.5, 0.1, 0.1))


def test_approx_residuals_mixed_model():
    spec = MrarmaSpec(alphas=(0.5,), betas=(0.3,), innovation=SKELLAM11)
    sim = simulate(spec, 10**4, seed=17)
    report = pearson_residuals_approx(sim.series, spec)
    assert -0.05 < report.mean < 0.05
    assert 0.9 < report.variance < 1.1
    assert np.all(np.abs(report.acf[:5]) < 3.0 * report.significance_band)


def test_approx_residuals_defer_to_exact_for_pure_ar():
    spec = ar_spec(0.5)
    sim = simulate(spec, 2000, seed=18)
    exact = pearson_residuals(sim.series, spec)
    approx = pearson_residuals_approx(sim.series, spec)
    np.testing.assert_allclose(approx.residuals, exact.residuals, rtol=1e-12)
