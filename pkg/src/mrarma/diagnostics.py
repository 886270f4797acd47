"""Model adequacy checks: sample acf/pacf and standardized Pearson residuals.

A correctly specified model turns the data into approximately white,
zero-mean, unit-variance residuals; their autocorrelations should stay
inside the usual two-sided 5% band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroVarianceError
from .model import MrarmaSpec
from .rounding import SNAP_TOL

__all__ = ["ResidualReport", "sample_acf", "sample_pacf", "pearson_residuals",
           "pearson_residuals_approx"]


def sample_acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..max_lag."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n <= max_lag + 1:
        raise ValueError(f"series of length {n} is too short for lag {max_lag}")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ZeroVarianceError("constant series has no autocorrelation")
    return np.array([float(xc[:n - h] @ xc[h:]) / denom
                     for h in range(1, max_lag + 1)])


def sample_pacf(series, max_lag: int) -> np.ndarray:
    """Sample partial autocorrelations at lags 1..max_lag (Durbin-Levinson)."""
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    rho = sample_acf(series, max_lag)
    pacf = np.zeros(max_lag)
    phi = np.zeros((max_lag, max_lag))
    pacf[0] = phi[0, 0] = rho[0]
    for h in range(1, max_lag):
        prev = phi[h - 1, :h]
        num = rho[h] - float(prev @ rho[h - 1::-1])
        den = 1.0 - float(prev @ rho[:h])
        phi[h, h] = num / den
        phi[h, :h] = prev - phi[h, h] * prev[::-1]
        pacf[h] = phi[h, h]
    return pacf


@dataclass(frozen=True)
class ResidualReport:
    """Standardized Pearson residuals with their summary statistics."""

    residuals: np.ndarray
    mean: float
    variance: float
    acf: np.ndarray
    significance_band: float


def pearson_residuals(series, spec: MrarmaSpec, max_lag: int = 20) -> ResidualReport:
    """Standardized one-step residuals of a fitted pure AR model.

    Each residual is the observation minus its conditional mean, divided by
    the square root of the conditional variance (innovation variance plus
    the rounding variance of the linear part). The report carries the
    residual acf to ``max_lag`` and the +/- 1.96 / sqrt(n) band.
    """
    if spec.q != 0:
        raise ValueError("Pearson residuals need the latent innovations for "
                         "q > 0; supported for pure AR models only")
    if spec.innovation.variance <= 0.0:
        raise ValueError("innovation variance must be positive")
    x = np.asarray(series, dtype=float)
    p = spec.p
    if x.size <= p:
        raise ValueError(f"series of length {x.size} is too short for p={p}")
    n = x.size
    z = np.zeros(n - p)
    for i, a in enumerate(spec.alphas, start=1):
        z += a * x[p - i:n - i]
    fr = z - np.floor(z)
    fr = np.where((fr < SNAP_TOL) | (fr > 1.0 - SNAP_TOL), 0.0, fr)
    mean = spec.innovation.mean + z
    var = spec.innovation.variance + fr * (1.0 - fr)
    residuals = (x[p:] - mean) / np.sqrt(var)
    return _report(residuals, max_lag)


def pearson_residuals_approx(series, spec: MrarmaSpec,
                             max_lag: int = 20) -> ResidualReport:
    """Approximate Pearson residuals for mixed (p, q) models.

    Innovations are latent when q > 0, so they are reconstructed by the
    one-step residual recursion before standardizing; the first max(p, q)
    residuals are dropped to let the zero initialization wash out.
    """
    if spec.q == 0:
        return pearson_residuals(series, spec, max_lag=max_lag)
    if spec.innovation.variance <= 0.0:
        raise ValueError("innovation variance must be positive")
    x = np.asarray(series, dtype=float)
    p, q = spec.p, spec.q
    skip = max(p, q)
    if x.size <= 2 * skip:
        raise ValueError(f"series of length {x.size} is too short for "
                         f"(p, q) = ({p}, {q})")
    mu_eps = spec.innovation.mean
    eps = np.zeros(x.size)
    z = np.zeros(x.size)
    for t in range(skip, x.size):
        zt = 0.0
        for i, a in enumerate(spec.alphas, start=1):
            zt += a * x[t - i]
        for j, b in enumerate(spec.betas, start=1):
            zt += b * (eps[t - j] + mu_eps)
        z[t] = zt
        eps[t] = x[t] - mu_eps - zt
    z = z[skip:]
    fr = z - np.floor(z)
    fr = np.where((fr < SNAP_TOL) | (fr > 1.0 - SNAP_TOL), 0.0, fr)
    var = spec.innovation.variance + fr * (1.0 - fr)
    residuals = (x[skip:] - mu_eps - z) / np.sqrt(var)
    return _report(residuals, max_lag)


def _report(residuals: np.ndarray, max_lag: int) -> ResidualReport:
    return ResidualReport(
        residuals=residuals,
        mean=float(residuals.mean()),
        variance=float(residuals.var()),
        acf=sample_acf(residuals, max_lag),
        significance_band=1.96 / math.sqrt(residuals.size),
    )
