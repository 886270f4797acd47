"""Integer ARMA models driven by mean-preserving rounding.

The process is ``X_t = eps_t + <Z_{t-1}>`` where
``Z_{t-1} = sum_i alpha_i X_{t-i} + sum_j beta_j eps_{t-j}`` is the usual
linear ARMA combination of past values and innovations, and ``< >`` is the
mean-preserving rounding operator executed independently of the history.
This module provides model validation, simulation, conditional and
unconditional moments, autocovariance envelopes, and the one-step
conditional distribution of the pure autoregressive case.

Histories are always passed most-recent-first: ``x_hist[0]`` is ``X_{t-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericalError, UnsupportedModelError
from .innovations import InnovationModel
from .rounding import _floor_frac, round_dist

__all__ = [
    "MrarmaSpec",
    "StationarityCheck",
    "SimOutput",
    "YuleWalkerBands",
    "check_stationary",
    "check_invertible",
    "simulate",
    "cond_mean",
    "cond_var",
    "uncond_mean",
    "yule_walker",
    "transition_pmf",
    "cond_pgf",
]

_RADIUS_TOL = 1e-10


@dataclass(frozen=True)
class MrarmaSpec:
    """Model order, coefficients and innovation law.

    ``alphas`` are the autoregressive coefficients (lag 1 first), ``betas``
    the moving-average coefficients. Construction validates shapes and
    finiteness; stationarity and invertibility are reported by
    :func:`check_stationary` / :func:`check_invertible` rather than enforced,
    so degenerate parametrizations (e.g. a trailing zero coefficient) remain
    usable in experiments.
    """

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    innovation: InnovationModel

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        for c in (*self.alphas, *self.betas):
            if not math.isfinite(c):
                raise ValueError(f"non-finite model coefficient {c}")
        if not isinstance(self.innovation, InnovationModel):
            raise TypeError("innovation must implement InnovationModel")

    @property
    def p(self) -> int:
        return len(self.alphas)

    @property
    def q(self) -> int:
        return len(self.betas)

    @property
    def is_stationary(self) -> bool:
        return check_stationary(self).satisfied

    @property
    def is_invertible(self) -> bool:
        return check_invertible(self)


@dataclass(frozen=True)
class StationarityCheck:
    satisfied: bool
    spectral_radius: float


@dataclass(frozen=True)
class SimOutput:
    """A simulated path plus everything needed to reproduce it."""

    series: np.ndarray
    innovations_used: np.ndarray
    seed: int | None
    burnin: int


def _companion_radius(alphas: Sequence[float]) -> float:
    """Spectral radius of the companion matrix of the AR coefficients."""
    p = len(alphas)
    if p == 0:
        return 0.0
    companion = np.zeros((p, p))
    companion[0, :] = alphas
    if p > 1:
        companion[np.arange(1, p), np.arange(0, p - 1)] = 1.0
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def check_stationary(spec: MrarmaSpec) -> StationarityCheck:
    """Spectral-radius stationarity check of the autoregressive part.

    The moving-average part does not change the radius, so only the p x p
    companion matrix of the alphas is examined. Satisfied means the radius
    is below ``1 - 1e-10``.
    """
    radius = _companion_radius(spec.alphas)
    return StationarityCheck(satisfied=radius < 1.0 - _RADIUS_TOL,
                             spectral_radius=radius)


def check_invertible(spec: MrarmaSpec) -> bool:
    """True iff all roots of 1 - beta_1 z - ... - beta_q z^q lie outside
    the unit circle (trivially true for q = 0)."""
    betas = np.asarray(spec.betas, dtype=float)
    if betas.size == 0 or not np.any(betas):
        return True
    coeffs = np.concatenate([-betas[::-1], [1.0]])  # highest degree first
    roots = np.roots(coeffs)
    if roots.size == 0:
        return True
    return bool(np.min(np.abs(roots)) > 1.0 + _RADIUS_TOL)


def simulate(spec: MrarmaSpec, n: int, burnin: int = 250, seed=0,
             force: bool = False) -> SimOutput:
    """Simulate ``n`` observations after discarding ``burnin`` warm-up steps.

    The recursion starts from zero pre-sample history (both observations and
    innovations). ``seed`` may be an integer (recorded in the output) or a
    numpy ``Generator``. Non-stationary specs are rejected unless
    ``force=True``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burnin < 0:
        raise ValueError(f"burnin must be >= 0, got {burnin}")
    if not force:
        chk = check_stationary(spec)
        if not chk.satisfied:
            raise ValueError(
                f"spectral radius {chk.spectral_radius:.6f} >= 1: spec is not "
                f"stationary (pass force=True to simulate anyway)")
    if isinstance(seed, np.random.Generator):
        rng, seed_out = seed, None
    else:
        seed_out = int(seed)
        rng = np.random.default_rng(seed_out)

    p, q = spec.p, spec.q
    alphas = list(spec.alphas)
    betas = list(spec.betas)
    total = burnin + n
    eps = spec.innovation.sample(rng, size=total).tolist()
    uniform = rng.random(total).tolist()
    x: list[int] = []
    for t in range(total):
        z = 0.0
        for i in range(p):
            idx = t - 1 - i
            if idx >= 0:
                z += alphas[i] * x[idx]
        for j in range(q):
            idx = t - 1 - j
            if idx >= 0:
                z += betas[j] * eps[idx]
        fl, fr = _floor_frac(z)
        x.append(eps[t] + fl + (1 if uniform[t] < fr else 0))
    return SimOutput(series=np.asarray(x[burnin:], dtype=np.int64),
                     innovations_used=np.asarray(eps[burnin:], dtype=np.int64),
                     seed=seed_out, burnin=burnin)


def _check_history(spec: MrarmaSpec, x_hist, eps_hist):
    x_hist = np.asarray(x_hist, dtype=float)
    eps_hist = np.asarray([] if eps_hist is None else eps_hist, dtype=float)
    if x_hist.size < spec.p:
        raise ValueError(f"need at least p={spec.p} past observations, "
                         f"got {x_hist.size}")
    if eps_hist.size < spec.q:
        raise ValueError(f"need at least q={spec.q} past innovations, "
                         f"got {eps_hist.size}")
    return x_hist, eps_hist


def _z_value(spec: MrarmaSpec, x_hist, eps_hist) -> float:
    """Linear combination Z_{t-1} entering the rounding operator."""
    x_hist, eps_hist = _check_history(spec, x_hist, eps_hist)
    z = 0.0
    for i, a in enumerate(spec.alphas):
        z += a * x_hist[i]
    for j, b in enumerate(spec.betas):
        z += b * eps_hist[j]
    return z


def cond_mean(spec: MrarmaSpec, x_hist, eps_hist=None) -> float:
    """One-step conditional mean: innovation mean plus the linear ARMA part.

    Histories are most-recent-first. Shared by the independent-rounding
    variant model, whose conditional mean is identical.
    """
    return spec.innovation.mean + _z_value(spec, x_hist, eps_hist)


def cond_var(spec: MrarmaSpec, x_hist, eps_hist=None) -> float:
    """One-step conditional variance: innovation variance plus the rounding
    variance ``frac(Z) * (1 - frac(Z))``; always within
    ``[sigma_eps^2, sigma_eps^2 + 0.25]``."""
    z = _z_value(spec, x_hist, eps_hist)
    _, fr = _floor_frac(z)
    return spec.innovation.variance + fr * (1.0 - fr)


def uncond_mean(spec: MrarmaSpec) -> float:
    """Stationary mean ``mu_eps (1 + sum betas) / (1 - sum alphas)``."""
    alpha_sum = sum(spec.alphas)
    if alpha_sum >= 1.0:
        raise ValueError(f"sum of AR coefficients is {alpha_sum} >= 1; "
                         f"the stationary mean is undefined")
    return spec.innovation.mean * (1.0 + sum(spec.betas)) / (1.0 - alpha_sum)


@dataclass(frozen=True)
class YuleWalkerBands:
    """Autocovariance envelopes over the unidentified rounding-variance term.

    The stationary variance contains the expected rounding variance
    ``E[frac(Z)(1 - frac(Z))]``, which has no closed form but lies in
    [0, 0.25]. ``gamma_lower`` substitutes 0 and ``gamma_upper`` 0.25; the
    labels order the variance ``gamma[0]``, while signed covariances at
    higher lags may order either way. Autocorrelation ratios coincide across
    the two substitutions for pure AR models.
    """

    gamma_lower: np.ndarray
    gamma_upper: np.ndarray
    mixed_cov: np.ndarray

    @property
    def acf_lower(self) -> np.ndarray:
        return self.gamma_lower / self.gamma_lower[0]

    @property
    def acf_upper(self) -> np.ndarray:
        return self.gamma_upper / self.gamma_upper[0]


def _mixed_covariances(spec: MrarmaSpec, max_s: int) -> np.ndarray:
    """c(s) = Cov[X_r, eps_{r-s}] for s = 0..max_s.

    c(0) is the innovation variance; later values follow the linear
    recursion in the AR coefficients with a moving-average source term.
    """
    sigma2 = spec.innovation.variance
    c = np.zeros(max_s + 1)
    c[0] = sigma2
    for s in range(1, max_s + 1):
        acc = 0.0
        for i, a in enumerate(spec.alphas, start=1):
            if s - i >= 0:
                acc += a * c[s - i]
        if s <= spec.q:
            acc += spec.betas[s - 1] * sigma2
        c[s] = acc
    return c


def _gamma_with_rounding_var(spec: MrarmaSpec, max_lag: int, kappa: float,
                             c: np.ndarray) -> np.ndarray:
    """Solve the autocovariance system with E[frac(Z)(1-frac(Z))] = kappa.

    For lag h >= 1 the covariance of the conditional mean with X_{t-h}
    gives ``gamma(h) = sum_i alpha_i gamma(h-i) + sum_{j>=h} beta_j c(j-h)``
    (innovations later than t-h are uncorrelated with X_{t-h}). The variance
    equation expands Var[Z_{t-1}] into gammas, innovation variances and the
    mixed covariances.
    """
    p, q = spec.p, spec.q
    alphas, betas = spec.alphas, spec.betas
    sigma2 = spec.innovation.variance

    def ma_source(h: int) -> float:
        return sum(betas[j - 1] * c[j - h] for j in range(h, q + 1))

    # variance equation: gamma(0) - sum_{i,i'} a_i a_i' gamma(|i-i'|) = rhs0
    rhs0 = sigma2 + kappa
    rhs0 += sum(b * b for b in betas) * sigma2
    for i in range(1, p + 1):
        for j in range(i, q + 1):
            rhs0 += 2.0 * alphas[i - 1] * betas[j - 1] * c[j - i]

    if p == 0:
        gamma = np.zeros(max_lag + 1)
        gamma[0] = rhs0
        for h in range(1, max_lag + 1):
            gamma[h] = ma_source(h)
        return gamma

    size = p + 1
    system = np.zeros((size, size))
    rhs = np.zeros(size)
    system[0, 0] = 1.0
    for i in range(1, p + 1):
        for i2 in range(1, p + 1):
            system[0, abs(i - i2)] -= alphas[i - 1] * alphas[i2 - 1]
    rhs[0] = rhs0
    for h in range(1, p + 1):
        system[h, h] += 1.0
        for i in range(1, p + 1):
            system[h, abs(h - i)] -= alphas[i - 1]
        rhs[h] = ma_source(h)
    try:
        head = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "autocovariance system is singular (spectral radius at 1?)") from exc

    gamma = np.zeros(max(max_lag, p) + 1)
    gamma[:p + 1] = head
    for h in range(p + 1, max_lag + 1):
        gamma[h] = sum(alphas[i - 1] * gamma[h - i] for i in range(1, p + 1))
        gamma[h] += ma_source(h)
    return gamma[:max_lag + 1]


def yule_walker(spec: MrarmaSpec, max_lag: int) -> YuleWalkerBands:
    """Autocovariances gamma(0..max_lag) as lower/upper envelopes.

    Requires a stationary spec; raises
    :class:`~mrarma.errors.NumericalError` when the linear system is
    singular (spectral radius numerically at 1).
    """
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}")
    chk = check_stationary(spec)
    if not chk.satisfied:
        raise NumericalError(
            f"Yule-Walker system needs a stationary spec "
            f"(spectral radius {chk.spectral_radius:.6f})")
    c = _mixed_covariances(spec, max(spec.q, max_lag))
    lower = _gamma_with_rounding_var(spec, max_lag, 0.0, c)
    upper = _gamma_with_rounding_var(spec, max_lag, 0.25, c)
    return YuleWalkerBands(gamma_lower=lower, gamma_upper=upper, mixed_cov=c)


def _require_pure_ar(spec: MrarmaSpec, what: str):
    if spec.q != 0:
        raise UnsupportedModelError(
            f"{what} needs the latent innovation history for q > 0; "
            f"it is available for pure AR models only")


def transition_pmf(spec: MrarmaSpec, x_hist, x):
    """One-step conditional pmf P(X_t = x | history) of a pure AR model.

    With ``z`` the AR combination of the history, the observation is
    ``x`` when the innovation hits ``x - floor(z)`` (rounding down) or
    ``x - floor(z) - 1`` (rounding up). Accepts scalar or array ``x``.
    """
    _require_pure_ar(spec, "the conditional pmf")
    z = _z_value(spec, x_hist, None)
    fl, fr = _floor_frac(z)
    xs = np.asarray(x)
    pmf = spec.innovation.pmf
    out = (1.0 - fr) * pmf(xs - fl) + fr * pmf(xs - fl - 1)
    return float(out) if xs.ndim == 0 else out


def cond_pgf(spec: MrarmaSpec, x_hist, s: float) -> float:
    """Conditional pgf of a pure AR model: innovation pgf times the rounding
    two-point pgf, for ``s`` in (0, 1]."""
    _require_pure_ar(spec, "the conditional pgf")
    if not (0.0 < s <= 1.0):
        raise ValueError(f"pgf argument must be in (0, 1], got {s}")
    z = _z_value(spec, x_hist, None)
    return spec.innovation.pgf(s) * round_dist(z).pgf(s)
