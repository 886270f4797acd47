"""Parameter estimation and model selection.

Four routes are provided. Method of moments and conditional least squares
need only the autocovariance structure and the linear conditional mean, so
they work for any innovation law. Conditional maximum likelihood uses the
exact one-step transition probabilities of the pure autoregressive model,
with approximate standard errors from the inverse Hessian and information
criteria corrected by ``n / (n - p)`` for the conditioning on the first
``p`` observations. Mixed models are fitted by three-stage least squares
(long autoregression for residuals, lagged regression, then generalized
least squares with a moving-average error covariance, iterated to
convergence).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (InsufficientDataError, NonConvergenceError, NumericalError,
                     ZeroVarianceError)
from .innovations import Skellam
from .model import MrarmaSpec, _companion_radius
from .rounding import SNAP_TOL

__all__ = [
    "FitResult",
    "InfoCriteria",
    "sample_acvf",
    "fit_mm_mrar",
    "fit_cls_mrar",
    "loglik_mrar",
    "fit_mle_mrar",
    "mle_se",
    "aic_bic",
    "fit_3sls_mrarma",
]

_LOG_FLOOR = 1e-300
_LAMBDA_CLIP = 1e-6
_RADIUS_BARRIER = 1e-8


@dataclass
class FitResult:
    """Estimates plus fit diagnostics, serializable to a stable JSON document.

    ``se`` is present only for converged maximum likelihood fits whose
    Hessian inverted successfully; ``aic``/``bic`` are present exactly when
    ``loglik`` is.
    """

    method: str
    p: int
    q: int
    estimates: dict[str, float]
    se: dict[str, float] | None = None
    loglik: float | None = None
    aic: float | None = None
    bic: float | None = None
    converged: bool = True
    iterations: int = 0
    warnings: list[str] = field(default_factory=list)

    def alphas(self) -> tuple[float, ...]:
        return tuple(self.estimates[f"alpha{i}"] for i in range(1, self.p + 1))

    def betas(self) -> tuple[float, ...]:
        return tuple(self.estimates[f"beta{j}"] for j in range(1, self.q + 1))

    def spec(self) -> MrarmaSpec:
        """Rebuild the fitted model; needs Skellam innovation parameters."""
        if "lambda1" not in self.estimates or "lambda2" not in self.estimates:
            raise ValueError("fit has no innovation parameters to rebuild a spec")
        innovation = Skellam(self.estimates["lambda1"], self.estimates["lambda2"])
        return MrarmaSpec(alphas=self.alphas(), betas=self.betas(),
                          innovation=innovation)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "p": self.p,
            "q": self.q,
            "estimates": dict(self.estimates),
            "se": dict(self.se) if self.se is not None else None,
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "converged": self.converged,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "FitResult":
        return cls(method=doc["method"], p=doc["p"], q=doc["q"],
                   estimates=dict(doc["estimates"]),
                   se=dict(doc["se"]) if doc.get("se") is not None else None,
                   loglik=doc.get("loglik"), aic=doc.get("aic"),
                   bic=doc.get("bic"), converged=doc.get("converged", True),
                   iterations=doc.get("iterations", 0),
                   warnings=list(doc.get("warnings", [])))

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        return cls.from_dict(json.loads(text))


class InfoCriteria(NamedTuple):
    aic: float
    bic: float


def _validate_series(series) -> np.ndarray:
    x = np.asarray(series)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("series must be a non-empty one-dimensional array")
    if not np.issubdtype(x.dtype, np.integer):
        as_int = np.asarray(np.rint(x), dtype=np.int64)
        if not np.array_equal(as_int, x):
            raise ValueError("series must be integer-valued")
        x = as_int
    return x.astype(np.int64)


def sample_acvf(series, max_lag: int) -> np.ndarray:
    """Sample autocovariances gamma_hat(0..max_lag) with the 1/n convention."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n <= max_lag + 1:
        raise ValueError(f"series of length {n} is too short for lag {max_lag}")
    xc = x - x.mean()
    gamma = np.array([float(xc[:n - h] @ xc[h:]) / n for h in range(max_lag + 1)])
    if gamma[0] == 0.0:
        raise ZeroVarianceError("constant series has zero sample variance")
    return gamma


def _skellam_from_moments(mu: float, sigma2: float,
                          warnings: list[str]) -> tuple[float, float]:
    """Moment-matched Skellam rates, clipped to stay positive."""
    lam1 = (sigma2 + mu) / 2.0
    lam2 = (sigma2 - mu) / 2.0
    if lam1 <= 0.0 or lam2 <= 0.0:
        warnings.append(
            f"moment estimates (mean {mu:.4f}, variance {sigma2:.4f}) leave "
            f"a non-positive Skellam rate; clipped to {_LAMBDA_CLIP}")
        lam1 = max(lam1, _LAMBDA_CLIP)
        lam2 = max(lam2, _LAMBDA_CLIP)
    return lam1, lam2


def _named_estimates(alphas, betas, mu_eps, sigma2_eps, innovation,
                     warnings) -> dict[str, float]:
    est: dict[str, float] = {}
    for i, a in enumerate(alphas, start=1):
        est[f"alpha{i}"] = float(a)
    for j, b in enumerate(betas, start=1):
        est[f"beta{j}"] = float(b)
    est["mu_eps"] = float(mu_eps)
    est["sigma2_eps"] = float(sigma2_eps)
    if innovation == "skellam":
        lam1, lam2 = _skellam_from_moments(mu_eps, sigma2_eps, warnings)
        est["lambda1"] = lam1
        est["lambda2"] = lam2
    return est


def fit_mm_mrar(series, p: int, innovation: str = "skellam") -> FitResult:
    """Method-of-moments fit of a pure AR model.

    Solves the sample Yule-Walker system for the AR coefficients, inverts
    the stationary-mean formula for the innovation mean, and recovers the
    innovation variance from the variance equation with the rounding-
    variance term at its lower extreme.
    """
    x = _validate_series(series)
    n = x.size
    if n < 10 * (p + 1):
        raise InsufficientDataError(f"need at least {10 * (p + 1)} observations "
                                    f"for p={p}, got {n}")
    warnings: list[str] = []
    gamma = sample_acvf(x, p)
    xbar = float(x.mean())
    if p == 0:
        alphas: tuple[float, ...] = ()
        mu_eps = xbar
        sigma2 = float(gamma[0])
    else:
        system = scipy.linalg.toeplitz(gamma[:p])
        try:
            alphas = tuple(np.linalg.solve(system, gamma[1:p + 1]))
        except np.linalg.LinAlgError as exc:
            raise NumericalError("sample Yule-Walker system is singular") from exc
        mu_eps = xbar * (1.0 - sum(alphas))
        var_z = sum(alphas[i] * alphas[j] * gamma[abs(i - j)]
                    for i in range(p) for j in range(p))
        sigma2 = float(gamma[0] - var_z)
    if sigma2 <= 0.0:
        warnings.append(f"variance recovery gave {sigma2:.4e}; clipped")
        sigma2 = _LAMBDA_CLIP
    estimates = _named_estimates(alphas, (), mu_eps, sigma2, innovation, warnings)
    return FitResult(method="mm", p=p, q=0, estimates=estimates,
                     warnings=warnings)


def _lag_design(x: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Response x_t and design [1, x_{t-1}, ..., x_{t-p}] for t = p..n-1."""
    n = x.size
    cols = [np.ones(n - p)]
    for i in range(1, p + 1):
        cols.append(x[p - i:n - i].astype(float))
    return x[p:].astype(float), np.column_stack(cols)


def _rounding_var_mean(z: np.ndarray) -> float:
    """Average two-point rounding variance of the fitted linear parts."""
    fr = z - np.floor(z)
    fr = np.where((fr < SNAP_TOL) | (fr > 1.0 - SNAP_TOL), 0.0, fr)
    return float(np.mean(fr * (1.0 - fr)))


def fit_cls_mrar(series, p: int, innovation: str = "skellam") -> FitResult:
    """Conditional least squares: closed-form regression of each value on a
    constant and its ``p`` predecessors.

    The innovation variance is the residual mean square minus the average
    rounding variance of the fitted linear parts, since the one-step
    variance exceeds the innovation variance by ``frac(Z)(1 - frac(Z))``.
    """
    x = _validate_series(series)
    n = x.size
    if n < 10 * (p + 1):
        raise InsufficientDataError(f"need at least {10 * (p + 1)} observations "
                                    f"for p={p}, got {n}")
    warnings: list[str] = []
    y, design = _lag_design(x, p)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise NumericalError("collinear regression design (constant series?)")
    mu_eps = float(coef[0])
    alphas = tuple(float(a) for a in coef[1:])
    resid = y - design @ coef
    mse = float(np.mean(resid ** 2))
    z_hat = design[:, 1:] @ np.asarray(alphas) if p else np.zeros_like(y)
    sigma2 = mse - _rounding_var_mean(z_hat)
    if sigma2 <= 0.0:
        warnings.append(f"variance recovery gave {sigma2:.4e}; clipped")
        sigma2 = _LAMBDA_CLIP
    estimates = _named_estimates(alphas, (), mu_eps, sigma2, innovation, warnings)
    return FitResult(method="cls", p=p, q=0, estimates=estimates,
                     warnings=warnings)


def _per_term_log_probs(x: np.ndarray, alphas: tuple[float, ...],
                        innovation) -> np.ndarray:
    """Log transition probabilities ln P(X_t | X_{t-1..t-p}) for t = p..n-1."""
    p = len(alphas)
    n = x.size
    if n <= p:
        raise ValueError(f"series of length {n} has no terms beyond p={p}")
    if p == 0:
        probs = np.asarray(innovation.pmf(x), dtype=float)
    else:
        z = np.zeros(n - p)
        for i, a in enumerate(alphas, start=1):
            z += a * x[p - i:n - i]
        floor = np.floor(z)
        fr = z - floor
        snap_up = fr > 1.0 - SNAP_TOL
        floor = np.where(snap_up, floor + 1.0, floor)
        fr = np.where((fr < SNAP_TOL) | snap_up, 0.0, fr)
        k_low = x[p:] - floor.astype(np.int64)
        probs = ((1.0 - fr) * np.asarray(innovation.pmf(k_low), dtype=float)
                 + fr * np.asarray(innovation.pmf(k_low - 1), dtype=float))
    return np.log(np.maximum(probs, _LOG_FLOOR))


def loglik_mrar(series, spec: MrarmaSpec) -> float:
    """Conditional log-likelihood of a pure AR spec: the sum of log one-step
    transition probabilities over all terms with a full history."""
    if spec.q != 0:
        raise ValueError("the conditional likelihood is defined for pure AR "
                         "models only")
    x = _validate_series(series)
    return float(np.sum(_per_term_log_probs(x, spec.alphas, spec.innovation)))


def _theta_neg_loglik(theta: np.ndarray, x: np.ndarray, p: int) -> float:
    """Negative log-likelihood over (alphas, log lambda1, log lambda2) with a
    stationarity barrier."""
    alphas = tuple(theta[:p])
    log_l1, log_l2 = theta[p], theta[p + 1]
    if abs(log_l1) > 30.0 or abs(log_l2) > 30.0:
        return 1e12
    radius = _companion_radius(alphas)
    if radius >= 1.0 - _RADIUS_BARRIER:
        return 1e10 * (1.0 + radius)
    innovation = Skellam(math.exp(log_l1), math.exp(log_l2))
    return -float(np.sum(_per_term_log_probs(x, alphas, innovation)))


def _shrink_to_stationary(alphas: np.ndarray) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    while _companion_radius(tuple(alphas)) >= 1.0 - 1e-6:
        alphas = alphas * 0.95
    return alphas


def fit_mle_mrar(series, p: int, start: FitResult | dict | None = None,
                 innovation: str = "skellam") -> FitResult:
    """Conditional maximum likelihood for a pure AR model with Skellam
    innovations.

    The rates are optimized on the log scale and candidate AR coefficients
    whose companion spectral radius reaches 1 are rejected by a barrier.
    Quasi-Newton first (gradient tolerance 1e-6, at most 500 iterations),
    Nelder-Mead fallback (2000 evaluations); starting values come from the
    conditional least squares fit unless supplied. Raises
    :class:`~mrarma.errors.NonConvergenceError` carrying the best point when
    both optimizers fail.
    """
    if innovation != "skellam":
        raise ValueError("maximum likelihood is implemented for Skellam "
                         "innovations")
    x = _validate_series(series)
    n = x.size
    if n < 10 * (p + 2):
        raise InsufficientDataError(f"need at least {10 * (p + 2)} observations "
                                    f"for p={p}, got {n}")
    if start is None:
        start_fit = fit_cls_mrar(x, p)
        start_est = start_fit.estimates
    elif isinstance(start, FitResult):
        start_est = start.estimates
    else:
        start_est = dict(start)
    alphas0 = _shrink_to_stationary(
        [start_est.get(f"alpha{i}", 0.0) for i in range(1, p + 1)])
    lam1_0 = max(start_est.get("lambda1", 1.0), 1e-3)
    lam2_0 = max(start_est.get("lambda2", 1.0), 1e-3)
    theta0 = np.concatenate([alphas0, [math.log(lam1_0), math.log(lam2_0)]])

    result = scipy.optimize.minimize(
        _theta_neg_loglik, theta0, args=(x, p), method="L-BFGS-B",
        options={"maxiter": 500, "gtol": 1e-6, "ftol": 1e-12})
    iterations = int(result.nit)
    converged = bool(result.success)
    best_theta, best_fun = result.x, float(result.fun)
    if not converged:
        fallback = scipy.optimize.minimize(
            _theta_neg_loglik, best_theta, args=(x, p), method="Nelder-Mead",
            options={"maxfev": 2000, "xatol": 1e-8, "fatol": 1e-10})
        iterations += int(fallback.nit)
        if float(fallback.fun) <= best_fun:
            best_theta, best_fun = fallback.x, float(fallback.fun)
        converged = bool(fallback.success)

    alphas = tuple(float(a) for a in best_theta[:p])
    lam1 = math.exp(float(best_theta[p]))
    lam2 = math.exp(float(best_theta[p + 1]))
    loglik = -best_fun
    criteria = aic_bic(loglik, n, p, k_params=p + 2)
    estimates = {f"alpha{i}": a for i, a in enumerate(alphas, start=1)}
    estimates.update({
        "lambda1": lam1,
        "lambda2": lam2,
        "mu_eps": lam1 - lam2,
        "sigma2_eps": lam1 + lam2,
    })
    fit = FitResult(method="mle", p=p, q=0, estimates=estimates,
                    loglik=loglik, aic=criteria.aic, bic=criteria.bic,
                    converged=converged, iterations=iterations)
    if not converged:
        raise NonConvergenceError(
            f"both optimizers failed after {iterations} iterations "
            f"(best loglik {loglik:.4f})", result=fit)
    se = mle_se(x, p, estimates)
    if se is not None:
        fit.se = se
    else:
        fit.warnings.append("Hessian not positive definite; no standard errors")
    return fit


def _fd_hessian(func, theta: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Central finite-difference Hessian of a scalar function."""
    dim = theta.size
    hessian = np.empty((dim, dim))
    f0 = func(theta)
    for i in range(dim):
        ei = np.zeros(dim)
        ei[i] = steps[i]
        hessian[i, i] = ((func(theta + ei) - 2.0 * f0 + func(theta - ei))
                         / steps[i] ** 2)
        for j in range(i + 1, dim):
            ej = np.zeros(dim)
            ej[j] = steps[j]
            hessian[i, j] = hessian[j, i] = (
                func(theta + ei + ej) - func(theta + ei - ej)
                - func(theta - ei + ej) + func(theta - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    return hessian


def mle_se(series, p: int, estimates: dict[str, float]) -> dict[str, float] | None:
    """Approximate standard errors from the inverse observed information.

    Central finite differences of the negative conditional log-likelihood on
    the natural parameter scale, step ``max(1e-4, 1e-4 |theta_i|)`` per
    coordinate. Returns None when the Hessian is not positive definite or
    cannot be inverted, mirroring models whose rounding makes the
    information matrix singular.
    """
    x = _validate_series(series)
    names = [f"alpha{i}" for i in range(1, p + 1)] + ["lambda1", "lambda2"]
    theta = np.array([estimates[name] for name in names], dtype=float)

    def neg_loglik(th: np.ndarray) -> float:
        lam1, lam2 = th[p], th[p + 1]
        if lam1 <= 0.0 or lam2 <= 0.0:
            return math.inf
        innovation = Skellam(lam1, lam2)
        return -float(np.sum(_per_term_log_probs(x, tuple(th[:p]), innovation)))

    steps = np.maximum(1e-4, 1e-4 * np.abs(theta))
    # rate steps must keep lambda positive
    steps[p] = min(steps[p], theta[p] / 2.0)
    steps[p + 1] = min(steps[p + 1], theta[p + 1] / 2.0)
    try:
        hessian = _fd_hessian(neg_loglik, theta, steps)
    except (ValueError, FloatingPointError):
        return None
    if not np.all(np.isfinite(hessian)):
        return None
    eigenvalues = np.linalg.eigvalsh(hessian)
    if eigenvalues.min() <= 0.0:
        return None
    diag = np.diag(np.linalg.inv(hessian))
    if np.any(diag <= 0.0):
        return None
    return {name: float(math.sqrt(v)) for name, v in zip(names, diag)}


def aic_bic(loglik_max: float, n: int, p: int, k_params: int) -> InfoCriteria:
    """Information criteria from the corrected log-likelihood
    ``(n / (n - p)) * loglik_max``; the BIC penalty uses ``ln n`` with the
    full sample length."""
    if n <= p:
        raise ValueError(f"need n > p, got n={n}, p={p}")
    corrected = loglik_max * n / (n - p)
    return InfoCriteria(aic=-2.0 * corrected + 2.0 * k_params,
                        bic=-2.0 * corrected + k_params * math.log(n))


def _ma_error_bands(betas: np.ndarray, sigma2: float, rows: int) -> np.ndarray:
    """Upper banded form of the Toeplitz covariance of MA(q) errors."""
    full = np.concatenate([[1.0], betas])
    q = betas.size
    bands = np.zeros((q + 1, rows))
    for h in range(q + 1):
        acov = sigma2 * float(full[:q + 1 - h] @ full[h:])
        bands[q - h, h:] = acov
    return bands


def fit_3sls_mrarma(series, p: int, q: int, max_iter: int = 50,
                    tol: float = 1e-8, ar_order: int | None = None,
                    innovation: str = "skellam") -> FitResult:
    """Three-stage least squares for mixed-order models, iterated.

    Stage 1 fits a long autoregression (order ``floor(sqrt(n))`` unless
    overridden) to extract innovation residuals. Stage 2 regresses the
    observation minus its residual on lagged observations and lagged
    residuals. Stage 3 re-estimates by generalized least squares with the
    Toeplitz covariance of a moving-average error process built from the
    stage-2 coefficients. The residual sequence is then recomputed from the
    current coefficients and stages 2-3 repeat until the largest coefficient
    change drops below ``tol`` or ``max_iter`` passes.
    """
    if q < 1:
        raise ValueError("three-stage least squares targets q >= 1; use the "
                         "pure-AR fitters otherwise")
    x = _validate_series(series)
    n = x.size
    order1 = int(math.isqrt(n)) if ar_order is None else int(ar_order)
    if order1 < 1:
        raise InsufficientDataError(f"stage-1 order {order1} < 1")
    if order1 >= n / 4:
        raise InsufficientDataError(
            f"stage-1 order {order1} >= n/4 = {n / 4:.0f}; series too short")
    warnings: list[str] = []

    y1, design1 = _lag_design(x, order1)
    coef1, _, rank1, _ = np.linalg.lstsq(design1, y1, rcond=None)
    if rank1 < design1.shape[1]:
        raise NumericalError("stage-1 autoregression design is collinear")
    eps_hat = np.zeros(n)
    eps_hat[order1:] = y1 - design1 @ coef1

    start = order1 + max(p, q)
    rows = n - start
    if rows < 10 * (p + q + 1):
        raise InsufficientDataError(
            f"only {rows} usable observations after stage 1; need "
            f"{10 * (p + q + 1)}")

    def build_regression(eps: np.ndarray):
        response = x[start:].astype(float) - eps[start:]
        cols = [np.ones(rows)]
        for i in range(1, p + 1):
            cols.append(x[start - i:n - i].astype(float))
        for j in range(1, q + 1):
            cols.append(eps[start - j:n - j])
        return response, np.column_stack(cols)

    def recompute_residuals(intercept: float, alphas, betas) -> np.ndarray:
        eps = np.zeros(n)
        xs = x.astype(float)
        for t in range(max(p, q), n):
            value = xs[t] - intercept
            for i in range(1, p + 1):
                value -= alphas[i - 1] * xs[t - i]
            for j in range(1, q + 1):
                value -= betas[j - 1] * eps[t - j]
            eps[t] = value
        return eps

    intercept = 0.0
    alphas = np.zeros(p)
    betas = np.zeros(q)
    previous = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        response, design = build_regression(eps_hat)
        coef2, _, rank2, _ = np.linalg.lstsq(design, response, rcond=None)
        if rank2 < design.shape[1]:
            raise NumericalError("stage-2 regression design is collinear")
        resid2 = response - design @ coef2
        sigma2_u = float(np.mean(resid2 ** 2))
        betas2 = coef2[1 + p:]
        try:
            bands = _ma_error_bands(betas2, max(sigma2_u, 1e-12), rows)
            solved = scipy.linalg.solveh_banded(
                bands, np.column_stack([design, response]), lower=False)
            weighted_design = solved[:, :-1]
            weighted_response = solved[:, -1]
            coef = np.linalg.solve(design.T @ weighted_design,
                                   design.T @ weighted_response)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            warnings.append("singular generalized-LS covariance; kept the "
                            "stage-2 estimates")
            coef = coef2
            intercept, alphas, betas = coef[0], coef[1:1 + p], coef[1 + p:]
            break
        intercept, alphas, betas = coef[0], coef[1:1 + p], coef[1 + p:]
        current = np.concatenate([alphas, betas])
        if previous is not None and np.max(np.abs(current - previous)) < tol:
            converged = True
            break
        previous = current
        eps_hat = recompute_residuals(intercept, alphas, betas)

    beta_sum = 1.0 + float(betas.sum())
    mu_eps = float(intercept) / beta_sum if abs(beta_sum) > 1e-10 else float("nan")
    final_eps = recompute_residuals(intercept, alphas, betas)
    used = final_eps[start:]
    z_hat = np.zeros(rows)
    xs = x.astype(float)
    for i in range(1, p + 1):
        z_hat += alphas[i - 1] * xs[start - i:n - i]
    for j in range(1, q + 1):
        z_hat += betas[j - 1] * (final_eps[start - j:n - j] + mu_eps)
    sigma2 = float(np.var(used)) - _rounding_var_mean(z_hat)
    if not math.isfinite(sigma2) or sigma2 <= 0.0:
        warnings.append(f"variance recovery gave {sigma2:.4e}; clipped")
        sigma2 = _LAMBDA_CLIP
    estimates = _named_estimates(tuple(alphas), tuple(betas), mu_eps, sigma2,
                                 innovation, warnings)
    return FitResult(method="ls3", p=p, q=q, estimates=estimates,
                     converged=converged, iterations=iterations,
                     warnings=warnings)
