"""Numerical stationary marginal distributions.

The first-order autoregressive model is a Markov chain on the integers, so
its stationary law follows from the invariance equations of a truncated
transition matrix. The first-order moving-average marginal is a direct
convolution of the innovation law with the rounded, scaled innovation. Both
routes expose the truncation so its adequacy can be tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, WindowTooSmallError
from .innovations import InnovationModel
from .rounding import _floor_frac, scaled_round_pmf

__all__ = [
    "StationaryDist",
    "mrar1_transition_matrix",
    "solve_invariant",
    "mrar1_stationary",
    "mrma1_marginal",
    "exact_lag1_autocov",
]

_ROW_SUM_TOL = 1e-10
_BOUNDARY_MASS_TOL = 1e-12
_MAX_POWER_ITER = 100_000


@dataclass(frozen=True)
class StationaryDist:
    """Truncated pmf over a contiguous integer window with derived moments."""

    lo: int
    pmf: np.ndarray
    tail_bound: float

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + len(self.pmf))

    @property
    def mean(self) -> float:
        return float(self.pmf @ self.support)

    @property
    def variance(self) -> float:
        d = self.support - self.mean
        return float(self.pmf @ (d * d))

    def prob(self, x: int) -> float:
        idx = x - self.lo
        if 0 <= idx < len(self.pmf):
            return float(self.pmf[idx])
        return 0.0


def mrar1_transition_matrix(alpha1: float, innovation: InnovationModel,
                            window: tuple[int, int]) -> np.ndarray:
    """Row-stochastic transition matrix of the AR(1) chain on ``window``.

    Entry (y, x) is the probability of moving from state y to state x: the
    innovation must land on ``x - floor(alpha1 * y)`` or one lower, weighted
    by the rounding law of ``alpha1 * y``. Raises
    :class:`~mrarma.errors.WindowTooSmallError` when any row leaks more than
    1e-10 of its mass outside the window.
    """
    if not abs(alpha1) < 1.0:
        raise ValueError(f"|alpha1| must be < 1, got {alpha1}")
    lo, hi = window
    if hi < lo:
        raise ValueError(f"empty window {window}")
    states = np.arange(lo, hi + 1)
    matrix = np.empty((len(states), len(states)))
    pmf = innovation.pmf
    for row, y in enumerate(states):
        fl, fr = _floor_frac(alpha1 * y)
        matrix[row] = (1.0 - fr) * pmf(states - fl) + fr * pmf(states - fl - 1)
    deficiency = 1.0 - matrix.sum(axis=1).min()
    if deficiency > _ROW_SUM_TOL:
        raise WindowTooSmallError(
            f"transition window {window} leaks {deficiency:.3e} > {_ROW_SUM_TOL} "
            f"of row mass; widen the window")
    return matrix


def _invariance_residual(pi: np.ndarray, matrix: np.ndarray) -> float:
    return float(np.abs(pi @ matrix - pi).sum())


def _power_iteration(matrix: np.ndarray, tol: float):
    """Power iteration with periodic componentwise Aitken extrapolation."""
    size = matrix.shape[0]
    pi = np.full(size, 1.0 / size)
    prev2 = prev1 = None
    for it in range(_MAX_POWER_ITER):
        nxt = pi @ matrix
        nxt /= nxt.sum()
        if _invariance_residual(nxt, matrix) < tol:
            return nxt, True
        if prev2 is not None and it % 5 == 0:
            delta1 = prev1 - prev2
            delta2 = nxt - 2.0 * prev1 + prev2
            safe = np.abs(delta2) > 1e-300
            accel = np.where(safe, prev2 - np.where(safe, delta1, 0.0) ** 2
                             / np.where(safe, delta2, 1.0), nxt)
            accel = np.clip(accel, 0.0, None)
            total = accel.sum()
            if total > 0.0:
                accel /= total
                if _invariance_residual(accel, matrix) < _invariance_residual(nxt, matrix):
                    nxt = accel
                    if _invariance_residual(nxt, matrix) < tol:
                        return nxt, True
        prev2, prev1, pi = prev1, nxt, nxt
    return pi, False


def _direct_solve(matrix: np.ndarray) -> np.ndarray:
    """Solve (P^T - I) pi = 0 with the normalization replacing one equation."""
    size = matrix.shape[0]
    system = matrix.T - np.eye(size)
    system[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("invariance system is singular") from exc
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def solve_invariant(matrix: np.ndarray, tol: float = 1e-10, lo: int = 0,
                    method: str = "auto") -> StationaryDist:
    """Stationary vector of a row-stochastic matrix, as a StationaryDist.

    ``method`` is ``"power"`` (power iteration with Aitken acceleration),
    ``"direct"`` (linear solve of the invariance equations plus
    normalization), or ``"auto"`` (power iteration, direct solve if it
    stalls). The result satisfies ``||pi P - pi||_1 < tol`` or a
    :class:`~mrarma.errors.NumericalError` is raised.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
    if method not in ("auto", "power", "direct"):
        raise ValueError(f"unknown method {method!r}")

    pi = None
    if method in ("auto", "power"):
        pi, converged = _power_iteration(matrix, tol)
        if not converged:
            if method == "power":
                raise NumericalError(
                    f"power iteration stalled after {_MAX_POWER_ITER} iterations "
                    f"(residual {_invariance_residual(pi, matrix):.3e})")
            pi = None
    if pi is None:
        pi = _direct_solve(matrix)
        residual = _invariance_residual(pi, matrix)
        if residual >= tol:
            raise NumericalError(
                f"invariance residual {residual:.3e} did not reach {tol}")
    deficiency = float(1.0 - matrix.sum(axis=1).min())
    boundary = float(pi[0] + pi[-1])
    return StationaryDist(lo=lo, pmf=pi, tail_bound=max(deficiency, boundary, 0.0))


def _mrar1_window(alpha1: float, innovation: InnovationModel,
                  widen: float = 1.0) -> tuple[int, int]:
    """Initial truncation window: mean +/- 10 upper-envelope standard
    deviations (at least 10 states each side), optionally widened."""
    mu = innovation.mean / (1.0 - alpha1)
    sd_up = math.sqrt((innovation.variance + 0.25) / (1.0 - alpha1 * alpha1))
    half = max(10.0 * sd_up, 10.0) * widen
    return (int(math.floor(mu - half)), int(math.ceil(mu + half)))


def mrar1_stationary(alpha1: float, innovation: InnovationModel,
                     tol: float = 1e-10, method: str = "auto") -> StationaryDist:
    """Stationary marginal law of the first-order autoregressive model.

    Chooses the truncation window automatically, widening geometrically
    until the rows lose less than 1e-10 mass and the boundary carries less
    than 1e-12 of the stationary mass.
    """
    widen = 1.0
    for _ in range(12):
        window = _mrar1_window(alpha1, innovation, widen)
        try:
            matrix = mrar1_transition_matrix(alpha1, innovation, window)
        except WindowTooSmallError:
            widen *= 1.5
            continue
        dist = solve_invariant(matrix, tol=tol, lo=window[0], method=method)
        if dist.pmf[0] + dist.pmf[-1] < _BOUNDARY_MASS_TOL:
            return dist
        widen *= 1.5
    raise NumericalError("stationary window did not stabilize after 12 widenings")


def mrma1_marginal(beta1: float, innovation: InnovationModel,
                   tail_tol: float = 1e-12) -> StationaryDist:
    """Stationary marginal law of the first-order moving-average model.

    P(X = x) = sum_k P(eps = x - k) P(<beta1 * eps> = k): a convolution of
    the innovation law with the rounded scaled innovation.
    """
    if not abs(beta1) < 1.0:
        raise ValueError(f"|beta1| must be < 1, got {beta1}")
    eps_lo, eps_hi = innovation.support_window(tail_tol)
    eps_support = np.arange(eps_lo, eps_hi + 1)
    eps_pmf = np.asarray(innovation.pmf(eps_support), dtype=float)
    eps_map = {int(k): float(v) for k, v in zip(eps_support, eps_pmf)}

    k_lo = math.floor(min(beta1 * eps_lo, beta1 * eps_hi)) - 1
    k_hi = math.ceil(max(beta1 * eps_lo, beta1 * eps_hi)) + 1
    k_support = np.arange(k_lo, k_hi + 1)
    k_pmf = np.array([scaled_round_pmf(beta1, eps_map, int(k)) for k in k_support])

    lo = eps_lo + k_lo
    hi = eps_hi + k_hi
    pmf = np.zeros(hi - lo + 1)
    for k, pk in zip(k_support, k_pmf):
        if pk > 0.0:
            pmf[(eps_support + k) - lo] += pk * eps_pmf
    tail = max(0.0, 1.0 - float(pmf.sum()))
    return StationaryDist(lo=int(lo), pmf=pmf, tail_bound=max(tail, tail_tol))


def exact_lag1_autocov(alpha1: float, innovation: InnovationModel,
                       tol: float = 1e-10) -> float:
    """Lag-1 autocovariance from the joint stationary law of the AR(1) chain.

    Computed by the full double sum over the stationary vector and the
    transition matrix; must agree with ``alpha1 * gamma(0)`` up to solver
    tolerance, which makes it an independent check of the autocovariance
    recursion.
    """
    widen = 1.0
    for _ in range(12):
        window = _mrar1_window(alpha1, innovation, widen)
        try:
            matrix = mrar1_transition_matrix(alpha1, innovation, window)
        except WindowTooSmallError:
            widen *= 1.5
            continue
        dist = solve_invariant(matrix, tol=tol, lo=window[0])
        if dist.pmf[0] + dist.pmf[-1] < _BOUNDARY_MASS_TOL:
            states = dist.support.astype(float)
            mu = dist.mean
            dev = states - mu
            return float(dev @ ((dist.pmf[:, None] * matrix) @ dev))
        widen *= 1.5
    raise NumericalError("stationary window did not stabilize after 12 widenings")
