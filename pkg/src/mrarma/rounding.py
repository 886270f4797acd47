"""Mean-preserving stochastic rounding.

A real number ``z`` is randomly mapped to ``floor(z)`` or ``floor(z) + 1``
with probabilities ``1 - frac(z)`` and ``frac(z)``, so that the expected
outcome equals ``z`` exactly. This module provides the exact two-point law
of that operation, sampling, and the distribution of ``<alpha * X>`` for an
integer-valued random variable ``X`` scaled by ``|alpha| < 1``.

All returned objects are immutable; samplers draw from an explicit numpy
``Generator`` and never touch global random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "SNAP_TOL",
    "FractionalSplit",
    "TwoPointDist",
    "split",
    "round_dist",
    "round_sample",
    "scaled_round_pmf",
]

# Fractional parts closer than SNAP_TOL to an integer are snapped to the
# degenerate (deterministic) case, so float noise like 0.1 * 30 = 3.0000...4
# cannot produce a spurious two-point law.
SNAP_TOL = 1e-12


@dataclass(frozen=True)
class FractionalSplit:
    """Integer floor and fractional part of a real number."""

    floor: int
    frac: float

    @property
    def value(self) -> float:
        return self.floor + self.frac


@dataclass(frozen=True)
class TwoPointDist:
    """Law of the rounding operation: support ``{lower_value, lower_value + 1}``.

    The weights are chosen so that the mean equals the real number the
    distribution was built from.
    """

    lower_value: int
    lower_prob: float
    upper_prob: float

    @property
    def support(self) -> tuple[int, int]:
        return (self.lower_value, self.lower_value + 1)

    @property
    def mean(self) -> float:
        return self.lower_value + self.upper_prob

    @property
    def variance(self) -> float:
        return self.upper_prob * (1.0 - self.upper_prob)

    def pmf(self, y: int) -> float:
        if y == self.lower_value:
            return self.lower_prob
        if y == self.lower_value + 1:
            return self.upper_prob
        return 0.0

    def pgf(self, s: float) -> float:
        """E[s^Y] = (1 - frac) * s**floor + frac * s**(floor + 1), s > 0."""
        if not (s > 0.0):
            raise ValueError(f"pgf argument must be positive, got {s}")
        return (self.lower_prob * s**self.lower_value
                + self.upper_prob * s ** (self.lower_value + 1))


def _floor_frac(z: float) -> tuple[int, float]:
    """Floor and snapped fractional part of a finite float."""
    fl = math.floor(z)
    fr = z - fl
    if fr < SNAP_TOL:
        fr = 0.0
    elif fr > 1.0 - SNAP_TOL:
        fl += 1
        fr = 0.0
    return fl, fr


def _check_finite(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"expected a finite real number, got {z}")
    return z


def split(z: float) -> FractionalSplit:
    """Decompose ``z`` into its floor and fractional part.

    The floor is the largest integer <= z, also for negative inputs, so
    ``split(-1.3) == (-2, 0.7)``.
    """
    fl, fr = _floor_frac(_check_finite(z))
    return FractionalSplit(floor=fl, frac=fr)


def round_dist(z: float) -> TwoPointDist:
    """Exact distribution of the mean-preserving rounding of ``z``.

    Mean equals ``z`` and variance equals ``frac * (1 - frac)``.
    """
    fl, fr = _floor_frac(_check_finite(z))
    return TwoPointDist(lower_value=fl, lower_prob=1.0 - fr, upper_prob=fr)


def round_sample(z, rng: np.random.Generator):
    """Draw the mean-preserving rounding of ``z`` (scalar or array).

    Returns an int for scalar input, an int64 array otherwise. Repeated
    calls are independent given distinct ``rng`` draws.
    """
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("round_sample requires finite input")
    fl = np.floor(arr)
    fr = arr - fl
    fl = np.where(fr > 1.0 - SNAP_TOL, fl + 1.0, fl)
    fr = np.where((fr < SNAP_TOL) | (fr > 1.0 - SNAP_TOL), 0.0, fr)
    out = fl.astype(np.int64) + (rng.random(arr.shape) < fr)
    if arr.ndim == 0:
        return int(out)
    return out


def _window(alpha: float, y: int) -> tuple[int, int]:
    """Integer x-range on which ``<alpha * x> = y`` has positive probability.

    Widened by one on each side to absorb floating-point edge effects; the
    extra points receive zero weight from the two-point law.
    """
    if alpha > 0.0:
        lo = math.floor((y - 1) / alpha) + 1
        hi = math.ceil((y + 1) / alpha) - 1
    else:
        lo = math.floor((y + 1) / alpha) + 1
        hi = math.ceil((y - 1) / alpha) - 1
    return lo - 1, hi + 1


def scaled_round_pmf(alpha: float, x_pmf: Mapping[int, float], y: int) -> float:
    """P(<alpha * X> = y) for an integer variable X with pmf ``x_pmf``.

    The rounding is executed independently of X, so the probability is the
    pmf of X pushed through the two-point law of ``alpha * x``. For
    ``alpha = 0`` the result is the point mass at 0.

    Parameters
    ----------
    alpha : float in (-1, 1)
        Scaling coefficient.
    x_pmf : mapping int -> probability
        Finitely supported (or truncated) pmf of X; must sum to 1 within
        1e-9.
    y : int
        Target integer.
    """
    alpha = _check_finite(alpha)
    if abs(alpha) >= 1.0:
        raise ValueError(f"|alpha| must be < 1, got {alpha}")
    total_mass = math.fsum(x_pmf.values())
    if abs(total_mass - 1.0) > 1e-9:
        raise ValueError(f"x_pmf sums to {total_mass}, not normalized within 1e-9")
    if any(p < 0.0 for p in x_pmf.values()):
        raise ValueError("x_pmf has negative entries")
    if alpha == 0.0:
        return 1.0 if y == 0 else 0.0

    lo, hi = _window(alpha, y)
    total = 0.0
    if hi - lo + 1 > 4 * len(x_pmf):
        # tiny |alpha| makes the x-window long; iterating the pmf is cheaper
        for x, px in x_pmf.items():
            if px > 0.0 and lo <= x <= hi:
                total += round_dist(alpha * x).pmf(y) * px
    else:
        for x in range(lo, hi + 1):
            px = x_pmf.get(x, 0.0)
            if px > 0.0:
                total += round_dist(alpha * x).pmf(y) * px
    return total
