"""Integer-supported innovation distributions.

``InnovationModel`` is the small interface the time-series machinery needs
from an innovation law: pmf/log-pmf on the integers, exact first two
moments, the probability generating function, sampling from an explicit
numpy ``Generator``, and a truncated support window for summations. Any
pmf-defined distribution on the integers can be plugged in; the Skellam
distribution (difference of two independent Poisson counts) is the shipped
instance.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .errors import TruncationError

__all__ = ["InnovationModel", "Skellam", "skellam_log_pmf"]

# Outward expansion of a support window stops with an error beyond this
# many states; a pmf needing more is numerically hopeless anyway.
_MAX_WINDOW_STATES = 1_000_000

# Ascending Bessel series is abandoned past this many terms in favour of the
# large-argument asymptotic expansion.
_MAX_SERIES_TERMS = 10_000


class InnovationModel(ABC):
    """A distribution on the integers, defined by its pmf.

    Implementations must be immutable after construction; ``pmf``, ``log_pmf``
    and ``pgf`` are pure and thread-safe. ``sample`` draws from the explicit
    generator passed in, one generator per thread of execution.
    """

    @abstractmethod
    def pmf(self, k):
        """Probability of the integer ``k`` (scalar or integer array)."""

    @abstractmethod
    def log_pmf(self, k):
        """Natural log of :meth:`pmf` (scalar or integer array)."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None):
        """Draw one integer (``size=None``) or an int64 array of draws."""

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @property
    @abstractmethod
    def variance(self) -> float: ...

    @abstractmethod
    def pgf(self, s: float) -> float:
        """E[s^K] for ``s`` in (0, 1]."""

    def support_window(self, tail_tol: float) -> tuple[int, int]:
        """Smallest symmetric-around-mean interval missing < ``tail_tol`` mass.

        Expands outward from the rounded mean; raises
        :class:`~mrarma.errors.TruncationError` if more than 10**6 states are
        needed.
        """
        if not (0.0 < tail_tol <= 1e-6):
            raise ValueError(f"tail_tol must be in (0, 1e-6], got {tail_tol}")
        center = int(round(self.mean))
        mass = float(self.pmf(center))
        radius = 0
        while mass < 1.0 - tail_tol:
            radius += 1
            if 2 * radius + 1 > _MAX_WINDOW_STATES:
                raise TruncationError(
                    f"support window exceeded {_MAX_WINDOW_STATES} states "
                    f"at tail tolerance {tail_tol}")
            mass += float(self.pmf(center - radius)) + float(self.pmf(center + radius))
        return (center - radius, center + radius)


def _log_scaled_bessel_i(nus: np.ndarray, x: float) -> np.ndarray:
    """log(exp(-x) * I_nu(x)) for an array of non-negative integer orders.

    Ascending series, run in linear space on the scaled terms so no large
    exponent is ever formed: the anchor term exp(-x) * (x/2)**nu / nu! is
    built as a product of representable factors, and successive terms follow
    from the exact ratio (x/2)**2 / ((m+1)(m+nu+1)). Falls back to the
    large-argument asymptotic expansion when the series would need more than
    10**4 terms.
    """
    nus = np.asarray(nus, dtype=float)
    if x <= 0.0:
        raise ValueError(f"series argument must be positive, got {x}")
    n_terms = (-2.0 + math.sqrt(x * x + 4.0)) / 2.0 + 80.0
    if n_terms > _MAX_SERIES_TERMS:
        return np.array([_log_scaled_bessel_i_asymptotic(v, x) for v in nus])

    half = x / 2.0
    log_half = math.log(half)
    emx = math.exp(-x)
    log_anchor = np.empty_like(nus)
    for i, v in enumerate(nus):
        u = 0.0
        if v <= 170:
            try:
                u = emx * math.pow(half, v) / math.factorial(int(v))
            except OverflowError:
                u = 0.0
        # product under/overflowed: fall back to the log form, which is
        # precise enough this deep in the tail
        log_anchor[i] = (math.log(u) if u > 0.0
                         else v * log_half - math.lgamma(v + 1.0) - x)

    q = half * half
    term = np.ones_like(nus)
    acc = np.ones_like(nus)
    scale = 0.0
    m_peak = (-2.0 + math.sqrt(x * x + 4.0)) / 2.0
    m = 0
    while True:
        term = term * (q / ((m + 1.0) * (m + nus + 1.0)))
        acc = acc + term
        m += 1
        if m > m_peak and np.all(term <= acc * 1e-18):
            break
        if m >= _MAX_SERIES_TERMS:
            raise TruncationError(f"Bessel series did not converge in {m} terms")
        if acc.max() > 1e250:
            acc *= 1e-250
            term *= 1e-250
            scale += 250.0 * math.log(10.0)
    return log_anchor + scale + np.log(acc)


def _log_scaled_bessel_i_asymptotic(nu: float, x: float) -> float:
    """log(exp(-x) * I_nu(x)) by the large-argument expansion in 1/(8x).

    Valid when x dominates nu**2; orders violating that are summed by the
    ascending series restricted to a window around its peak term.
    """
    mu = 4.0 * nu * nu
    if mu >= 0.1 * x:
        return _log_scaled_bessel_i_windowed(nu, x)
    total = 1.0
    term = 1.0
    for j in range(1, 30):
        term *= -(mu - (2 * j - 1) ** 2) / (j * 8.0 * x)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return math.log(total) - 0.5 * math.log(2.0 * math.pi * x)


def _log_scaled_bessel_i_windowed(nu: float, x: float) -> float:
    """Ascending series summed only near its peak index, in log space."""
    half_log = math.log(x / 2.0)
    m_peak = max(0.0, (-(nu + 2.0) + math.sqrt(nu * nu + x * x)) / 2.0)
    width = int(50 + 12 * math.sqrt(m_peak + nu + 4.0))
    lo = max(0, int(m_peak) - width)
    hi = int(m_peak) + width
    m = np.arange(lo, hi + 1, dtype=float)
    logt = ((2 * m + nu) * half_log
            - np.array([math.lgamma(v) for v in m + 1.0])
            - np.array([math.lgamma(v) for v in m + nu + 1.0]))
    top = logt.max()
    return top + math.log(math.fsum(np.exp(logt - top))) - x


def skellam_log_pmf(lambda1: float, lambda2: float, k) -> float | np.ndarray:
    """Log pmf of the Skellam(lambda1, lambda2) distribution at integer ``k``.

    P(k) = exp(-(l1 + l2)) * (l1/l2)**(k/2) * I_|k|(2*sqrt(l1*l2)), evaluated
    cancellation-free: the exponential prefactor is folded into the scaled
    Bessel term so the only large quantities are formed exactly.
    """
    if not (lambda1 > 0.0 and lambda2 > 0.0 and math.isfinite(lambda1)
            and math.isfinite(lambda2)):
        raise ValueError(f"Skellam rates must be positive and finite, "
                         f"got ({lambda1}, {lambda2})")
    ks = np.asarray(k)
    scalar = ks.ndim == 0
    ks = np.atleast_1d(ks).astype(np.int64)
    x = 2.0 * math.sqrt(lambda1 * lambda2)
    core = -((math.sqrt(lambda1) - math.sqrt(lambda2)) ** 2)
    half_log_ratio = 0.5 * (math.log(lambda1) - math.log(lambda2))
    uniq, inverse = np.unique(np.abs(ks), return_inverse=True)
    log_bessel = _log_scaled_bessel_i(uniq, x)[inverse]
    out = core + ks * half_log_ratio + log_bessel
    return float(out[0]) if scalar else out


class Skellam(InnovationModel):
    """Difference of two independent Poisson counts with means lambda1, lambda2.

    Mean is ``lambda1 - lambda2`` and variance ``lambda1 + lambda2``; the
    distribution charges every integer.
    """

    def __init__(self, lambda1: float, lambda2: float):
        lambda1 = float(lambda1)
        lambda2 = float(lambda2)
        if not (lambda1 > 0.0 and lambda2 > 0.0 and math.isfinite(lambda1)
                and math.isfinite(lambda2)):
            raise ValueError(f"Skellam rates must be positive and finite, "
                             f"got ({lambda1}, {lambda2})")
        self._lambda1 = lambda1
        self._lambda2 = lambda2

    @classmethod
    def from_moments(cls, mean: float, variance: float) -> "Skellam":
        """Skellam with the given mean and variance; needs variance > |mean|."""
        lambda1 = (variance + mean) / 2.0
        lambda2 = (variance - mean) / 2.0
        if lambda1 <= 0.0 or lambda2 <= 0.0:
            raise ValueError(
                f"no Skellam has mean {mean} and variance {variance} "
                f"(requires variance > |mean|)")
        return cls(lambda1, lambda2)

    @property
    def lambda1(self) -> float:
        return self._lambda1

    @property
    def lambda2(self) -> float:
        return self._lambda2

    @property
    def mean(self) -> float:
        return self._lambda1 - self._lambda2

    @property
    def variance(self) -> float:
        return self._lambda1 + self._lambda2

    def log_pmf(self, k):
        return skellam_log_pmf(self._lambda1, self._lambda2, k)

    def pmf(self, k):
        return np.exp(self.log_pmf(k))

    def sample(self, rng: np.random.Generator, size=None):
        draws = rng.poisson(self._lambda1, size) - rng.poisson(self._lambda2, size)
        if size is None:
            return int(draws)
        return draws.astype(np.int64)

    def pgf(self, s: float) -> float:
        if not (0.0 < s <= 1.0):
            raise ValueError(f"pgf argument must be in (0, 1], got {s}")
        return math.exp(self._lambda1 * (s - 1.0) + self._lambda2 * (1.0 / s - 1.0))

    def __repr__(self) -> str:
        return f"Skellam(lambda1={self._lambda1}, lambda2={self._lambda2})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Skellam)
                and self._lambda1 == other._lambda1
                and self._lambda2 == other._lambda2)

    def __hash__(self) -> int:
        return hash(("Skellam", self._lambda1, self._lambda2))
