"""Variant model with one independent rounding operator per term.

Instead of rounding the full linear combination once, each autoregressive
and moving-average term is rounded separately and independently:
``X_t = eps_t + <alpha_1 X_{t-1}> + ... + <beta_q eps_{t-q}>``. The
conditional mean is unchanged, but the conditional variance picks up one
two-point rounding variance per term, and the pure-AR conditional
distribution becomes a convolution of ``p`` two-point laws with the
innovation. Both definitions coincide when ``p + q <= 1``.

Only simulation and conditional-law queries are provided; estimation is
developed for the base model.
"""

from __future__ import annotations

import numpy as np

from .model import MrarmaSpec, SimOutput, _check_history, _require_pure_ar, \
    check_stationary
from .rounding import _floor_frac, round_dist

__all__ = [
    "MrarmaStarSpec",
    "simulate_star",
    "cond_var_star",
    "transition_pmf_star",
    "cond_pgf_star",
]


class MrarmaStarSpec(MrarmaSpec):
    """Same fields and validity checks as the base spec; the class marks
    which recursion a simulated path came from."""


def simulate_star(spec: MrarmaSpec, n: int, burnin: int = 250, seed=0,
                  force: bool = False) -> SimOutput:
    """Simulate the per-term-rounding recursion.

    The p + q rounding draws at each step are taken in term order (AR lags
    first, then MA lags). For p + q <= 1 the draw sequence matches
    :func:`mrarma.model.simulate`, so identical seeds give identical paths.
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
    terms = max(p + q, 1)
    eps = spec.innovation.sample(rng, size=total).tolist()
    uniform = rng.random((total, terms))
    x: list[int] = []
    for t in range(total):
        value = eps[t]
        draw = 0
        for i in range(p):
            idx = t - 1 - i
            if idx >= 0:
                fl, fr = _floor_frac(alphas[i] * x[idx])
                value += fl + (1 if uniform[t, draw] < fr else 0)
            draw += 1
        for j in range(q):
            idx = t - 1 - j
            if idx >= 0:
                fl, fr = _floor_frac(betas[j] * eps[idx])
                value += fl + (1 if uniform[t, draw] < fr else 0)
            draw += 1
        x.append(value)
    return SimOutput(series=np.asarray(x[burnin:], dtype=np.int64),
                     innovations_used=np.asarray(eps[burnin:], dtype=np.int64),
                     seed=seed_out, burnin=burnin)


def cond_var_star(spec: MrarmaSpec, x_hist, eps_hist=None) -> float:
    """Conditional variance of the per-term-rounding model: innovation
    variance plus one two-point rounding variance per AR and MA term;
    always within ``[sigma_eps^2, sigma_eps^2 + 0.25 (p + q)]``."""
    x_hist, eps_hist = _check_history(spec, x_hist, eps_hist)
    total = spec.innovation.variance
    for i, a in enumerate(spec.alphas):
        _, fr = _floor_frac(a * x_hist[i])
        total += fr * (1.0 - fr)
    for j, b in enumerate(spec.betas):
        _, fr = _floor_frac(b * eps_hist[j])
        total += fr * (1.0 - fr)
    return total


def _rounding_sum_pmf(spec: MrarmaSpec, x_hist) -> tuple[int, np.ndarray]:
    """Distribution of the sum of the p independent rounded AR terms.

    Sequentially convolving p two-point laws gives a law on p + 1
    consecutive integers starting at the sum of the floors.
    """
    lo = 0
    weights = np.array([1.0])
    for i, a in enumerate(spec.alphas):
        fl, fr = _floor_frac(a * x_hist[i])
        lo += fl
        extended = np.zeros(weights.size + 1)
        extended[:-1] += weights * (1.0 - fr)
        extended[1:] += weights * fr
        weights = extended
    return lo, weights


def transition_pmf_star(spec: MrarmaSpec, x_hist, x):
    """One-step conditional pmf of the per-term-rounding pure AR model.

    Convolution of the p two-point rounding laws with the innovation pmf;
    identical to the base model's transition pmf when p = 1. Accepts scalar
    or array ``x``.
    """
    _require_pure_ar(spec, "the conditional pmf")
    x_hist, _ = _check_history(spec, x_hist, None)
    lo, weights = _rounding_sum_pmf(spec, x_hist)
    xs = np.asarray(x)
    out = np.zeros(np.atleast_1d(xs).shape, dtype=float)
    pmf = spec.innovation.pmf
    for offset, w in enumerate(weights):
        if w > 0.0:
            out += w * np.asarray(pmf(np.atleast_1d(xs) - (lo + offset)),
                                  dtype=float)
    return float(out[0]) if xs.ndim == 0 else out


def cond_pgf_star(spec: MrarmaSpec, x_hist, s: float) -> float:
    """Conditional pgf of the per-term-rounding pure AR model: the
    innovation pgf times one two-point pgf per AR term, for ``s`` in (0, 1]."""
    _require_pure_ar(spec, "the conditional pgf")
    if not (0.0 < s <= 1.0):
        raise ValueError(f"pgf argument must be in (0, 1], got {s}")
    x_hist, _ = _check_history(spec, x_hist, None)
    value = spec.innovation.pgf(s)
    for i, a in enumerate(spec.alphas):
        value *= round_dist(a * x_hist[i]).pgf(s)
    return value
