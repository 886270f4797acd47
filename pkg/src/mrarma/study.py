"""Monte Carlo estimation studies.

A study simulates many series from one data-generating process, fits each
with the requested methods, and aggregates per-parameter means, Monte Carlo
standard deviations and mean approximate standard errors. Replications are
independent and embarrassingly parallel; each draws its generator from the
master seed by counter-splitting, so results do not depend on worker
scheduling. A failed replication is recorded and the run continues.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimation import fit_3sls_mrarma, fit_cls_mrar, fit_mle_mrar, fit_mm_mrar
from .innovations import Skellam
from .model import MrarmaSpec, simulate

__all__ = ["StudyConfig", "StudyResult", "run_study", "worker_count"]

_PURE_AR_METHODS = {"mm", "cls", "mle"}
_METHODS = _PURE_AR_METHODS | {"ls3"}


@dataclass(frozen=True)
class StudyConfig:
    """Data-generating process and replication plan of one study."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    lambda1: float
    lambda2: float
    sample_sizes: tuple[int, ...]
    replications: int
    master_seed: int
    methods: tuple[str, ...]
    burnin: int = 250

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "sample_sizes",
                           tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not self.sample_sizes or min(self.sample_sizes) < 20:
            raise ValueError("sample sizes must be >= 20")
        unknown = set(self.methods) - _METHODS
        if unknown or not self.methods:
            raise ValueError(f"unknown methods {sorted(unknown)}; "
                             f"choose from {sorted(_METHODS)}")
        if self.betas and (set(self.methods) & _PURE_AR_METHODS):
            raise ValueError("mm/cls/mle are pure-AR methods; the DGP has q > 0")
        if not self.betas and "ls3" in self.methods:
            raise ValueError("ls3 needs q >= 1 in the DGP")

    def spec(self) -> MrarmaSpec:
        return MrarmaSpec(alphas=self.alphas, betas=self.betas,
                          innovation=Skellam(self.lambda1, self.lambda2))

    def true_values(self) -> dict[str, float]:
        truth = {f"alpha{i}": a for i, a in enumerate(self.alphas, start=1)}
        truth.update({f"beta{j}": b for j, b in enumerate(self.betas, start=1)})
        truth["lambda1"] = self.lambda1
        truth["lambda2"] = self.lambda2
        return truth

    @classmethod
    def from_dict(cls, doc: dict) -> "StudyConfig":
        dgp = doc["dgp"]
        alphas = tuple(dgp.get("alphas", ()))
        betas = tuple(dgp.get("betas", ()))
        if "p" in dgp and int(dgp["p"]) != len(alphas):
            raise ValueError(f"dgp.p = {dgp['p']} but {len(alphas)} alphas given")
        if "q" in dgp and int(dgp["q"]) != len(betas):
            raise ValueError(f"dgp.q = {dgp['q']} but {len(betas)} betas given")
        return cls(alphas=alphas, betas=betas,
                   lambda1=float(dgp["lambda1"]), lambda2=float(dgp["lambda2"]),
                   sample_sizes=tuple(doc["sample_sizes"]),
                   replications=int(doc["replications"]),
                   master_seed=int(doc["master_seed"]),
                   methods=tuple(doc.get("methods", ("mle",))),
                   burnin=int(doc.get("burnin", 250)))


@dataclass
class StudyResult:
    """Aggregated study rows plus the failure bookkeeping."""

    config: StudyConfig
    rows: list[dict] = field(default_factory=list)
    n_failures: int = 0
    n_runs: int = 0
    failure_messages: list[str] = field(default_factory=list)

    @property
    def failure_fraction(self) -> float:
        return self.n_failures / self.n_runs if self.n_runs else 0.0

    def to_csv(self) -> str:
        lines = ["n,method,parameter,true,mean_est,mc_sd,mean_se"]
        for row in self.rows:
            mean_se = "" if row["mean_se"] is None else f"{row['mean_se']:.6g}"
            lines.append(f"{row['n']},{row['method']},{row['parameter']},"
                         f"{row['true']:.6g},{row['mean_est']:.6g},"
                         f"{row['mc_sd']:.6g},{mean_se}")
        return "\n".join(lines) + "\n"

    def cell(self, n: int, method: str, parameter: str) -> dict:
        for row in self.rows:
            if (row["n"], row["method"], row["parameter"]) == (n, method, parameter):
                return row
        raise KeyError((n, method, parameter))


def _fit_one(method: str, series, p: int, q: int):
    if method == "mm":
        return fit_mm_mrar(series, p)
    if method == "cls":
        return fit_cls_mrar(series, p)
    if method == "mle":
        return fit_mle_mrar(series, p)
    return fit_3sls_mrarma(series, p, q)


def _replicate(args) -> dict:
    """One replication: simulate a series, fit it with every method."""
    config, n, rep = args
    rng = np.random.default_rng(
        np.random.SeedSequence(config.master_seed, spawn_key=(n, rep)))
    sim = simulate(config.spec(), n, burnin=config.burnin, seed=rng)
    fits = []
    for method in config.methods:
        try:
            fit = _fit_one(method, sim.series, len(config.alphas),
                           len(config.betas))
            fits.append({"method": method, "estimates": fit.estimates,
                         "se": fit.se})
        except Exception as exc:  # a failed replication is data, not a crash
            fits.append({"method": method,
                         "error": f"{type(exc).__name__}: {exc}"})
    return {"n": n, "rep": rep, "fits": fits}


def worker_count() -> int:
    """Worker pool size: the MRARMA_THREADS environment variable if set,
    otherwise the CPU count."""
    env = os.environ.get("MRARMA_THREADS")
    if env is not None:
        count = int(env)
        if count < 1:
            raise ValueError(f"MRARMA_THREADS must be >= 1, got {env}")
        return count
    return os.cpu_count() or 1


def run_study(config: StudyConfig, workers: int | None = None) -> StudyResult:
    """Run all replications and aggregate per (n, method, parameter).

    ``mean_se`` averages the approximate standard errors over the
    replications that produced them (None when no method reports them).
    """
    if workers is None:
        workers = worker_count()
    tasks = [(config, n, rep)
             for n in config.sample_sizes
             for rep in range(config.replications)]
    if workers <= 1 or len(tasks) == 1:
        outcomes = [_replicate(task) for task in tasks]
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_replicate, tasks, chunksize=chunk))
    outcomes.sort(key=lambda rec: (rec["n"], rec["rep"]))

    truth = config.true_values()
    result = StudyResult(config=config,
                         n_runs=len(tasks) * len(config.methods))
    for n in config.sample_sizes:
        for method in config.methods:
            estimates: dict[str, list[float]] = {k: [] for k in truth}
            ses: dict[str, list[float]] = {k: [] for k in truth}
            for rec in outcomes:
                if rec["n"] != n:
                    continue
                for fit in rec["fits"]:
                    if fit["method"] != method:
                        continue
                    if "error" in fit:
                        result.n_failures += 1
                        result.failure_messages.append(
                            f"n={n} rep={rec['rep']} {method}: {fit['error']}")
                        continue
                    for key in truth:
                        if key in fit["estimates"]:
                            estimates[key].append(fit["estimates"][key])
                            if fit["se"] and key in fit["se"]:
                                ses[key].append(fit["se"][key])
            for key in truth:
                values = estimates[key]
                if not values:
                    continue
                arr = np.asarray(values)
                mc_sd = float(arr.std(ddof=1)) if arr.size > 1 else math.nan
                mean_se = (float(np.mean(ses[key])) if ses[key] else None)
                result.rows.append({
                    "n": n, "method": method, "parameter": key,
                    "true": truth[key], "mean_est": float(arr.mean()),
                    "mc_sd": mc_sd, "mean_se": mean_se,
                    "n_ok": arr.size,
                })
    return result
