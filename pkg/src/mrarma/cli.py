"""Command-line interface.

Subcommands: ``simulate`` (write a simulated series), ``fit`` (estimate a
model from a series file and write a fit document), ``diagnose`` (residual
report for a fitted model), ``stationary`` (numerical stationary marginal
of first-order models), ``study`` (Monte Carlo estimation study).

Exit codes: 0 success, 1 usage error, 2 data or domain error, 3 numerical
non-convergence or failure-rate breach. All commands are deterministic
given their seed. Delimited output is always written; ``--plot`` adds
rendered figures beside it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .dataio import load_series, write_series
from .diagnostics import pearson_residuals, pearson_residuals_approx, sample_pacf
from .errors import NonConvergenceError, NumericalError
from .estimation import (FitResult, fit_3sls_mrarma, fit_cls_mrar, fit_mle_mrar,
                         fit_mm_mrar)
from .innovations import Skellam
from .model import MrarmaSpec, check_invertible, check_stationary, simulate
from .stationary import mrar1_stationary, mrma1_marginal
from .study import StudyConfig, run_study, worker_count

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_LIST_FLAGS = ("--alpha", "--beta")


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r} as a comma-separated "
                         f"list of numbers") from exc


def _merge_list_flags(argv: list[str]) -> list[str]:
    """Join list-valued flags with '=' so values like -0.6,0.3 survive
    argparse's option detection."""
    merged = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token in _LIST_FLAGS and i + 1 < len(argv):
            merged.append(f"{token}={argv[i + 1]}")
            skip = True
        else:
            merged.append(token)
    return merged


def _build_parser() -> _Parser:
    parser = _Parser(prog="mrarma",
                     description="Integer ARMA models with mean-preserving "
                                 "rounding: simulation, fitting, diagnostics, "
                                 "stationary laws and Monte Carlo studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a series to a file")
    sim.add_argument("--p", type=int, default=None, help="AR order (checked "
                     "against --alpha)")
    sim.add_argument("--q", type=int, default=None, help="MA order (checked "
                     "against --beta)")
    sim.add_argument("--alpha", type=_float_list, default=(),
                     help="AR coefficients, e.g. --alpha -0.6,0.3")
    sim.add_argument("--beta", type=_float_list, default=(),
                     help="MA coefficients")
    sim.add_argument("--lambda1", type=float, required=True)
    sim.add_argument("--lambda2", type=float, required=True)
    sim.add_argument("--n", type=int, required=True, help="series length")
    sim.add_argument("--burnin", type=int, default=250)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output path, one integer "
                     "per line")
    sim.add_argument("--force", action="store_true",
                     help="simulate even if the spec is not stationary")
    sim.add_argument("--plot", action="store_true",
                     help="also render the sample path to <out>.png")
    sim.set_defaults(handler=_cmd_simulate)

    fit = sub.add_parser("fit", help="fit a model to a series file")
    fit.add_argument("--data", required=True)
    fit.add_argument("--p", type=int, required=True)
    fit.add_argument("--q", type=int, default=0)
    fit.add_argument("--method", required=True,
                     choices=("mm", "cls", "mle", "ls3"))
    fit.add_argument("--innovation", choices=("skellam",), default="skellam")
    fit.add_argument("--out", required=True, help="fit document (JSON) path")
    fit.set_defaults(handler=_cmd_fit)

    diag = sub.add_parser("diagnose", help="residual diagnostics for a fit")
    diag.add_argument("--data", required=True)
    diag.add_argument("--fit", required=True, help="fit document from 'fit'")
    diag.add_argument("--maxlag", type=int, default=20)
    diag.add_argument("--out-prefix", default=None,
                      help="prefix for report CSVs (default: data path stem)")
    diag.add_argument("--plot", action="store_true",
                      help="also render acf/pacf/residual figures")
    diag.set_defaults(handler=_cmd_diagnose)

    stat = sub.add_parser("stationary",
                          help="numerical stationary marginal distribution")
    stat.add_argument("--alpha", type=float, default=None,
                      help="AR(1) coefficient")
    stat.add_argument("--beta", type=float, default=None,
                      help="MA(1) coefficient")
    stat.add_argument("--lambda1", type=float, required=True)
    stat.add_argument("--lambda2", type=float, required=True)
    stat.add_argument("--tol", type=float, default=1e-10)
    stat.add_argument("--out", default=None, help="pmf CSV path (default: "
                      "print rows to stdout)")
    stat.add_argument("--plot", action="store_true",
                      help="also render the pmf to <out>.png (needs --out)")
    stat.set_defaults(handler=_cmd_stationary)

    study = sub.add_parser("study", help="Monte Carlo estimation study")
    study.add_argument("--config", required=True, help="study config (JSON)")
    study.add_argument("--out", required=True, help="summary CSV path")
    study.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: MRARMA_THREADS or "
                       "CPU count)")
    study.add_argument("--plot", action="store_true",
                       help="also render per-parameter summaries to <out>.png")
    study.set_defaults(handler=_cmd_study)
    return parser


def _spec_from_flags(args) -> MrarmaSpec:
    if args.p is not None and args.p != len(args.alpha):
        raise UsageError(f"--p {args.p} does not match {len(args.alpha)} "
                         f"--alpha values")
    if args.q is not None and args.q != len(args.beta):
        raise UsageError(f"--q {args.q} does not match {len(args.beta)} "
                         f"--beta values")
    return MrarmaSpec(alphas=args.alpha, betas=args.beta,
                      innovation=Skellam(args.lambda1, args.lambda2))


def _print_spec_summary(spec: MrarmaSpec) -> None:
    chk = check_stationary(spec)
    skellam = spec.innovation
    print(f"model: MRARMA({spec.p},{spec.q}), "
          f"alphas={list(spec.alphas)}, betas={list(spec.betas)}, "
          f"Skellam(lambda1={skellam.lambda1}, lambda2={skellam.lambda2})")
    print(f"innovation mean {skellam.mean:.6f}, variance {skellam.variance:.6f}")
    print(f"stationary: {'yes' if chk.satisfied else 'NO'} "
          f"(spectral radius {chk.spectral_radius:.6f}); "
          f"invertible: {'yes' if check_invertible(spec) else 'NO'}")


def _cmd_simulate(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    if args.burnin < 0:
        raise UsageError(f"--burnin must be >= 0, got {args.burnin}")
    spec = _spec_from_flags(args)
    _print_spec_summary(spec)
    chk = check_stationary(spec)
    if not chk.satisfied and not args.force:
        print("error: spec is not stationary; pass --force to simulate anyway",
              file=sys.stderr)
        return EXIT_DATA
    sim = simulate(spec, args.n, burnin=args.burnin, seed=args.seed,
                   force=args.force)
    write_series(args.out, sim.series)
    print(f"wrote {args.n} observations to {args.out} "
          f"(seed {args.seed}, burn-in {args.burnin})")
    if args.plot:
        figure = f"{args.out}.png"
        plotting.save_series_plot(figure, sim.series,
                                  title=f"MRARMA({spec.p},{spec.q}) sample path")
        print(f"wrote figure {figure}")
    return EXIT_OK


_TABLE_LABELS = {"mm": "MM", "cls": "CLS", "mle": "ML", "ls3": "3-stage LS"}


def render_fit_table(fit: FitResult) -> str:
    """Estimates with standard errors beneath, information criteria at the
    right; '---' marks unavailable standard errors."""
    names = ([f"lambda{i}" for i in (1, 2) if f"lambda{i}" in fit.estimates]
             + [f"alpha{i}" for i in range(1, fit.p + 1)]
             + [f"beta{j}" for j in range(1, fit.q + 1)])
    if fit.p == 0 and fit.q == 0:
        label = "Skellam-i.i.d."
    elif fit.q == 0:
        label = f"Skellam-MRAR({fit.p})"
    else:
        label = f"Skellam-MRARMA({fit.p},{fit.q})"
    header = [label] + names
    est_row = [_TABLE_LABELS.get(fit.method, fit.method)]
    se_row = [""]
    for name in names:
        est_row.append(f"{fit.estimates[name]:.3f}")
        if fit.se is not None and name in fit.se:
            se_row.append(f"({fit.se[name]:.3f})")
        else:
            se_row.append("(---)")
    if fit.aic is not None:
        header += ["AIC", "BIC"]
        est_row += [f"{fit.aic:.1f}", f"{fit.bic:.1f}"]
        se_row += ["", ""]
    widths = [max(len(row[i]) for row in (header, est_row, se_row))
              for i in range(len(header))]
    lines = []
    for row in (header, est_row, se_row):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def _cmd_fit(args) -> int:
    if args.p < 0 or args.q < 0:
        raise UsageError("orders must be non-negative")
    if args.method in ("mm", "cls", "mle") and args.q != 0:
        raise UsageError(f"--method {args.method} supports pure AR models "
                         f"only (--q 0); use --method ls3 for q > 0")
    if args.method == "ls3" and args.q < 1:
        raise UsageError("--method ls3 needs --q >= 1")
    data = load_series(args.data)
    if data.skipped_header is not None:
        print(f"note: skipped non-numeric header line "
              f"{data.skipped_header!r}")
    try:
        if args.method == "mm":
            fit = fit_mm_mrar(data.values, args.p, innovation=args.innovation)
        elif args.method == "cls":
            fit = fit_cls_mrar(data.values, args.p, innovation=args.innovation)
        elif args.method == "mle":
            fit = fit_mle_mrar(data.values, args.p, innovation=args.innovation)
        else:
            fit = fit_3sls_mrarma(data.values, args.p, args.q,
                                  innovation=args.innovation)
    except NonConvergenceError as exc:
        if exc.result is not None:
            Path(args.out).write_text(exc.result.to_json() + "\n")
            print(f"wrote best-found fit to {args.out}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    Path(args.out).write_text(fit.to_json() + "\n")
    for message in fit.warnings:
        print(f"warning: {message}")
    if args.method == "mle":
        print(render_fit_table(fit))
        print(f"loglik {fit.loglik:.4f}  converged {fit.converged}  "
              f"iterations {fit.iterations}")
    else:
        pairs = ", ".join(f"{k}={v:.4f}" for k, v in fit.estimates.items())
        print(f"{fit.method} estimates: {pairs}")
    print(f"wrote fit document to {args.out}")
    return EXIT_OK


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(str(v) for v in row) + "\n")


def _cmd_diagnose(args) -> int:
    if args.maxlag < 1:
        raise UsageError(f"--maxlag must be >= 1, got {args.maxlag}")
    data = load_series(args.data)
    fit = FitResult.from_json(Path(args.fit).read_text())
    spec = fit.spec()
    needed = max(spec.p, spec.q) * 2 + args.maxlag + 2
    if data.values.size < needed:
        print(f"error: series of length {data.values.size} is too short for "
              f"orders ({spec.p},{spec.q}) at maxlag {args.maxlag}",
              file=sys.stderr)
        return EXIT_DATA
    if spec.q == 0:
        report = pearson_residuals(data.values, spec, max_lag=args.maxlag)
    else:
        report = pearson_residuals_approx(data.values, spec,
                                          max_lag=args.maxlag)
        print("note: innovations are latent for q > 0; residuals use the "
              "reconstructed innovation sequence and are approximate")
    pacf = sample_pacf(data.values, args.maxlag)
    pacf_band = 1.96 / np.sqrt(data.values.size)

    prefix = args.out_prefix
    if prefix is None:
        source = Path(args.data)
        prefix = str(source.with_name(source.stem))
    band = report.significance_band
    acf_path = f"{prefix}_residual_acf.csv"
    _write_csv(acf_path, "lag,acf,band_lo,band_hi",
               ((lag, f"{v:.8f}", f"{-band:.8f}", f"{band:.8f}")
                for lag, v in enumerate(report.acf, start=1)))
    res_path = f"{prefix}_residuals.csv"
    _write_csv(res_path, "t,residual",
               ((t, f"{r:.8f}") for t, r in enumerate(report.residuals, start=1)))
    pacf_path = f"{prefix}_pacf.csv"
    _write_csv(pacf_path, "lag,pacf,band_lo,band_hi",
               ((lag, f"{v:.8f}", f"{-pacf_band:.8f}", f"{pacf_band:.8f}")
                for lag, v in enumerate(pacf, start=1)))

    outside = int(np.sum(np.abs(report.acf) > band))
    print(f"Pearson residuals: mean {report.mean:.4f}, "
          f"variance {report.variance:.4f}")
    print(f"residual acf: {outside} of {args.maxlag} lags outside "
          f"+/-{band:.4f}")
    print(f"wrote {acf_path}, {res_path}, {pacf_path}")
    if args.plot:
        plotting.save_bar_plot(f"{prefix}_residual_acf.png", report.acf,
                               band=band, title="residual acf")
        plotting.save_bar_plot(f"{prefix}_pacf.png", pacf, band=pacf_band,
                               ylabel="pacf", title="sample pacf")
        plotting.save_series_plot(f"{prefix}_residuals.png", report.residuals,
                                  title="Pearson residuals")
        print(f"wrote figures {prefix}_residual_acf.png, {prefix}_pacf.png, "
              f"{prefix}_residuals.png")
    return EXIT_OK


def _cmd_stationary(args) -> int:
    if (args.alpha is None) == (args.beta is None):
        raise UsageError("pass exactly one of --alpha (AR(1)) or --beta "
                         "(MA(1))")
    if args.plot and args.out is None:
        raise UsageError("--plot needs --out to name the figure")
    innovation = Skellam(args.lambda1, args.lambda2)
    if args.alpha is not None:
        if abs(args.alpha) >= 1.0:
            print(f"error: |alpha| must be < 1, got {args.alpha}",
                  file=sys.stderr)
            return EXIT_DATA
        dist = mrar1_stationary(args.alpha, innovation, tol=args.tol)
        label = f"AR(1) alpha={args.alpha}"
    else:
        if abs(args.beta) >= 1.0:
            print(f"error: |beta| must be < 1, got {args.beta}",
                  file=sys.stderr)
            return EXIT_DATA
        dist = mrma1_marginal(args.beta, innovation)
        label = f"MA(1) beta={args.beta}"
    print(f"mean {dist.mean:.6f}")
    print(f"variance {dist.variance:.6f}")
    rows = ((int(x), f"{p:.12e}") for x, p in zip(dist.support, dist.pmf))
    if args.out is not None:
        _write_csv(args.out, "x,pmf", rows)
        print(f"wrote pmf to {args.out}")
        if args.plot:
            figure = f"{args.out}.png"
            plotting.save_pmf_plot(figure, dist.support, dist.pmf,
                                   title=f"stationary pmf, {label}")
            print(f"wrote figure {figure}")
    else:
        print("x,pmf")
        for x, p in rows:
            print(f"{x},{p}")
    return EXIT_OK


def _cmd_study(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    config = StudyConfig.from_dict(doc)
    workers = args.workers if args.workers is not None else worker_count()
    total = len(config.sample_sizes) * config.replications
    print(f"running {total} replications "
          f"(sizes {list(config.sample_sizes)}, methods "
          f"{list(config.methods)}) on {workers} worker(s)")
    result = run_study(config, workers=workers)
    Path(args.out).write_text(result.to_csv())
    print(f"wrote study summary to {args.out}")
    for row in result.rows:
        mean_se = "-" if row["mean_se"] is None else f"{row['mean_se']:.4f}"
        print(f"n={row['n']:>6} {row['method']:<4} {row['parameter']:<8} "
              f"true={row['true']:+.3f} mean={row['mean_est']:+.4f} "
              f"mc_sd={row['mc_sd']:.4f} mean_se={mean_se}")
    if args.plot:
        figure = f"{args.out}.png"
        plotting.save_study_plot(figure, result)
        print(f"wrote figure {figure}")
    if result.n_failures:
        print(f"{result.n_failures} of {result.n_runs} fits failed "
              f"({100 * result.failure_fraction:.1f}%)")
        for message in result.failure_messages[:10]:
            print(f"  {message}")
        if result.failure_fraction > 0.05:
            print("error: failure rate exceeds 5%", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(_merge_list_flags(argv))
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
