"""Command-line interface: ``teleconnect <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 input parse/structure/alignment,
4 numeric or domain failure, 5 ``run --check`` found a mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from teleconnect import __version__
from teleconnect.errors import (
    AlignmentError,
    DomainError,
    NumericError,
    ParseError,
    SearchError,
    StructuralError,
    TeleconnectError,
    UsageError,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4, 5


def _exit_code(exc: BaseException) -> int:
    from teleconnect.report import PipelineError

    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, (ParseError, StructuralError, AlignmentError, OSError)):
        return EXIT_PARSE
    if isinstance(exc, (NumericError, DomainError, SearchError)):
        return EXIT_NUMERIC
    return EXIT_NUMERIC


def _emit(obj):
    from teleconnect.report import dumps

    sys.stdout.write(dumps(obj))


def _load_annual(path, source, start=None, end=None):
    from teleconnect.ingest import read_table, to_annual

    return to_annual(read_table(path, source)).window(start, end).trim_missing()


def _parse_exog(specs):
    out = []
    for spec in specs or []:
        if ":" not in spec:
            raise UsageError(f"--exog expects FILE:SOURCE, got {spec!r}")
        path, source = spec.rsplit(":", 1)
        out.append((path, source))
    return out


def _model_data(args):
    """Response series and exogenous matrix aligned on a common window."""
    from teleconnect.ingest import align

    y = _load_annual(args.file, args.source, args.start, args.end)
    exog = _parse_exog(args.exog)
    if not exog:
        return y, None, ()
    xs = [_load_annual(p, s) for p, s in exog]
    aligned = align([y] + xs, args.start, args.end)
    if aligned.dropped_years:
        raise AlignmentError(f"missing values inside the window: {aligned.dropped_years}")
    names = tuple(s.upper() for _, s in exog)
    return aligned.column(0), aligned.matrix[:, 1:], names


def cmd_run(args) -> int:
    from teleconnect.checks import evaluate
    from teleconnect.report import PipelineConfig, run_pipeline

    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.no_render:
        cfg.render = False
    report, out = run_pipeline(cfg, args.output)
    print(f"report written to {out / 'report.json'}", file=sys.stderr)
    if not args.check:
        return EXIT_OK
    results = evaluate(report)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_adf(args) -> int:
    from teleconnect.series import difference
    from teleconnect.stationarity import adf_test

    s = _load_annual(args.file, args.source, args.start, args.end)
    if args.difference:
        s = difference(s, args.difference)
    result = adf_test(s, args.lags, trend=not args.no_trend)
    _emit(result.as_dict())
    return EXIT_OK


def cmd_fit(args) -> int:
    from teleconnect.arima import ModelSpec, fit

    y, X, names = _model_data(args)
    p, d, q = args.order
    model = fit(ModelSpec(p, d, q, args.drift, names), y, X, seed=args.seed)
    _emit(model.to_dict())
    return EXIT_OK


def cmd_gridsearch(args) -> int:
    from teleconnect.arima import FittedModel, grid_search

    y, X, names = _model_data(args)
    best, table = grid_search(y, X, d=args.d, p_max=args.p_max, q_max=args.q_max, drift=args.drift,
                              exog_names=names, workers=args.workers, seed=args.seed)
    grid = [{"p": p, "q": q, "aic": m.aic, "admissible": m.admissible} if isinstance(m, FittedModel)
            else {"p": p, "q": q, "error": m} for (p, q), m in table.items()]
    _emit({"selected": best.to_dict(), "grid": grid})
    return EXIT_OK


def cmd_coherence(args) -> int:
    from teleconnect.figures import write_csv
    from teleconnect.ingest import align
    from teleconnect.spectral import coherence_threshold, peak_coherence, periodogram_pair, significant_bands

    x = _load_annual(args.x_file, args.x_source)
    y = _load_annual(args.y_file, args.y_source)
    aligned = align([x, y], args.start, args.end)
    if aligned.dropped_years:
        raise AlignmentError(f"missing values inside the overlap: {aligned.dropped_years}")
    m = aligned.matrix
    if not args.no_difference:
        m = np.diff(m, axis=0)
    est = periodogram_pair(m[:, 0], m[:, 1], span=args.span, detrend=not args.no_detrend,
                           taper=args.taper, modified=args.modified, pad=args.pad)
    thr = coherence_threshold(m.shape[0], args.span, args.alpha)
    bands = significant_bands(est, thr)
    freq, value = peak_coherence(est)
    _emit({"window": [int(aligned.years[0]), int(aligned.years[-1])], "n_obs": est.n_obs,
           "n_fft": est.n_fft, "kernel": est.kernel, "threshold": thr.as_dict(),
           "bands": [b.as_dict() for b in bands],
           "peak": {"frequency": freq, "coherence": value, "period": 1.0 / freq}})
    if args.csv:
        rows = [[est.freqs[i], est.f_xx[i], est.f_yy[i], est.f_xy[i].real, est.f_xy[i].imag,
                 est.coherence[i], thr.C] for i in range(est.freqs.size)]
        write_csv(Path(args.csv), ("freq", "f_xx", "f_yy", "re_f_xy", "im_f_xy", "coherence", "C"), rows)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    from teleconnect.arima import ModelSpec, fit
    from teleconnect.diagnostics import ljung_box, residual_report
    from teleconnect.figures import write_csv

    y, X, names = _model_data(args)
    p, d, q = args.order
    model = fit(ModelSpec(p, d, q, args.drift, names), y, X, seed=args.seed)
    fitdf = args.fitdf if args.fitdf is not None else p + q
    lb = ljung_box(model.residuals, args.lags, fitdf)
    rr = residual_report(model.residuals, args.max_lag)
    _emit({"model": model.spec.describe(), "ljung_box": lb.as_dict(), "residuals": rr.as_dict(),
           "error_measures": model.accuracy.as_dict()})
    if args.csv_dir:
        out = Path(args.csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        model.residuals.to_csv(out / "residuals.csv", header=("time", "residual"))
        write_csv(out / "residual_acf.csv", ("lag", "acf", "bound"),
                  [[lag, v, rr.acf.confidence_bound] for lag, v in zip(rr.acf.lags, rr.acf.values)])
        write_csv(out / "histogram.csv", ("left", "right", "count"),
                  [[rr.bin_edges[i], rr.bin_edges[i + 1], int(c)] for i, c in enumerate(rr.counts)])
        write_csv(out / "density.csv", ("x", "density"), zip(rr.density_x, rr.density_y))
    return EXIT_OK


def cmd_figure(args) -> int:
    from teleconnect.figures import emit_figure_data
    from teleconnect.report import PipelineConfig, resolve_output_dir, run_analysis

    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    report = run_analysis(cfg)
    out = resolve_output_dir(cfg, args.output) / "figures"
    for path in emit_figure_data(report, args.figure, out, render=not args.no_render):
        print(path)
    return EXIT_OK


def _add_model_args(p, order=True):
    p.add_argument("file", help="response series file (CET grammar by default)")
    p.add_argument("--source", default="cet", help="grammar of FILE: cet, nao or pdo")
    p.add_argument("--exog", action="append", metavar="FILE:SOURCE",
                   help="exogenous regressor file; repeat for several, column order is kept")
    p.add_argument("--start", type=int)
    p.add_argument("--end", type=int)
    p.add_argument("--drift", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="seed for optimizer restarts")
    if order:
        p.add_argument("--order", type=int, nargs=3, metavar=("P", "D", "Q"), default=(2, 1, 1))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teleconnect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"teleconnect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline: report.json plus figure data")
    p.add_argument("--config", help="JSON config; relative paths resolve against its directory")
    p.add_argument("--output", help="output directory (else $TELECONNECT_OUTPUT_DIR, else config)")
    p.add_argument("--check", action="store_true", help="compare against the reference values")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-render", action="store_true", help="write CSVs only, no PNGs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adf", help="augmented Dickey-Fuller test on an annual series")
    p.add_argument("file")
    p.add_argument("--source", default="cet")
    p.add_argument("--start", type=int)
    p.add_argument("--end", type=int)
    p.add_argument("--lags", type=int)
    p.add_argument("--difference", type=int, default=0)
    p.add_argument("--no-trend", action="store_true", help="constant-only regression")
    p.set_defaults(func=cmd_adf)

    p = sub.add_parser("fit", help="fit one ARIMA/ARIMAX model")
    _add_model_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gridsearch", help="AIC grid search over (p, q)")
    _add_model_args(p, order=False)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--p-max", type=int, default=3)
    p.add_argument("--q-max", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("coherence", help="smoothed squared coherence of two annual series")
    p.add_argument("x_file")
    p.add_argument("y_file")
    p.add_argument("--x-source", default="cet")
    p.add_argument("--y-source", default="nao")
    p.add_argument("--start", type=int)
    p.add_argument("--end", type=int)
    p.add_argument("--span", type=int, default=9)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--taper", type=float, default=0.1)
    p.add_argument("--no-detrend", action="store_true")
    p.add_argument("--modified", action="store_true", help="modified Daniell kernel")
    p.add_argument("--pad", action=argparse.BooleanOptionalAction, default=True,
                   help="zero-pad to a 2-3-5 smooth FFT length")
    p.add_argument("--no-difference", action="store_true")
    p.add_argument("--csv", help="write the spectral table here")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("diagnose", help="residual diagnostics for a fitted model")
    _add_model_args(p)
    p.add_argument("--lags", type=int, default=10)
    p.add_argument("--fitdf", type=int, help="defaults to p + q")
    p.add_argument("--max-lag", type=int, default=20)
    p.add_argument("--csv-dir")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("figure", help="emit the data (and rendering) for one figure")
    p.add_argument("figure", help="F1..F6")
    p.add_argument("--config")
    p.add_argument("--output")
    p.add_argument("--no-render", action="store_true")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TeleconnectError, OSError) as exc:
        print(f"teleconnect: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
