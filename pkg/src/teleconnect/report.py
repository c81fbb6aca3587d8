"""End-to-end analysis pipeline and its JSON report."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from teleconnect import __version__
from teleconnect.arima import FittedModel, ModelSpec, fit, grid_search
from teleconnect.diagnostics import LjungBoxResult, ResidualReport, ljung_box, residual_report
from teleconnect.errors import DomainError, TeleconnectError, UsageError
from teleconnect.ingest import (
    RawTable,
    SeasonConvention,
    Source,
    align,
    read_table,
    to_annual,
    to_seasonal,
)
from teleconnect.series import Correlogram, TimeSeries, acf, difference, pacf
from teleconnect.spectral import (
    CoherenceThreshold,
    FrequencyBand,
    SpectralEstimate,
    coherence_threshold,
    peak_coherence,
    periodogram_pair,
    significant_bands,
)
from teleconnect.stationarity import AdfResult, adf_test

OUTPUT_ENV = "TELECONNECT_OUTPUT_DIR"
# fields that cannot change any reported number
_UNHASHED = {"output_dir", "workers", "render"}


class PipelineError(TeleconnectError):
    """A pipeline stage failed; ``cause`` is the underlying error."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


@dataclass
class PipelineConfig:
    cet_path: str = "fixtures/cet_monthly.txt"
    nao_path: str = "fixtures/nao_monthly.txt"
    pdo_path: str = "fixtures/pdo_monthly.txt"
    cet_start: int = 1723
    end_year: int = 2023
    arima_order: tuple = (2, 1, 1)
    arimax_start: int = 1951
    arimax_drift: bool = True
    grid_p_max: int = 3
    grid_q_max: int = 3
    span: int = 9
    taper: float = 0.1
    detrend: bool = True
    modified_daniell: bool = False
    pad: bool = True
    alpha: float = 0.01
    winter_uses_prior_december: bool = True
    ljung_box_lags: int = 10
    acf_max_lag: int = 20
    seed: int = 0
    output_dir: str = "teleconnect-output"
    workers: int = 1
    render: bool = True

    def __post_init__(self):
        self.arima_order = tuple(int(v) for v in self.arima_order)

    def validate(self):
        if self.span < 3 or self.span % 2 == 0:
            raise DomainError("span must be an odd integer >= 3")
        if not 0.0 < self.alpha < 0.5:
            raise DomainError("alpha must lie in (0, 0.5)")
        if not 0.0 <= self.taper <= 0.5:
            raise DomainError("taper must lie in [0, 0.5]")
        if len(self.arima_order) != 3:
            raise DomainError("arima_order needs three integers")

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError(f"config {path} must hold a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**raw)
        for key in ("cet_path", "nao_path", "pdo_path", "output_dir"):
            value = getattr(cfg, key)
            if key in raw and not os.path.isabs(value):
                setattr(cfg, key, str(path.parent / value))
        return cfg

    def hashable(self) -> dict:
        out = {k: v for k, v in dataclasses.asdict(self).items() if k not in _UNHASHED}
        for key in ("cet_path", "nao_path", "pdo_path"):
            out[key] = os.path.basename(out[key])
        out["arima_order"] = list(out["arima_order"])
        return out

    def digest(self) -> str:
        blob = json.dumps(self.hashable(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class CoherenceBlock:
    partner: str
    first_year: int
    last_year: int
    estimate: SpectralEstimate
    threshold: CoherenceThreshold
    bands: list
    peak: tuple

    def as_dict(self) -> dict:
        return {
            "pair": f"CET-{self.partner.upper()}",
            "window": [self.first_year, self.last_year],
            "n_obs": self.estimate.n_obs,
            "n_fft": self.estimate.n_fft,
            "kernel": self.estimate.kernel,
            "span": self.estimate.span,
            "threshold": self.threshold.as_dict(),
            "bands": [b.as_dict() for b in self.bands],
            "peak": {"frequency": self.peak[0], "coherence": self.peak[1],
                     "period": 1.0 / self.peak[0]},
            "max_coherence": float(np.max(self.estimate.coherence)),
        }


@dataclass
class AnalysisReport:
    config: PipelineConfig
    tables: dict
    annual: dict
    seasonal: dict
    adf: dict
    correlograms: dict
    arima: FittedModel
    arima_lb: LjungBoxResult
    arima_residuals: ResidualReport
    coherence: dict
    grid: dict
    arimax: FittedModel
    arimax_lb: LjungBoxResult
    arimax_residuals: ResidualReport
    checksums: dict

    def _dataset_summary(self, name) -> dict:
        table = self.tables[name]
        s = self.annual[name]
        complete = s.values[~s.mask]
        return {
            "source": table.source.value,
            "file_years": [table.first_year, table.last_year],
            "analysis_years": [s.start[0], s.start[0] + len(s) - 1],
            "n_annual": len(s),
            "annual_mean": float(complete.mean()),
            "annual_sd": float(complete.std(ddof=1)),
            "incomplete_years": [int(y) for y in table.years[np.isnan(table.months).any(axis=1)]],
        }

    def to_dict(self) -> dict:
        grid_rows = []
        for (p, q), m in self.grid.items():
            if isinstance(m, FittedModel):
                grid_rows.append({"p": p, "q": q, "aic": m.aic, "converged": m.converged,
                                  "admissible": m.admissible})
            else:
                grid_rows.append({"p": p, "q": q, "error": m})
        return {
            "datasets": {k: self._dataset_summary(k) for k in ("cet", "nao", "pdo")},
            "adf": {k: v.as_dict() for k, v in self.adf.items()},
            "arima": {**self.arima.to_dict(), "ljung_box": self.arima_lb.as_dict(),
                      "residual_acf_outside": self.arima_residuals.acf.outside_bounds().tolist()},
            "coherence": {k: v.as_dict() for k, v in self.coherence.items()},
            "arimax": {
                "window": [self.config.arimax_start, self.config.end_year],
                "grid": grid_rows,
                "selected_order": [self.arimax.spec.p, self.arimax.spec.d, self.arimax.spec.q],
                **self.arimax.to_dict(),
                "ljung_box": self.arimax_lb.as_dict(),
                "residual_acf_outside": self.arimax_residuals.acf.outside_bounds().tolist(),
            },
            "ljung_box": {"arima": self.arima_lb.as_dict(), "arimax": self.arimax_lb.as_dict()},
            "provenance": {
                "config": self.config.hashable(),
                "config_sha256": self.config.digest(),
                "fixture_sha256": self.checksums,
                "toolkit_version": __version__,
            },
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def round_sig(obj, digits: int = 6):
    """Recursively round floats to ``digits`` significant digits for stable output."""
    if isinstance(obj, dict):
        return {str(k): round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v, digits) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(f"{v:.{digits}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(round_sig(obj), sort_keys=True, indent=2) + "\n"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _stage(name, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except PipelineError:
        raise
    except (TeleconnectError, OSError, ValueError) as exc:
        raise PipelineError(name, exc) from exc


def _coherence(cet: TimeSeries, other: TimeSeries, partner: str, cfg: PipelineConfig) -> CoherenceBlock:
    aligned = align([cet, other], end=cfg.end_year)
    if aligned.dropped_years:
        raise DomainError(f"missing values inside the CET-{partner} overlap: {aligned.dropped_years}")
    x = np.diff(aligned.matrix[:, 0])
    y = np.diff(aligned.matrix[:, 1])
    est = periodogram_pair(x, y, span=cfg.span, detrend=cfg.detrend, taper=cfg.taper,
                           modified=cfg.modified_daniell, pad=cfg.pad)
    thr = coherence_threshold(x.size, cfg.span, cfg.alpha)
    return CoherenceBlock(partner, int(aligned.years[0]), int(aligned.years[-1]), est, thr,
                          significant_bands(est, thr), peak_coherence(est))


def run_analysis(cfg: PipelineConfig) -> AnalysisReport:
    """Run every stage in memory; nothing is written to disk."""
    _stage("config", cfg.validate)
    paths = {"cet": cfg.cet_path, "nao": cfg.nao_path, "pdo": cfg.pdo_path}
    sources = {"cet": Source.CET_MONTHLY, "nao": Source.NAO_MONTHLY, "pdo": Source.PDO_MONTHLY}
    tables: dict[str, RawTable] = {k: _stage("ingest", read_table, paths[k], sources[k]) for k in paths}
    checksums = {os.path.basename(p): sha256_file(p) for p in paths.values()}

    conv = SeasonConvention(winter_uses_prior_december=cfg.winter_uses_prior_december)

    def aggregate():
        annual = {}
        for k, t in tables.items():
            start = cfg.cet_start if k == "cet" else None
            annual[k] = to_annual(t).window(start, cfg.end_year).trim_missing()
            if annual[k].has_missing:
                raise DomainError(f"{k} has missing annual values inside its span")
        seasonal = {k: to_seasonal(t, conv) for k, t in tables.items()}
        return annual, seasonal

    annual, seasonal = _stage("aggregate", aggregate)

    def stationarity():
        out = {}
        for k, s in annual.items():
            out[k] = adf_test(s)
        for k, s in annual.items():
            out[f"{k}_diff"] = adf_test(difference(s, 1))
        # the CET window behind the reference p-value is ambiguous; report the short one too
        out["cet_modern"] = adf_test(annual["cet"].window(cfg.arimax_start, cfg.end_year))
        return out

    adf = _stage("stationarity", stationarity)

    cet = annual["cet"]

    def correlograms():
        d1 = difference(cet, 1)
        lag = cfg.acf_max_lag
        return {"acf": acf(cet, lag), "pacf": pacf(cet, lag),
                "acf_diff": acf(d1, lag), "pacf_diff": pacf(d1, lag)}

    corr = _stage("identification", correlograms)

    p, d, q = cfg.arima_order
    arima = _stage("arima", fit, ModelSpec(p, d, q), cet, seed=cfg.seed)

    def coherence():
        jobs = [("nao", annual["nao"]), ("pdo", annual["pdo"])]
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                blocks = list(pool.map(lambda j: _coherence(cet, j[1], j[0], cfg), jobs))
        else:
            blocks = [_coherence(cet, s, k, cfg) for k, s in jobs]
        return {b.partner: b for b in blocks}

    coh = _stage("coherence", coherence)

    def arimax():
        aligned = align([cet, annual["pdo"], annual["nao"]], start=cfg.arimax_start, end=cfg.end_year)
        if aligned.dropped_years:
            raise DomainError(f"missing values inside the ARIMAX window: {aligned.dropped_years}")
        y = aligned.column(0)
        X = aligned.matrix[:, 1:]
        best, table = grid_search(y, X, d=1, p_max=cfg.grid_p_max, q_max=cfg.grid_q_max,
                                  drift=cfg.arimax_drift, exog_names=("PDO", "NAO"),
                                  workers=cfg.workers, seed=cfg.seed)
        return best, table

    best, grid = _stage("arimax", arimax)

    def diagnostics():
        lb1 = ljung_box(arima.residuals, cfg.ljung_box_lags, arima.spec.p + arima.spec.q)
        lb2 = ljung_box(best.residuals, cfg.ljung_box_lags, best.spec.p + best.spec.q)
        return (lb1, residual_report(arima.residuals, cfg.acf_max_lag),
                lb2, residual_report(best.residuals, cfg.acf_max_lag))

    lb1, rr1, lb2, rr2 = _stage("diagnostics", diagnostics)

    return AnalysisReport(cfg, tables, annual, seasonal, adf, corr, arima, lb1, rr1, coh, grid,
                          best, lb2, rr2, checksums)


def resolve_output_dir(cfg: PipelineConfig, override=None) -> Path:
    return Path(override or os.environ.get(OUTPUT_ENV) or cfg.output_dir)


def run_pipeline(cfg: PipelineConfig, output_dir=None) -> tuple[AnalysisReport, Path]:
    """Run the analysis and write ``report.json`` plus figure data under the output directory.

    Outputs are staged in a scratch directory and moved into place only after
    every stage succeeds, so a failed run leaves no partial files behind.
    """
    from teleconnect.figures import FIGURES, emit_figure_data

    out = resolve_output_dir(cfg, output_dir)
    report = run_analysis(cfg)
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        (staging / "report.json").write_text(report.to_json(), encoding="utf-8")
        for fig in FIGURES:
            _stage("figures", emit_figure_data, report, fig, staging / "figures", render=cfg.render)
        final_fig = out / "figures"
        if final_fig.exists():
            shutil.rmtree(final_fig)
        os.replace(staging / "figures", final_fig)
        os.replace(staging / "report.json", out / "report.json")
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return report, out
