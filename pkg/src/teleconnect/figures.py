"""Figure data (CSV) and matplotlib renderings for the six report figures.

Each figure id maps to a subdirectory holding its CSV tables and, when
rendering is enabled, one PNG drawn from exactly those tables.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from teleconnect.errors import UsageError  # noqa: E402
from teleconnect.series import format_float, standardize  # noqa: E402

FIGURES = ("F1", "F2", "F3", "F4", "F5", "F6")
SEASONS = ("spring", "summer", "autumn", "winter")

STYLE = {
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 0.9,
    "savefig.dpi": 120,
}


def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    return "" if math.isnan(v) else format_float(v)


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


# -- F1: raw and standardized series -----------------------------------------

def _f1(report, out: Path, render: bool):
    paths = []
    annual = report.annual
    for key in ("cet", "nao", "pdo"):
        s = annual[key]
        p = out / f"{key}_annual.csv"
        p.parent.mkdir(parents=True, exist_ok=True)
        s.to_csv(p, header=("year", key))
        paths.append(p)
    std = {k: standardize(annual[k]) for k in ("cet", "nao", "pdo")}
    lo = min(s.start[0] for s in std.values())
    hi = max(s.start[0] + len(s) - 1 for s in std.values())
    rows = []
    for year in range(lo, hi + 1):
        row = [year]
        for k in ("cet", "nao", "pdo"):
            s = std[k]
            i = year - s.start[0]
            row.append(s.values[i] if 0 <= i < len(s) else math.nan)
        rows.append(row)
    paths.append(write_csv(out / "combined_standardized.csv", ("year", "cet", "nao", "pdo"), rows))
    if render:
        with plt.rc_context(STYLE):
            fig, axes = plt.subplots(4, 1, figsize=(7, 8), sharex=True)
            for ax, key, label in zip(axes, ("cet", "nao", "pdo"), ("CET (degC)", "NAO index", "PDO index")):
                s = annual[key]
                ax.plot(s.years(), s.values, color="k")
                ax.set_ylabel(label)
            arr = np.array(rows, dtype=float)
            for j, key in enumerate(("cet", "nao", "pdo"), start=1):
                axes[3].plot(arr[:, 0], arr[:, j], label=key.upper())
            axes[3].set_ylabel("standardized")
            axes[3].legend(loc="upper left", ncol=3, frameon=False)
            axes[3].set_xlabel("year")
            paths.append(_save(fig, out / "F1.png"))
    return paths


# -- F2: seasonal and annual means --------------------------------------------

def _f2(report, out: Path, render: bool):
    paths, tables = [], {}
    end = report.config.end_year
    for key in ("cet", "nao", "pdo"):
        seasonal = report.seasonal[key]
        annual = report.annual[key]
        first = annual.start[0]
        last = min(end, annual.start[0] + len(annual) - 1)
        rows = []
        for year in range(first, last + 1):
            row = [year]
            for name in SEASONS:
                s = seasonal[name]
                row.append(s.values[year - s.start[0]])
            row.append(annual.values[year - first])
            rows.append(row)
        tables[key] = np.array(rows, dtype=float)
        paths.append(write_csv(out / f"{key}_seasonal.csv", ("year",) + SEASONS + ("annual",), rows))
    if render:
        with plt.rc_context(STYLE):
            fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=False)
            for ax, key in zip(axes, ("cet", "nao", "pdo")):
                arr = tables[key]
                for j, name in enumerate(SEASONS + ("annual",), start=1):
                    ax.plot(arr[:, 0], arr[:, j], label=name, color="k" if name == "annual" else None,
                            linewidth=1.3 if name == "annual" else 0.7)
                ax.set_title(key.upper())
            axes[0].legend(ncol=5, frameon=False, loc="upper left")
            fig.tight_layout()
            paths.append(_save(fig, out / "F2.png"))
    return paths


# -- F3: ACF and PACF before / after differencing ---------------------------

def _f3(report, out: Path, render: bool):
    c = report.correlograms
    rows = [[lag, c["acf"].values[i], c["pacf"].values[i], c["acf_diff"].values[i], c["pacf_diff"].values[i]]
            for i, lag in enumerate(c["acf"].lags)]
    paths = [write_csv(out / "cet_correlograms.csv",
                       ("lag", "acf", "pacf", "acf_diff", "pacf_diff"), rows)]
    paths.append(write_csv(out / "bounds.csv", ("series", "bound"),
                           [["raw", c["acf"].confidence_bound], ["differenced", c["acf_diff"].confidence_bound]]))
    if render:
        with plt.rc_context(STYLE):
            fig, axes = plt.subplots(2, 2, figsize=(7, 5), sharey=True)
            for ax, key, title in zip(axes.ravel(), ("acf", "pacf", "acf_diff", "pacf_diff"),
                                      ("ACF", "PACF", "ACF, differenced", "PACF, differenced")):
                corr = c[key]
                lags = corr.lags[1:]
                ax.vlines(lags, 0, corr.values[1:], color="k")
                ax.axhline(0, color="k", linewidth=0.5)
                for sign in (1, -1):
                    ax.axhline(sign * corr.confidence_bound, color="tab:blue", linestyle="--")
                ax.set_title(title)
                ax.set_xlabel("lag")
            fig.tight_layout()
            paths.append(_save(fig, out / "F3.png"))
    return paths


# -- F4: residual diagnostics ----------------------------------------------------

def _f4(report, out: Path, render: bool):
    resid = report.arima.residuals
    rr = report.arima_residuals
    paths = []
    p = out / "residuals.csv"
    p.parent.mkdir(parents=True, exist_ok=True)
    resid.to_csv(p, header=("year", "residual"))
    paths.append(p)
    paths.append(write_csv(out / "residual_acf.csv", ("lag", "acf", "bound"),
                           [[lag, v, rr.acf.confidence_bound] for lag, v in zip(rr.acf.lags, rr.acf.values)]))
    edges = rr.bin_edges
    paths.append(write_csv(out / "histogram.csv", ("left", "right", "count"),
                           [[edges[i], edges[i + 1], int(rr.counts[i])] for i in range(rr.counts.size)]))
    paths.append(write_csv(out / "density.csv", ("x", "density"), zip(rr.density_x, rr.density_y)))
    if render:
        with plt.rc_context(STYLE):
            fig = plt.figure(figsize=(7, 5))
            top = fig.add_subplot(2, 1, 1)
            top.plot(resid.years(), resid.values, color="k")
            top.set_title(f"Residuals from {report.arima.spec.describe()}")
            left = fig.add_subplot(2, 2, 3)
            left.vlines(rr.acf.lags[1:], 0, rr.acf.values[1:], color="k")
            for sign in (1, -1):
                left.axhline(sign * rr.acf.confidence_bound, color="tab:blue", linestyle="--")
            left.set_xlabel("lag")
            left.set_title("ACF")
            right = fig.add_subplot(2, 2, 4)
            width = np.diff(edges)
            dens = rr.counts / (rr.counts.sum() * width)
            right.bar(edges[:-1], dens, width=width, align="edge", color="0.8", edgecolor="k", linewidth=0.4)
            right.plot(rr.density_x, rr.density_y, color="tab:red")
            right.set_title("histogram and kernel density")
            fig.tight_layout()
            paths.append(_save(fig, out / "F4.png"))
    return paths


# -- F5 / F6: coherence -----------------------------------------------------------

def _coherence_fig(report, partner: str, fig_id: str, out: Path, render: bool):
    block = report.coherence[partner]
    est, thr = block.estimate, block.threshold
    rows = [[est.freqs[i], est.f_xx[i], est.f_yy[i], est.f_xy[i].real, est.f_xy[i].imag,
             est.coherence[i], thr.C] for i in range(est.freqs.size)]
    paths = [write_csv(out / f"coherence_cet_{partner}.csv",
                       ("freq", "f_xx", "f_yy", "re_f_xy", "im_f_xy", "coherence", "C"), rows)]
    if render:
        with plt.rc_context(STYLE):
            fig, ax = plt.subplots(figsize=(7, 3.5))
            ax.plot(est.freqs, est.coherence, color="k")
            ax.axhline(thr.C, color="tab:red", linestyle="--", label=f"C = {thr.C:.4f}")
            for band in block.bands:
                ax.axvspan(band.lo, band.hi, color="tab:orange", alpha=0.2)
            ax.set_xlabel("frequency (cycles per year)")
            ax.set_ylabel("squared coherence")
            ax.set_title(f"CET-{partner.upper()}, {est.kernel} span {est.span}")
            ax.set_ylim(0, 1)
            ax.legend(frameon=False)
            fig.tight_layout()
            paths.append(_save(fig, out / f"{fig_id}.png"))
    return paths


_BUILDERS = {
    "F1": _f1,
    "F2": _f2,
    "F3": _f3,
    "F4": _f4,
    "F5": lambda r, o, x: _coherence_fig(r, "nao", "F5", o, x),
    "F6": lambda r, o, x: _coherence_fig(r, "pdo", "F6", o, x),
}


def emit_figure_data(report, figure: str, out_dir, render: bool = True) -> list[Path]:
    """Write the tables (and optionally the PNG) for one figure; returns the paths written."""
    key = str(figure).upper()
    if key not in _BUILDERS:
        raise UsageError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    out = Path(out_dir) / key
    out.mkdir(parents=True, exist_ok=True)
    return _BUILDERS[key](report, out, render)
