#!/usr/bin/env python3
"""Write synthetic stand-ins for the CET, NAO and PDO monthly files.

The real products could not be downloaded into the build environment, so
these files only mimic the layout, sentinels, spans and rough statistical
character of the originals. They are generated once, from a fixed seed,
with plain numpy so they do not depend on the package under test.

Usage: python scripts/make_synthetic_fixtures.py [OUTDIR]
"""

import sys
from pathlib import Path

import numpy as np

SEED = 1723
# Jan..Dec long-run means of Central England, degC (approximate)
CLIMATOLOGY = np.array([3.8, 4.1, 5.7, 8.0, 11.2, 14.2, 16.1, 15.8, 13.6, 10.4, 6.7, 4.6])
FIRST, LAST = 1723, 2024
LAST_FULL_MONTH_2024 = 9


def simulate():
    rng = np.random.default_rng(SEED)
    years = np.arange(FIRST, LAST + 1)
    n = years.size

    # NAO: annual signal with 6.7 and 2.2 year cycles plus noise, monthly noise on top
    t = years - FIRST
    nao_annual = (0.25 * np.sin(2 * np.pi * t / 6.7 + 0.4)
                  + 0.15 * np.sin(2 * np.pi * t / 2.2 + 1.1)
                  + rng.normal(0.0, 0.3, n))
    nao_monthly = nao_annual[:, None] + rng.normal(0.0, 0.9, (n, 12))

    # PDO: monthly AR(1), long memory
    flat = np.zeros(n * 12 + 600)
    shocks = rng.normal(0.0, 0.45, flat.size)
    for i in range(1, flat.size):
        flat[i] = 0.92 * flat[i - 1] + shocks[i]
    pdo_monthly = flat[600:].reshape(n, 12)

    # CET annual level: ARIMA(2,1,1)-like wander, warming after 1900, NAO and PDO influence
    e = rng.normal(0.0, 0.55, n + 200)
    w = np.zeros(n + 200)
    for i in range(3, w.size):
        w[i] = 0.11 * w[i - 1] + 0.17 * w[i - 2] + e[i] - 0.93 * e[i - 1]
    wander = np.cumsum(w[200:])
    wander -= wander[0]
    warming = np.where(years > 1900, 0.008 * (years - 1900), 0.0) + np.where(years > 1980, 0.02 * (years - 1980), 0.0)
    level = 9.0 - CLIMATOLOGY.mean() + wander + warming + 0.3 * nao_monthly.mean(axis=1) + 0.02 * pdo_monthly.mean(axis=1)
    anomalies = rng.normal(0.0, 1.2, (n, 12))
    anomalies -= anomalies.mean(axis=1, keepdims=True)
    cet_monthly = CLIMATOLOGY[None, :] + level[:, None] + anomalies
    return years, cet_monthly, nao_monthly, pdo_monthly


def write(path, years, months, first, decimals, sentinel, annual_column, header):
    lines = list(header)
    for year, row in zip(years, months):
        if year < first:
            continue
        row = np.round(row, decimals)
        if year == LAST:
            row[LAST_FULL_MONTH_2024:] = np.nan
        cells = [f"{sentinel:.{decimals}f}" if np.isnan(v) else f"{v:.{decimals}f}" for v in row]
        if annual_column:
            ann = f"{sentinel:.{decimals}f}" if np.isnan(row).any() else f"{row.mean():.{decimals}f}"
            cells.append(ann)
        width = decimals + 5
        lines.append(f"{year:4d} " + " ".join(f"{c:>{width}s}" for c in cells))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    years, cet, nao, pdo = simulate()
    months = "Jan Feb Mar Apr May Jun Jul Aug Sep Oct Nov Dec"
    write(outdir / "cet_monthly.txt", years, cet, 1723, 1, -99.9, True,
          ["SYNTHETIC monthly mean temperature in the CET layout (degC)",
           f"Year {months} Annual"])
    write(outdir / "nao_monthly.txt", years, nao, 1950, 2, -99.99, False,
          ["SYNTHETIC monthly NAO index in the NOAA table layout", f"Year {months}"])
    write(outdir / "pdo_monthly.txt", years, pdo, 1854, 2, 99.99, False,
          ["SYNTHETIC monthly PDO index in the NOAA ERSST layout", f"Year {months}"])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures")
