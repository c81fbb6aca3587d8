"""Parsers for the CET, NAO and PDO monthly ASCII products, plus aggregation.

All three products are whitespace-separated tables with one row per year::

    CET:  YEAR m1 ... m12 ANNUAL    (sentinel -99.9)
    NAO:  YEAR m1 ... m12           (sentinel -99.9 or -99.99)
    PDO:  YEAR m1 ... m12           (sentinel 99.99)

Lines whose first non-blank character is not a digit are headers and are
skipped, as are blank lines. The CET annual column is discarded; annual
means are always recomputed from the months.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from teleconnect.errors import AlignmentError, ParseError, StructuralError
from teleconnect.series import Period, TimeSeries


class Source(enum.Enum):
    CET_MONTHLY = "cet"
    NAO_MONTHLY = "nao"
    PDO_MONTHLY = "pdo"

    @classmethod
    def from_name(cls, name: str) -> "Source":
        key = name.lower().replace("_monthly", "")
        for src in cls:
            if src.value == key:
                return src
        raise ValueError(f"unknown source {name!r}; expected one of cet, nao, pdo")


SENTINELS = {
    Source.CET_MONTHLY: (-99.9,),
    Source.NAO_MONTHLY: (-99.9, -99.99),
    Source.PDO_MONTHLY: (99.99,),
}
UNITS = {Source.CET_MONTHLY: "degC", Source.NAO_MONTHLY: "index", Source.PDO_MONTHLY: "index"}
_HAS_ANNUAL_COLUMN = {Source.CET_MONTHLY}


@dataclass(frozen=True, eq=False)
class RawTable:
    source: Source
    years: np.ndarray
    months: np.ndarray  # (n_years, 12), NaN where missing

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        months = np.array(self.months, dtype=float).reshape(-1, 12)
        if years.size != months.shape[0]:
            raise StructuralError("one row of twelve months is required per year")
        if years.size == 0:
            raise StructuralError("table holds no data rows")
        steps = np.diff(years)
        if np.any(steps <= 0):
            bad = int(years[1:][steps <= 0][0])
            raise StructuralError(f"year {bad} is duplicated or out of order")
        if np.any(steps != 1):
            bad = int(years[1:][steps != 1][0])
            raise StructuralError(f"gap in years before {bad}")
        years.setflags(write=False)
        months.setflags(write=False)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "months", months)

    def __eq__(self, other):
        if not isinstance(other, RawTable):
            return NotImplemented
        return (
            self.source is other.source
            and np.array_equal(self.years, other.years)
            and np.array_equal(self.months, other.months, equal_nan=True)
        )

    @property
    def first_year(self) -> int:
        return int(self.years[0])

    @property
    def last_year(self) -> int:
        return int(self.years[-1])


@dataclass(frozen=True)
class SeasonConvention:
    seasons: tuple = (("winter", (12, 1, 2)), ("spring", (3, 4, 5)), ("summer", (6, 7, 8)), ("autumn", (9, 10, 11)))
    winter_uses_prior_december: bool = True


def _is_sentinel(value: float, source: Source) -> bool:
    return any(math.isclose(value, s, abs_tol=1e-9) for s in SENTINELS[source])


def parse_table(text: str, source: Source | str) -> RawTable:
    if isinstance(source, str):
        source = Source.from_name(source)
    expected = 14 if source in _HAS_ANNUAL_COLUMN else 13
    years, rows = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or not line[0].isdigit():
            continue
        cells = line.split()
        if len(cells) != expected:
            raise ParseError(f"expected {expected} columns, found {len(cells)}", line=lineno)
        try:
            year = int(cells[0])
        except ValueError:
            raise ParseError(f"year {cells[0]!r} is not an integer", line=lineno) from None
        row = []
        for cell in cells[1:13]:
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"cell {cell!r} is not numeric", line=lineno) from None
            if not math.isfinite(v):
                raise ParseError(f"cell {cell!r} is not a finite number", line=lineno)
            row.append(math.nan if _is_sentinel(v, source) else v)
        if expected == 14:
            try:
                float(cells[13])
            except ValueError:
                raise ParseError(f"annual cell {cells[13]!r} is not numeric", line=lineno) from None
        years.append(year)
        rows.append(row)
    if not rows:
        raise StructuralError(f"no data rows found for {source.value}")
    return RawTable(source, np.array(years), np.array(rows))


def read_table(path, source: Source | str) -> RawTable:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return parse_table(fh.read(), source)


def format_table(table: RawTable) -> str:
    """Serialize ``table`` back to its source grammar (exact float round trip)."""
    sentinel = SENTINELS[table.source][0]
    header = "Year " + " ".join(f"{m:>8s}" for m in ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"))
    if table.source in _HAS_ANNUAL_COLUMN:
        header += "   Annual"
    lines = [header]
    for year, row in zip(table.years, table.months):
        cells = [repr(sentinel) if math.isnan(v) else repr(float(v)) for v in row]
        if table.source in _HAS_ANNUAL_COLUMN:
            cells.append(repr(sentinel) if np.isnan(row).any() else repr(float(np.mean(row))))
        lines.append(f"{int(year):4d} " + " ".join(f"{c:>8s}" for c in cells))
    return "\n".join(lines) + "\n"


def to_monthly(table: RawTable) -> TimeSeries:
    return TimeSeries((table.first_year, 0), Period.MONTHLY, table.months.ravel(),
                      units=UNITS[table.source], name=table.source.value)


def to_annual(table: RawTable) -> TimeSeries:
    """Calendar-year means; a year with any missing month is missing."""
    annual = table.months.mean(axis=1)  # NaN propagates
    return TimeSeries((table.first_year, 0), Period.ANNUAL, annual,
                      units=UNITS[table.source], name=table.source.value)


def to_seasonal(table: RawTable, conv: SeasonConvention | None = None) -> dict[str, TimeSeries]:
    """Seasonal means keyed by season name, one value per table year.

    With ``winter_uses_prior_december`` the December of a winter triplet is
    taken from the previous year, so the first year's winter is missing.
    """
    conv = conv or SeasonConvention()
    months = table.months
    out = {}
    for sub, (name, triplet) in enumerate(conv.seasons):
        cols = []
        for m in triplet:
            col = months[:, m - 1]
            if conv.winter_uses_prior_december and name == "winter" and m == 12:
                col = np.concatenate([[np.nan], col[:-1]])
            cols.append(col)
        values = np.mean(cols, axis=0)
        out[name] = TimeSeries((table.first_year, sub), Period.SEASONAL, values,
                               units=UNITS[table.source], name=f"{table.source.value}_{name}")
    return out


@dataclass(frozen=True, eq=False)
class Aligned:
    years: np.ndarray
    matrix: np.ndarray  # (n_years, n_series)
    dropped_years: tuple
    names: tuple

    def column(self, i: int) -> TimeSeries:
        return TimeSeries((int(self.years[0]), 0), Period.ANNUAL, self.matrix[:, i], name=self.names[i])


def align(series_list, start: int | None = None, end: int | None = None) -> Aligned:
    """Intersect the spans of annual-step series and drop incomplete rows.

    Rows are dropped only at the edges or inside the window when any series is
    missing there; interior drops break regular spacing, so callers that
    difference the result should check ``dropped_years``.
    """
    if not series_list:
        raise AlignmentError("nothing to align")
    periods = {s.period for s in series_list}
    if len(periods) != 1:
        raise AlignmentError("series have different periods")
    if series_list[0].period is Period.MONTHLY:
        raise AlignmentError("align works on annual-step series")
    lo = max(s.start[0] for s in series_list)
    hi = min(s.start[0] + len(s) - 1 for s in series_list)
    if start is not None:
        lo = max(lo, start)
    if end is not None:
        hi = min(hi, end)
    if lo > hi:
        raise AlignmentError(f"series share no years in the requested window ({start}, {end})")
    years = np.arange(lo, hi + 1)
    cols = [s.values[lo - s.start[0]: hi - s.start[0] + 1] for s in series_list]
    matrix = np.column_stack(cols)
    ok = ~np.isnan(matrix).any(axis=1)
    if not ok.any():
        raise AlignmentError("every aligned year has a missing value")
    dropped = tuple(int(y) for y in years[~ok])
    names = tuple(s.name for s in series_list)
    return Aligned(years[ok], matrix[ok], dropped, names)
