import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleconnect.errors import AlignmentError, ParseError, StructuralError
from teleconnect.ingest import (
    RawTable,
    SeasonConvention,
    Source,
    align,
    format_table,
    parse_table,
    read_table,
    to_annual,
    to_seasonal,
)
from teleconnect.series import Period, TimeSeries

CET_LINE = "1723  4.1  5.0  6.3  8.1 11.2 14.3 15.9 15.5 13.1  9.4  6.2  4.0  9.4"


def _table(source, first, months):
    months = np.asarray(months, dtype=float).reshape(-1, 12)
    return RawTable(source, np.arange(first, first + months.shape[0]), months)


def _annual(first, values, name=""):
    return TimeSeries((first, 0), Period.ANNUAL, values, name=name)


# -- grammar -------------------------------------------------------------------

def test_cet_line_drops_annual_column():
    t = parse_table(CET_LINE, Source.CET_MONTHLY)
    assert t.years.tolist() == [1723]
    np.testing.assert_array_equal(t.months[0], [4.1, 5.0, 6.3, 8.1, 11.2, 14.3, 15.9, 15.5, 13.1, 9.4, 6.2, 4.0])


def test_pdo_sentinel_is_missing():
    line = "1900 " + " ".join(["0.5"] * 11) + " 99.99"
    t = parse_table(line, "pdo")
    assert math.isnan(t.months[0, 11])
    assert np.isfinite(t.months[0, :11]).all()


@pytest.mark.parametrize("source,sentinel", [("cet", "-99.9"), ("nao", "-99.9"), ("nao", "-99.99")])
def test_other_sentinels(source, sentinel):
    cells = ["1.0"] * 11 + [sentinel] + (["9.0"] if source == "cet" else [])
    t = parse_table("2000 " + " ".join(cells), source)
    assert np.isnan(t.months[0]).sum() == 1


def test_eleven_cells_reports_line_number():
    text = "Year Jan ...\n\n2000 " + " ".join(["1.0"] * 11)
    with pytest.raises(ParseError, match="line 3"):
        parse_table(text, "nao")


@pytest.mark.parametrize("bad", ["abc", "nan", "inf"])
def test_non_numeric_cell(bad):
    with pytest.raises(ParseError):
        parse_table("2000 " + " ".join(["1.0"] * 11 + [bad]), "nao")


def test_header_and_comment_lines_skipped():
    text = "# synthetic\nYear Jan Feb\n" + "1950 " + " ".join(["0.1"] * 12) + "\n"
    assert parse_table(text, "nao").years.tolist() == [1950]


@pytest.mark.parametrize("years", [[2000, 2002], [2001, 2000], [2000, 2000]])
def test_structural_year_errors(years):
    body = "\n".join(f"{y} " + " ".join(["1.0"] * 12) for y in years)
    with pytest.raises(StructuralError):
        parse_table(body, "nao")


def test_no_rows_is_structural():
    with pytest.raises(StructuralError):
        parse_table("Year Jan\n", "pdo")


def test_unknown_source():
    with pytest.raises(ValueError):
        Source.from_name("enso")


finite_month = st.floats(min_value=-50, max_value=50, allow_nan=False).filter(
    lambda v: all(abs(v - s) > 1e-6 for s in (-99.9, -99.99, 99.99)))


@settings(max_examples=60, deadline=None)
@given(source=st.sampled_from(list(Source)), first=st.integers(1600, 2100),
       data=st.lists(st.lists(st.one_of(finite_month, st.just(math.nan)), min_size=12, max_size=12),
                     min_size=1, max_size=6))
def test_format_parse_round_trip(source, first, data):
    t = _table(source, first, data)
    assert parse_table(format_table(t), source) == t


def test_fixture_files_parse(fixture_dir):
    spans = {}
    for src in Source:
        t = read_table(fixture_dir / f"{src.name.split('_')[0].lower()}_monthly.txt", src)
        spans[src] = (t.first_year, t.last_year)
    assert spans[Source.CET_MONTHLY][0] <= 1723
    assert spans[Source.NAO_MONTHLY][0] == 1950
    assert spans[Source.PDO_MONTHLY][0] == 1854


# -- aggregation -----------------------------------------------------------------

def test_annual_of_constant():
    assert to_annual(_table(Source.CET_MONTHLY, 2000, [7.0] * 12)).values.tolist() == [7.0]


def test_annual_of_one_to_twelve():
    assert to_annual(_table(Source.CET_MONTHLY, 2000, np.arange(1, 13))).values.tolist() == [6.5]


def test_incomplete_year_is_missing():
    months = np.ones((2, 12))
    months[1, 9:] = np.nan
    a = to_annual(_table(Source.CET_MONTHLY, 2023, months))
    assert a.values[0] == 1.0 and math.isnan(a.values[1])


def test_fixture_2024_incomplete(fixture_dir):
    a = to_annual(read_table(fixture_dir / "cet_monthly.txt", "cet"))
    assert math.isnan(a.values[2024 - a.start[0]])


@given(c=st.floats(-30, 30, allow_nan=False))
def test_seasonal_of_constant(c):
    seasons = to_seasonal(_table(Source.NAO_MONTHLY, 2000, np.full((3, 12), c)))
    for name, s in seasons.items():
        v = s.values[1:]
        np.testing.assert_allclose(v, c, atol=1e-12)


def test_winter_takes_prior_december():
    months = np.zeros((2, 12))
    months[1, 0] = 3.0
    months[1, 1] = 6.0
    winter = to_seasonal(_table(Source.CET_MONTHLY, 1999, months))["winter"]
    assert winter.values[1] == pytest.approx(3.0)
    assert math.isnan(winter.values[0])


def test_winter_same_year_convention():
    months = np.zeros((1, 12))
    months[0, [0, 1, 11]] = [3.0, 6.0, 9.0]
    conv = SeasonConvention(winter_uses_prior_december=False)
    assert to_seasonal(_table(Source.CET_MONTHLY, 2000, months), conv)["winter"].values[0] == pytest.approx(6.0)


@settings(max_examples=40, deadline=None)
@given(data=st.lists(st.lists(st.floats(-20, 20, allow_nan=False), min_size=12, max_size=12),
                     min_size=2, max_size=5))
def test_seasons_partition_the_year(data):
    """Same-year convention: mean of the four seasonal means is the annual mean."""
    t = _table(Source.NAO_MONTHLY, 1990, data)
    seasons = to_seasonal(t, SeasonConvention(winter_uses_prior_december=False))
    avg = np.mean([s.values for s in seasons.values()], axis=0)
    np.testing.assert_allclose(avg, to_annual(t).values, atol=1e-12)


# -- alignment -------------------------------------------------------------------

def test_align_analysis_windows():
    cet = _annual(1723, np.arange(301.0), "cet")
    nao = _annual(1950, np.arange(75.0), "nao")
    pdo = _annual(1854, np.arange(170.0), "pdo")
    a = align([cet, nao, pdo], start=1951)
    assert a.matrix.shape == (73, 3)
    assert (a.years[0], a.years[-1]) == (1951, 2023)
    assert a.matrix[0, 0] == 1951 - 1723


def test_align_single_year():
    s = _annual(2000, [1.0])
    assert align([s, s]).matrix.shape == (1, 2)


def test_align_disjoint_raises():
    with pytest.raises(AlignmentError):
        align([_annual(1800, np.zeros(51)), _annual(1900, np.zeros(51))])


def test_align_drops_missing_edge():
    a = align([_annual(2000, [1.0, 2.0, np.nan]), _annual(2000, [1.0, 2.0, 3.0])])
    assert a.years.tolist() == [2000, 2001] and a.dropped_years == (2002,)
