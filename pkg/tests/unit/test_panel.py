"""Unit tests for rate-panel and volatility ingest."""

import numpy as np
import pytest

from src.data.panel import (
    ColumnLayout,
    RatePanel,
    VolSeries,
    YearMonth,
    align,
    load_rate_panel,
    load_vol,
    month_range,
    write_rate_panel,
    write_vol,
)
from src.errors import (
    InsufficientOverlap,
    MisalignedSeries,
    MissingColumn,
    NonFiniteValue,
    NonMonotoneDates,
    NonPositiveVol,
    SparseMonth,
)

HEADER = "observation_date," + ",".join(f"THREEFY{m}" for m in range(1, 11))


def _rate_row(date: str, base: float = 3.0) -> str:
    return date + "," + ",".join(f"{base + 0.1 * m:.2f}" for m in range(1, 11))


def _write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def _daily_vol_lines(year, month, values):
    return [f"{year:04d}-{month:02d}-{day + 1:02d},{value}" for day, value in enumerate(values)]


class TestYearMonth:
    def test_parse_month_and_day(self):
        assert YearMonth.parse("2024-08") == YearMonth(2024, 8)
        assert YearMonth.parse("1990-01-31") == YearMonth(1990, 1)

    def test_str_and_ordinal(self):
        ym = YearMonth(1999, 12)
        assert str(ym) == "1999-12"
        assert YearMonth.from_ordinal(ym.ordinal + 1) == YearMonth(2000, 1)

    def test_rejects_bad_month(self):
        with pytest.raises(ValueError):
            YearMonth.parse("2020-13")


class TestLoadRatePanel:
    def test_small_monthly_file(self, tmp_path):
        path = _write(
            tmp_path,
            "rates.csv",
            [HEADER, _rate_row("2020-01"), _rate_row("2020-02"), _rate_row("2020-03")],
        )
        panel = load_rate_panel(path)
        assert panel.T == 3
        assert panel.M == 10
        assert panel.maturities == tuple(range(1, 11))
        assert panel.values[0, 0] == pytest.approx(3.1)
        assert panel.report.rows_read == 3
        assert panel.report.rows_dropped == 0

    def test_duplicated_month(self, tmp_path):
        path = _write(
            tmp_path,
            "rates.csv",
            [HEADER, _rate_row("2020-01"), _rate_row("2020-02"), _rate_row("2020-02")],
        )
        with pytest.raises(NonMonotoneDates):
            load_rate_panel(path)

    def test_gap_between_months(self, tmp_path):
        path = _write(tmp_path, "rates.csv", [HEADER, _rate_row("2020-01"), _rate_row("2020-03")])
        with pytest.raises(NonMonotoneDates):
            load_rate_panel(path)

    def test_incomplete_row_dropped_and_counted(self, tmp_path):
        incomplete = "2020-03," + ",".join(["."] + ["3.0"] * 9)
        path = _write(
            tmp_path, "rates.csv", [HEADER, _rate_row("2020-01"), _rate_row("2020-02"), incomplete]
        )
        panel = load_rate_panel(path)
        assert panel.T == 2
        assert panel.report.rows_read == 3
        assert panel.report.rows_dropped == 1
        assert panel.report.to_dict()["range"] == ["2020-01", "2020-02"]

    def test_unparseable_cell_names_column_and_row(self, tmp_path):
        bad = "2020-02," + ",".join(["abc"] + ["3.0"] * 9)
        path = _write(tmp_path, "rates.csv", [HEADER, _rate_row("2020-01"), bad])
        with pytest.raises(NonFiniteValue) as excinfo:
            load_rate_panel(path)
        assert excinfo.value.column == "THREEFY1"
        assert excinfo.value.row == 3

    def test_value_outside_sanity_band(self, tmp_path):
        bad = "2020-02," + ",".join(["60.0"] + ["3.0"] * 9)
        path = _write(tmp_path, "rates.csv", [HEADER, _rate_row("2020-01"), bad])
        with pytest.raises(NonFiniteValue):
            load_rate_panel(path)

    def test_missing_date_column(self, tmp_path):
        path = _write(tmp_path, "rates.csv", ["when,y1,y2", "2020-01,1.0,2.0"])
        with pytest.raises(MissingColumn):
            load_rate_panel(path)

    def test_explicit_layout(self, tmp_path):
        path = _write(tmp_path, "rates.csv", ["when,short,long", "2020-01,1.0,2.0", "2020-02,1.5,2.5"])
        layout = ColumnLayout.from_dict(
            {"date_column": "when", "maturity_columns": {"long": 10, "short": 1}}
        )
        panel = load_rate_panel(path, layout)
        assert panel.maturities == (1, 10)
        np.testing.assert_array_equal(panel.values, [[1.0, 2.0], [1.5, 2.5]])

    def test_daily_rates_sampled_at_month_end(self, tmp_path):
        lines = [
            "date,y1,y2",
            "2020-01-02,1.0,2.0",
            "2020-01-31,1.1,2.1",
            "2020-02-03,1.2,2.2",
            "2020-02-28,1.3,2.3",
        ]
        panel = load_rate_panel(_write(tmp_path, "rates.csv", lines), frequency="daily")
        assert panel.dates == (YearMonth(2020, 1), YearMonth(2020, 2))
        np.testing.assert_array_equal(panel.values, [[1.1, 2.1], [1.3, 2.3]])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_rate_panel(tmp_path / "absent.csv")


class TestLoadVol:
    def test_monthly_pass_through(self, tmp_path):
        path = _write(tmp_path, "vix.csv", ["DATE,VIXCLS", "2020-01,19.0", "2020-02,21.5"])
        vol = load_vol(path)
        np.testing.assert_array_equal(vol.values, [19.0, 21.5])

    def test_daily_constant_month(self, tmp_path):
        lines = ["DATE,VIXCLS"] + _daily_vol_lines(2020, 1, ["18.0"] * 20)
        vol = load_vol(_write(tmp_path, "vix.csv", lines), frequency="daily")
        assert vol.dates == (YearMonth(2020, 1),)
        assert vol.values[0] == 18.0

    def test_daily_mean_skips_missing(self, tmp_path):
        values = ["10.0"] * 10 + ["20.0"] * 10 + ["."]
        lines = ["DATE,VIXCLS"] + _daily_vol_lines(2020, 1, values)
        vol = load_vol(_write(tmp_path, "vix.csv", lines), frequency="daily")
        assert vol.values[0] == pytest.approx(15.0)
        assert vol.report.rows_dropped == 1

    def test_zero_value(self, tmp_path):
        lines = ["DATE,VIXCLS"] + _daily_vol_lines(2020, 1, ["18.0"] * 19 + ["0.0"])
        with pytest.raises(NonPositiveVol):
            load_vol(_write(tmp_path, "vix.csv", lines), frequency="daily")

    def test_sparse_month(self, tmp_path):
        lines = ["DATE,VIXCLS"] + _daily_vol_lines(2020, 1, ["18.0"] * 10)
        with pytest.raises(SparseMonth) as excinfo:
            load_vol(_write(tmp_path, "vix.csv", lines), frequency="daily")
        assert excinfo.value.month == "2020-01"

    def test_single_unnamed_value_column(self, tmp_path):
        path = _write(tmp_path, "vix.csv", ["date,close", "2020-01,19.0", "2020-02,21.5"])
        assert len(load_vol(path)) == 2


class TestAlign:
    def test_identical_ranges_unchanged(self, panel, vol):
        dataset = align(panel, vol)
        assert dataset.panel == panel
        assert dataset.vol == vol

    def test_truncates_to_intersection(self, panel, vol):
        earlier = VolSeries(month_range(YearMonth(1995, 1), len(vol) + 60), np.full(len(vol) + 60, 20.0))
        shorter = panel.between(panel.dates[10], panel.dates[-1])
        dataset = align(shorter, earlier)
        assert dataset.range == (panel.dates[10], panel.dates[-1])
        assert dataset.vol.dates == dataset.panel.dates

    def test_idempotent(self, panel, vol):
        shifted = VolSeries(month_range(panel.dates[5], 100), np.full(100, 20.0))
        once = align(panel, shifted)
        twice = align(once.panel, once.vol)
        assert twice.panel == once.panel
        assert twice.vol == once.vol

    def test_disjoint_ranges(self, panel):
        later = VolSeries(month_range(YearMonth(2030, 1), 30), np.full(30, 20.0))
        with pytest.raises(InsufficientOverlap):
            align(panel, later)

    def test_short_overlap(self, panel):
        overlap = VolSeries(month_range(panel.dates[-10], 30), np.full(30, 20.0))
        with pytest.raises(InsufficientOverlap):
            align(panel, overlap)

    def test_aligned_dataset_rejects_mismatch(self, panel, vol):
        from src.data.panel import AlignedDataset

        with pytest.raises(MisalignedSeries):
            AlignedDataset(panel.between(panel.dates[1], panel.dates[-1]), vol)


class TestRoundTrip:
    def test_rate_panel(self, tmp_path, panel):
        path = write_rate_panel(panel, tmp_path / "panel.csv")
        assert load_rate_panel(path) == panel

    def test_vol(self, tmp_path, vol):
        path = write_vol(vol, tmp_path / "vol.csv")
        assert load_vol(path) == vol


class TestInvariants:
    def test_panel_rejects_single_maturity(self):
        with pytest.raises(MissingColumn):
            RatePanel(month_range(YearMonth(2020, 1), 2), (1,), [[1.0], [2.0]])

    def test_vol_rejects_negative(self):
        with pytest.raises(NonPositiveVol):
            VolSeries(month_range(YearMonth(2020, 1), 2), [1.0, -2.0])

    def test_values_read_only(self, panel):
        with pytest.raises(ValueError):
            panel.values[0, 0] = 1.0
