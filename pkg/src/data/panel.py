"""Rate-panel and volatility ingest.

Loads zero-coupon rate panels and volatility-index series from delimited
text, validates them, and aligns both onto a common monthly date range.
Rates stay in percent per annum and volatility in raw index points; no unit
conversion happens here.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import (
    ConfigError,
    InsufficientOverlap,
    MisalignedSeries,
    MissingColumn,
    NonFiniteValue,
    NonMonotoneDates,
    NonPositiveVol,
    SparseMonth,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RATE_BAND = (-5.0, 50.0)
MIN_DAILY_POINTS = 15
MIN_OVERLAP = 24
FREQUENCIES = ("daily", "monthly")

DATE_COLUMNS = ("date", "DATE", "Date", "observation_date")
VOL_COLUMNS = ("VIXCLS", "vix", "VIX", "value")
MISSING_TOKENS = frozenset({"", ".", "NA", "N/A", "NaN", "nan", "null"})

_DATE_RE = re.compile(r"^(\d{4})-(\d{1,2})(?:-(\d{1,2}))?$")
_TRAILING_INT = re.compile(r"(\d+)$")


class YearMonth(NamedTuple):
    """Calendar month stamp without day or time zone."""

    year: int
    month: int

    @property
    def ordinal(self) -> int:
        return self.year * 12 + self.month - 1

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "YearMonth":
        return cls(ordinal // 12, ordinal % 12 + 1)

    @classmethod
    def parse(cls, text: str) -> "YearMonth":
        """Parse ``YYYY-MM`` or ``YYYY-MM-DD``; the day is discarded."""
        return _parse_date(text)[0]

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def _parse_date(text: str) -> Tuple[YearMonth, int]:
    match = _DATE_RE.match(text.strip())
    if match is None:
        raise ValueError(f"not an ISO date: {text!r}")
    year, month = int(match.group(1)), int(match.group(2))
    day = int(match.group(3)) if match.group(3) else 0
    if not 1 <= month <= 12 or day > 31:
        raise ValueError(f"not an ISO date: {text!r}")
    return YearMonth(year, month), day


def month_range(first: YearMonth, count: int) -> Tuple[YearMonth, ...]:
    """Consecutive months starting at ``first``."""
    return tuple(YearMonth.from_ordinal(first.ordinal + k) for k in range(count))


def _check_consecutive(dates: Sequence[YearMonth]) -> None:
    for row in range(1, len(dates)):
        prev, cur = dates[row - 1], dates[row]
        step = cur.ordinal - prev.ordinal
        if step == 0:
            raise NonMonotoneDates(f"duplicate month {cur}", row=row)
        if step < 0:
            raise NonMonotoneDates(f"month {cur} follows {prev}", row=row)
        if step > 1:
            raise NonMonotoneDates(f"gap between {prev} and {cur}", row=row)


def _frozen(values: Any, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class LoadReport:
    """What happened while reading one input file."""

    rows_read: int
    rows_dropped: int
    first: Optional[YearMonth]
    last: Optional[YearMonth]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rows_read": self.rows_read,
            "rows_dropped": self.rows_dropped,
            "range": [
                str(self.first) if self.first else None,
                str(self.last) if self.last else None,
            ],
        }


@dataclass(frozen=True, eq=False)
class RatePanel:
    """Monthly zero-coupon rates in percent, one column per maturity in years."""

    dates: Tuple[YearMonth, ...]
    maturities: Tuple[int, ...]
    values: np.ndarray
    report: Optional[LoadReport] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(YearMonth(*d) for d in self.dates))
        object.__setattr__(self, "maturities", tuple(int(m) for m in self.maturities))
        values = _frozen(self.values, 2)
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.dates), len(self.maturities)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.maturities)} maturities"
            )
        if len(self.maturities) < 2:
            raise MissingColumn("maturity columns (need at least 2)")
        if any(b <= a for a, b in zip(self.maturities, self.maturities[1:])):
            raise ConfigError(f"maturities must increase: {self.maturities}")
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteValue(str(self.maturities[col]), int(row), str(values[row, col]))
        low, high = RATE_BAND
        outside = (values < low) | (values > high)
        if outside.any():
            row, col = np.argwhere(outside)[0]
            raise NonFiniteValue(str(self.maturities[col]), int(row), str(values[row, col]))
        _check_consecutive(self.dates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatePanel):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.maturities == other.maturities
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def T(self) -> int:
        return len(self.dates)

    @property
    def M(self) -> int:
        return len(self.maturities)

    def column(self, maturity: int) -> np.ndarray:
        return self.values[:, self.maturities.index(maturity)]

    def between(self, first: YearMonth, last: YearMonth) -> "RatePanel":
        """Sub-panel restricted to ``first..last`` inclusive."""
        lo = first.ordinal - self.dates[0].ordinal
        hi = last.ordinal - self.dates[0].ordinal + 1
        return RatePanel(self.dates[lo:hi], self.maturities, self.values[lo:hi])


@dataclass(frozen=True, eq=False)
class VolSeries:
    """Monthly volatility levels V(t) in index points."""

    dates: Tuple[YearMonth, ...]
    values: np.ndarray
    report: Optional[LoadReport] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(YearMonth(*d) for d in self.dates))
        values = _frozen(self.values, 1)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.dates):
            raise ValueError(
                f"{len(values)} values for {len(self.dates)} dates"
            )
        bad = np.flatnonzero(~np.isfinite(values) | (values <= 0.0))
        if bad.size:
            raise NonPositiveVol(int(bad[0]), float(values[bad[0]]))
        _check_consecutive(self.dates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VolSeries):
            return NotImplemented
        return self.dates == other.dates and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def log_values(self) -> np.ndarray:
        return np.log(self.values)

    def between(self, first: YearMonth, last: YearMonth) -> "VolSeries":
        lo = first.ordinal - self.dates[0].ordinal
        hi = last.ordinal - self.dates[0].ordinal + 1
        return VolSeries(self.dates[lo:hi], self.values[lo:hi])


@dataclass(frozen=True)
class AlignedDataset:
    """Rate panel and volatility sharing exactly the same months."""

    panel: RatePanel
    vol: VolSeries

    def __post_init__(self) -> None:
        if self.panel.dates != self.vol.dates:
            raise MisalignedSeries("panel and volatility dates differ")

    @property
    def dates(self) -> Tuple[YearMonth, ...]:
        return self.panel.dates

    @property
    def range(self) -> Tuple[YearMonth, YearMonth]:
        return self.dates[0], self.dates[-1]


@dataclass
class ColumnLayout:
    """Column mapping for an input file.

    Unset fields are detected: the date column from common names, maturity
    columns by a trailing integer in the header (``THREEFY10`` -> 10), and
    the volatility column from common names or as the only other column.
    """

    date_column: Optional[str] = None
    maturity_columns: Optional[Dict[str, int]] = None
    value_column: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "ColumnLayout":
        data = data or {}
        maturity_columns = data.get("maturity_columns")
        if maturity_columns is not None:
            maturity_columns = {str(k): int(v) for k, v in maturity_columns.items()}
        return cls(
            date_column=data.get("date_column"),
            maturity_columns=maturity_columns,
            value_column=data.get("value_column"),
        )


def _read_frame(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file does not exist: {path}")
    if not path.is_file():
        raise FileNotFoundError(f"input path is not a file: {path}")
    return pd.read_csv(path, sep=",", dtype=str, keep_default_na=False)


def _date_column(frame: pd.DataFrame, layout: ColumnLayout, path: PathLike) -> str:
    if layout.date_column is not None:
        if layout.date_column not in frame.columns:
            raise MissingColumn(layout.date_column, str(path))
        return layout.date_column
    for name in DATE_COLUMNS:
        if name in frame.columns:
            return name
    raise MissingColumn("date", str(path))


def _maturity_columns(
    frame: pd.DataFrame, layout: ColumnLayout, date_col: str, path: PathLike
) -> List[Tuple[str, int]]:
    if layout.maturity_columns is not None:
        for name in layout.maturity_columns:
            if name not in frame.columns:
                raise MissingColumn(name, str(path))
        pairs = list(layout.maturity_columns.items())
    else:
        pairs = []
        for name in frame.columns:
            match = _TRAILING_INT.search(str(name))
            if name != date_col and match is not None:
                pairs.append((str(name), int(match.group(1))))
    if len(pairs) < 2:
        raise MissingColumn("maturity columns (need at least 2)", str(path))
    pairs.sort(key=lambda p: p[1])
    seen = [m for _, m in pairs]
    if len(set(seen)) != len(seen):
        raise ConfigError(f"duplicate maturities in {path}: {seen}")
    return pairs


def _value_column(frame: pd.DataFrame, layout: ColumnLayout, date_col: str, path: PathLike) -> str:
    if layout.value_column is not None:
        if layout.value_column not in frame.columns:
            raise MissingColumn(layout.value_column, str(path))
        return layout.value_column
    for name in VOL_COLUMNS:
        if name in frame.columns:
            return name
    others = [c for c in frame.columns if c != date_col]
    if len(others) == 1:
        return str(others[0])
    raise MissingColumn("volatility value", str(path))


def _parse_cell(text: str, column: str, line: int) -> float:
    """Parse one numeric cell; missing markers become NaN."""
    token = str(text).strip()
    if token in MISSING_TOKENS:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        raise NonFiniteValue(column, line, token) from None
    if not math.isfinite(value):
        raise NonFiniteValue(column, line, token)
    return value


def _parse_dates(frame: pd.DataFrame, date_col: str) -> List[Tuple[YearMonth, int]]:
    parsed = []
    for index, text in enumerate(frame[date_col]):
        try:
            parsed.append(_parse_date(str(text)))
        except ValueError as exc:
            raise NonMonotoneDates(str(exc), row=index + 2) from None
    return parsed


def _check_daily_order(stamps: Sequence[Tuple[YearMonth, int]]) -> None:
    for row in range(1, len(stamps)):
        prev = (stamps[row - 1][0].ordinal, stamps[row - 1][1])
        cur = (stamps[row][0].ordinal, stamps[row][1])
        if cur <= prev:
            raise NonMonotoneDates(
                f"daily dates not strictly increasing at {stamps[row][0]}", row=row + 2
            )


def load_rate_panel(
    path: PathLike,
    layout: Optional[ColumnLayout] = None,
    frequency: str = "monthly",
) -> RatePanel:
    """Load a rate panel from a CSV file.

    Rows with any missing maturity value are dropped and counted in the
    panel's load report. Daily input is sampled at the last complete row of
    each month (end-of-month rates).

    Args:
        path: CSV with a header row, comma separator and dot decimals.
        layout: Optional column mapping; detected when omitted.
        frequency: ``"monthly"`` or ``"daily"``.

    Returns:
        A validated RatePanel; ``panel.report`` holds the load report.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        MissingColumn: If the date column or two maturity columns are absent.
        NonMonotoneDates: If months repeat, go backwards or leave a gap.
        NonFiniteValue: If a cell is unparseable, infinite or outside the
            sanity band. Rows are reported as file line numbers.
    """
    if frequency not in FREQUENCIES:
        raise ConfigError(f"unknown frequency {frequency!r}")
    layout = layout or ColumnLayout()
    frame = _read_frame(path)
    date_col = _date_column(frame, layout, path)
    columns = _maturity_columns(frame, layout, date_col, path)
    stamps = _parse_dates(frame, date_col)
    low, high = RATE_BAND

    rows: List[Tuple[Tuple[YearMonth, int], List[float]]] = []
    dropped = 0
    for index, stamp in enumerate(stamps):
        line = index + 2
        values = []
        for name, _ in columns:
            value = _parse_cell(frame.at[index, name], name, line)
            if not math.isnan(value) and not low <= value <= high:
                raise NonFiniteValue(name, line, str(frame.at[index, name]))
            values.append(value)
        if any(math.isnan(v) for v in values):
            dropped += 1
            continue
        rows.append((stamp, values))

    if frequency == "daily":
        _check_daily_order([stamp for stamp, _ in rows])
        last_of_month: Dict[int, Tuple[Tuple[YearMonth, int], List[float]]] = {}
        for stamp, values in rows:
            last_of_month[stamp[0].ordinal] = (stamp, values)
        rows = [last_of_month[k] for k in sorted(last_of_month)]

    if dropped:
        logger.warning("Dropped %d incomplete rows from %s", dropped, path)

    dates = tuple(stamp[0] for stamp, _ in rows)
    report = LoadReport(
        rows_read=len(frame),
        rows_dropped=dropped,
        first=dates[0] if dates else None,
        last=dates[-1] if dates else None,
    )
    values = np.array([v for _, v in rows], dtype=float).reshape(len(rows), len(columns))
    panel = RatePanel(dates, tuple(m for _, m in columns), values, report=report)
    logger.info(
        "Loaded rate panel %s: T=%d M=%d range %s..%s",
        path, panel.T, panel.M, report.first, report.last,
    )
    return panel


def load_vol(
    path: PathLike,
    frequency: str = "monthly",
    layout: Optional[ColumnLayout] = None,
) -> VolSeries:
    """Load a volatility series, averaging daily input by calendar month.

    Args:
        path: CSV with a date column and one volatility column.
        frequency: ``"monthly"`` passes values through; ``"daily"`` takes the
            arithmetic mean of each month's valid observations.
        layout: Optional column mapping.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        NonPositiveVol: If any observation is zero or negative.
        SparseMonth: If a month has fewer than 15 daily observations.
        NonMonotoneDates: If dates repeat, go backwards or leave a gap.
    """
    if frequency not in FREQUENCIES:
        raise ConfigError(f"unknown frequency {frequency!r}")
    layout = layout or ColumnLayout()
    frame = _read_frame(path)
    date_col = _date_column(frame, layout, path)
    value_col = _value_column(frame, layout, date_col, path)
    stamps = _parse_dates(frame, date_col)

    kept_stamps: List[Tuple[YearMonth, int]] = []
    kept_values: List[float] = []
    dropped = 0
    for index, stamp in enumerate(stamps):
        line = index + 2
        value = _parse_cell(frame.at[index, value_col], value_col, line)
        if math.isnan(value):
            dropped += 1
            continue
        if value <= 0.0:
            raise NonPositiveVol(line, value)
        kept_stamps.append(stamp)
        kept_values.append(value)

    if frequency == "daily":
        _check_daily_order(kept_stamps)
        daily = pd.DataFrame(
            {"month": [s[0].ordinal for s in kept_stamps], "value": kept_values}
        )
        grouped = daily.groupby("month", sort=True)["value"].agg(["mean", "count"])
        for ordinal, count in grouped["count"].items():
            if count < MIN_DAILY_POINTS:
                raise SparseMonth(
                    str(YearMonth.from_ordinal(int(ordinal))), int(count), MIN_DAILY_POINTS
                )
        dates = tuple(YearMonth.from_ordinal(int(k)) for k in grouped.index)
        values = grouped["mean"].to_numpy(dtype=float)
    else:
        dates = tuple(s[0] for s in kept_stamps)
        values = np.array(kept_values, dtype=float)

    report = LoadReport(
        rows_read=len(frame),
        rows_dropped=dropped,
        first=dates[0] if dates else None,
        last=dates[-1] if dates else None,
    )
    vol = VolSeries(dates, values, report=report)
    logger.info(
        "Loaded volatility %s (%s): %d months range %s..%s",
        path, frequency, len(vol), report.first, report.last,
    )
    return vol


def align(panel: RatePanel, vol: VolSeries) -> AlignedDataset:
    """Truncate both series to their common months.

    Raises:
        InsufficientOverlap: If fewer than 24 months are shared.
    """
    if panel.dates == vol.dates and panel.T >= MIN_OVERLAP:
        return AlignedDataset(panel, vol)
    if not panel.dates or not vol.dates:
        raise InsufficientOverlap("empty series cannot be aligned")
    first = max(panel.dates[0], vol.dates[0], key=lambda d: d.ordinal)
    last = min(panel.dates[-1], vol.dates[-1], key=lambda d: d.ordinal)
    overlap = last.ordinal - first.ordinal + 1
    if overlap < MIN_OVERLAP:
        raise InsufficientOverlap(
            f"series share {max(overlap, 0)} months, need {MIN_OVERLAP}"
        )
    dataset = AlignedDataset(panel.between(first, last), vol.between(first, last))
    logger.info("Aligned dataset on %s..%s (%d months)", first, last, overlap)
    return dataset


def _write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def write_rate_panel(panel: RatePanel, path: PathLike) -> Path:
    """Write a panel as CSV that ``load_rate_panel`` reads back unchanged."""
    frame = pd.DataFrame(panel.values, columns=[f"y{m}" for m in panel.maturities])
    frame.insert(0, "date", [str(d) for d in panel.dates])
    return _write_frame(frame, path)


def write_vol(vol: VolSeries, path: PathLike) -> Path:
    frame = pd.DataFrame({"date": [str(d) for d in vol.dates], "value": vol.values})
    return _write_frame(frame, path)
