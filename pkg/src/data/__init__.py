"""Input loading and alignment."""

from .panel import (
    AlignedDataset,
    ColumnLayout,
    LoadReport,
    RatePanel,
    VolSeries,
    YearMonth,
    align,
    load_rate_panel,
    load_vol,
    write_rate_panel,
    write_vol,
)

__all__ = [
    "AlignedDataset",
    "ColumnLayout",
    "LoadReport",
    "RatePanel",
    "VolSeries",
    "YearMonth",
    "align",
    "load_rate_panel",
    "load_vol",
    "write_rate_panel",
    "write_vol",
]
