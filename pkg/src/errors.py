"""Exception hierarchy shared by every ratesvol module.

Each family carries the process exit code the CLI returns for it:
2 for bad input, 3 for estimation failures, 4 for stability failures.
"""

from typing import Optional


class RatesVolError(Exception):
    """Base class for all library errors."""

    exit_code: int = 1


# ── Input (exit 2) ────────────────────────────────────────────────────


class InputError(RatesVolError):
    """Malformed or inconsistent input data, flags or files."""

    exit_code = 2


class MissingColumn(InputError):
    def __init__(self, column: str, path: str = "") -> None:
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"required column {column!r} not found{where}")


class NonMonotoneDates(InputError):
    def __init__(self, message: str, row: Optional[int] = None) -> None:
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


class NonFiniteValue(InputError):
    def __init__(self, column: str, row: int, value: str) -> None:
        self.column = column
        self.row = row
        self.value = value
        super().__init__(f"column {column!r}, row {row}: unusable value {value!r}")


class NonPositiveVol(InputError):
    def __init__(self, row: int, value: float) -> None:
        self.row = row
        self.value = value
        super().__init__(f"row {row}: volatility must be positive, got {value!r}")


class SparseMonth(InputError):
    def __init__(self, month: str, count: int, minimum: int) -> None:
        self.month = month
        self.count = count
        super().__init__(
            f"month {month} has {count} daily observations, need {minimum}"
        )


class InsufficientOverlap(InputError):
    pass


class MisalignedSeries(InputError):
    pass


class MaturityOutOfRange(InputError):
    def __init__(self, maturity: int, low: int, high: int) -> None:
        self.maturity = maturity
        super().__init__(
            f"maturity {maturity} months outside supported range {low}..{high}"
        )


class IndexOutOfRange(InputError):
    pass


class InvalidRate(InputError):
    pass


class StepTooLarge(InputError):
    pass


class ConfigError(InputError):
    pass


class InvalidModel(InputError):
    """Model parameters or a model file violate the model invariants."""


# ── Estimation (exit 3) ───────────────────────────────────────────────


class EstimationError(RatesVolError):
    """A fit or statistical computation could not be carried out."""

    exit_code = 3


class RankDeficient(EstimationError):
    pass


class RankDeficientDesign(EstimationError):
    pass


class TooFewObservations(EstimationError):
    pass


class TooShort(EstimationError):
    pass


class DegenerateSeries(EstimationError):
    pass


class NoConvergence(EstimationError):
    pass


# ── Stability (exit 4) ────────────────────────────────────────────────


class StabilityError(RatesVolError):
    """The model violates the stationarity assumptions or diverges."""

    exit_code = 4


class Unstable(StabilityError):
    pass


class NonFiniteState(StabilityError):
    def __init__(self, step: int, message: str = "state left the finite range") -> None:
        self.step = step
        super().__init__(f"step {step}: {message}")


class UndefinedMoment(StabilityError):
    """A stationary moment the check needs is infinite for the innovation law."""
