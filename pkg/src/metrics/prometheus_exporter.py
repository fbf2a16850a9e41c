"""Prometheus metrics exporter.

Commands are short-lived, so metrics go to a textfile in the output
directory (for the node-exporter textfile collector) instead of an HTTP
endpoint.
"""

from pathlib import Path
from typing import TYPE_CHECKING, Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

if TYPE_CHECKING:
    from ..analysis.estimate import StabilityReport
    from ..analysis.pca import PcModel
    from ..data.panel import LoadReport
    from ..returns.premia import CapmResult
    from ..simulation.lln import LlnReport

REGISTRY = CollectorRegistry()
METRICS_FILE = "metrics.prom"

rows_loaded = Counter(
    "ratesvol_rows_loaded", "Input rows kept after cleaning", ["source"], registry=REGISTRY
)
rows_dropped = Counter(
    "ratesvol_rows_dropped", "Input rows dropped as missing", ["source"], registry=REGISTRY
)
variance_ratio = Gauge(
    "ratesvol_pca_variance_ratio",
    "Share of rate variance explained per component",
    ["component"],
    registry=REGISTRY,
)
spectral_radius = Gauge(
    "ratesvol_spectral_radius", "Spectral radius of the fitted B matrix", registry=REGISTRY
)
lln_abs_error = Gauge(
    "ratesvol_lln_abs_error",
    "Absolute error of a simulated time average against its oracle",
    ["quantity", "label"],
    registry=REGISTRY,
)
lln_passed = Gauge(
    "ratesvol_lln_passed", "1 when every component passed", ["quantity"], registry=REGISTRY
)
simulated_steps = Counter(
    "ratesvol_simulated_steps", "Simulated transitions", ["mode"], registry=REGISTRY
)
capm_slope = Gauge(
    "ratesvol_capm_slope", "No-intercept term premium slope", ["l", "l0"], registry=REGISTRY
)
command_duration = Histogram(
    "ratesvol_command_seconds", "Wall time per CLI command", ["command"], registry=REGISTRY
)


def record_load(source: str, report: "LoadReport") -> None:
    rows_loaded.labels(source=source).inc(report.rows_read - report.rows_dropped)
    rows_dropped.labels(source=source).inc(report.rows_dropped)


def record_pca(model: "PcModel") -> None:
    from ..analysis.pca import component_name

    for i, ratio in enumerate(model.variance_ratio):
        variance_ratio.labels(component=component_name(i)).set(float(ratio))


def record_stability(report: "StabilityReport") -> None:
    spectral_radius.set(report.spectral_radius_B)


def record_lln(report: "LlnReport") -> None:
    """Update LLN gauges and the simulated step counter."""
    for label, error in zip(report.labels, report.final_abs_error):
        lln_abs_error.labels(quantity=report.quantity, label=label).set(float(error))
    lln_passed.labels(quantity=report.quantity).set(1.0 if report.passed else 0.0)
    simulated_steps.labels(mode=report.mode).inc(report.steps * report.reps)


def record_capm(result: "CapmResult") -> None:
    capm_slope.labels(l=str(result.l), l0=str(result.l0)).set(result.slope)


def write_metrics(directory: Union[str, Path]) -> Path:
    """Write the registry to ``<directory>/metrics.prom``."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    target = path / METRICS_FILE
    write_to_textfile(str(target), REGISTRY)
    return target
