"""Pipeline commands behind the CLI.

Each ``cmd_*`` validates its configuration, computes every output in
memory, stages it in an :class:`OutputBundle` and commits at the very end,
so errors leave the output directory untouched.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..analysis.diagnose import (
    DiagnosticsTable,
    acf,
    adf_test,
    diagnostics_table,
    ljung_box,
    qq_data,
    scalar_ar_residuals,
    vol_diagnostics,
)
from ..analysis.estimate import (
    ArSvModel,
    check_continuous,
    check_stability,
    coefficient_table,
    fit_arsv,
    fit_scalar_ar,
    model_residuals,
    to_continuous,
)
from ..analysis.pca import component_name, fit_pca, interpolate_loadings
from ..data.panel import AlignedDataset, ColumnLayout, RatePanel, align, load_rate_panel, load_vol
from ..errors import ConfigError, UndefinedMoment, Unstable
from ..metrics import prometheus_exporter as metrics
from ..returns.bonds import gamma_matrix, return_series, returns_lln
from ..returns.premia import capm_slope, term_premium
from ..simulation.lln import simulate_path, verify_lln, verify_vol_moments
from .config import RunConfig
from .model_store import ModelDocument, load_model_document, project_panel
from .reports import OutputBundle

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _header(command: str) -> Dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "command": command}


def _layout(config: RunConfig, source: str) -> ColumnLayout:
    return ColumnLayout.from_dict(config.data.layout.get(source))


def _load_panel(config: RunConfig) -> RatePanel:
    if not config.data.rates:
        raise ConfigError("a rate panel is required (--rates or data.rates)")
    panel = load_rate_panel(
        config.data.rates, _layout(config, "rates"), config.data.rates_frequency
    )
    if panel.report is not None:
        metrics.record_load("rates", panel.report)
    return panel


def _load_dataset(config: RunConfig) -> AlignedDataset:
    panel = _load_panel(config)
    if not config.data.vix:
        raise ConfigError("a volatility series is required (--vix or data.vix)")
    vol = load_vol(config.data.vix, config.data.vix_frequency, _layout(config, "vix"))
    if vol.report is not None:
        metrics.record_load("vix", vol.report)
    return align(panel, vol)


def _model_for_mode(model: ArSvModel, mode: str) -> ArSvModel:
    if model.dynamics == mode:
        return model
    if mode == "continuous":
        return to_continuous(model)
    raise ConfigError("a continuous-time model cannot be simulated in discrete mode")


def _is_stable(model: ArSvModel) -> bool:
    if model.dynamics == "discrete":
        return check_stability(model).stationary_ok
    return check_continuous(model).ok


def _load_model(config: RunConfig) -> Tuple[ModelDocument, ArSvModel]:
    # Only a run that names both inputs can be compared with the fit's hash.
    data_hash = config.data_hash() if config.data.rates and config.data.vix else ""
    document = load_model_document(config.model_path, data_hash)
    sim = config.simulation
    model = document.to_model(
        innovation=sim.innovation,
        innovation_df=sim.innovation_df if sim.innovation == "student_t" else 0.0,
    )
    return document, model


def _steps(config: RunConfig) -> int:
    sim = config.simulation
    if sim.mode == "continuous" and sim.horizon is not None:
        steps = int(round(sim.horizon / sim.h))
        if steps < 1:
            raise ConfigError("simulation.horizon is shorter than one step")
        return steps
    return sim.steps


def _component_frame(names: List[str], first: List[Any], values: np.ndarray, label: str) -> pd.DataFrame:
    frame = pd.DataFrame(np.atleast_2d(values), columns=names)
    frame.insert(0, label, first)
    return frame


# ── fit ───────────────────────────────────────────────────────────────


def cmd_fit(config: RunConfig) -> List[Path]:
    """Fit PCA and the AR-SV model; write the model file and fit report."""
    config.validate("fit")
    dataset = _load_dataset(config)
    if config.model.d > dataset.panel.M:
        raise ConfigError(f"d={config.model.d} exceeds the {dataset.panel.M} panel maturities")
    pca = fit_pca(dataset.panel, config.model.d)
    metrics.record_pca(pca)
    model = fit_arsv(
        pca.scores,
        dataset.vol,
        vix_scaled=config.model.vix_scaled,
        diagonal_b=config.model.diagonal_b,
        diagonal_sigma=config.model.diagonal_sigma,
        vol_feedback=config.model.vol_feedback,
    )
    stability = check_stability(model)
    metrics.record_stability(stability)
    continuous = check_continuous(to_continuous(model))
    if not stability.stationary_ok:
        logger.warning(
            "Fitted model is not stationary (spectral radius %.4f, beta %.4f)",
            stability.spectral_radius_B, model.beta,
        )

    document = ModelDocument.from_model(model, pca, config.data_hash())
    names = [component_name(i) for i in range(model.d)]
    first, last = dataset.range
    assert model.estimation is not None
    report: Dict[str, Any] = {
        **_header("fit"),
        "range": [str(first), str(last)],
        "observations": len(dataset.dates),
        "load": {
            "rates": dataset.panel.report.to_dict() if dataset.panel.report else None,
            "vix": dataset.vol.report.to_dict() if dataset.vol.report else None,
        },
        "pca": pca.to_dict(),
        "vix_ar": {
            "alpha": model.alpha,
            "beta": model.beta,
            "sigma0": model.sigma0,
        },
        "vix_scaled": sorted(model.vix_scaled),
        "coefficients": coefficient_table(model),
        "r_squared": {
            "lnV": model.estimation.vol_fit.r_squared,
            **{name: fit.r_squared for name, fit in zip(names, model.estimation.row_fits)},
        },
        "residual_cov": model.covariance,
        "stability": stability.to_dict(),
        "continuous_stability": {
            "min_real_part": continuous.min_real_part,
            "beta_positive": continuous.beta_positive,
            "ok": continuous.ok,
        },
    }

    bundle = OutputBundle(config.output.dir)
    bundle.add_json(Path(config.model_path).resolve(), document.to_dict())
    bundle.add_json("fit_report.json", report)
    bundle.add_frame(
        "scores.csv", _component_frame(names, [str(d) for d in pca.dates], pca.scores, "date")
    )
    bundle.add_frame(
        "loadings.csv",
        _component_frame(names, list(pca.maturities), pca.loadings.T, "maturity"),
    )
    return bundle.commit()


# ── diagnose ──────────────────────────────────────────────────────────


def _select(table: DiagnosticsTable, index: List[int]) -> DiagnosticsTable:
    return DiagnosticsTable(
        components=tuple(table.components[i] for i in index),
        skew_z=table.skew_z[index],
        skew_zv=table.skew_zv[index],
        kurt_z=table.kurt_z[index],
        kurt_zv=table.kurt_zv[index],
    )


def cmd_diagnose(config: RunConfig) -> List[Path]:
    """Moment table, unit-root and portmanteau tests, ACF and QQ data."""
    config.validate("diagnose")
    document, model = _load_model(config)
    dataset = _load_dataset(config)
    pca = project_panel(document, dataset.panel)
    scores = pca.scores
    levels = dataset.vol.values

    if config.diagnose.component is not None:
        if config.diagnose.component > model.d:
            raise ConfigError(f"component {config.diagnose.component} outside 1..{model.d}")
        selected = [config.diagnose.component - 1]
    else:
        selected = list(range(model.d))

    residuals = model_residuals(model, scores, levels)
    scalar = scalar_ar_residuals(scores)
    v_now = levels[1:]
    scalar_table = _select(diagnostics_table(model, scalar, v_now), selected)
    model_table = _select(diagnostics_table(model, residuals, v_now), selected)
    vol_diag = vol_diagnostics(dataset.vol, config.diagnose.ljung_box_lags)

    lags = config.diagnose.ljung_box_lags
    bundle = OutputBundle(config.output.dir)
    components: Dict[str, Any] = {}
    for i in selected:
        name = component_name(i)
        z = scalar[:, i]
        zv = z / v_now
        max_lag = min(config.diagnose.max_lag, len(z) - 2)
        ar = fit_scalar_ar(scores[:, i])
        components[name] = {
            "scalar_ar": {"a": ar.a, "b": ar.b, "sigma": ar.fit.sigma},
            "adf_score": adf_test(scores[:, i]).to_dict(),
            "ljung_box_Z": ljung_box(z, lags).to_dict(),
            "ljung_box_Z_over_V": ljung_box(zv, lags).to_dict(),
            "ljung_box_model_residual": ljung_box(residuals[:, i], lags).to_dict(),
        }
        acf_z, acf_zv = acf(z, max_lag), acf(zv, max_lag)
        bundle.add_frame(
            f"acf_{name}.csv",
            pd.DataFrame(
                {
                    "lag": np.arange(max_lag + 1),
                    "z": acf_z.values,
                    "z_over_v": acf_zv.values,
                    "band": acf_z.band,
                }
            ),
        )
        qq_z, qq_zv = qq_data(z), qq_data(zv)
        bundle.add_frame(
            f"qq_{name}.csv",
            pd.DataFrame({"theoretical": qq_z[:, 0], "z": qq_z[:, 1], "z_over_v": qq_zv[:, 1]}),
        )

    w = vol_diag.log_ar.fit.residuals
    vix_lag = min(config.diagnose.max_lag, len(w) - 2)
    bundle.add_frame(
        "acf_vix.csv",
        pd.DataFrame(
            {
                "lag": np.arange(vix_lag + 1),
                "w": acf(w, vix_lag).values,
                "abs_w": acf(np.abs(w), vix_lag).values,
            }
        ),
    )
    qq_w = qq_data(w)
    bundle.add_frame("qq_vix.csv", pd.DataFrame({"theoretical": qq_w[:, 0], "w": qq_w[:, 1]}))

    report = {
        **_header("diagnose"),
        "range": [str(d) for d in dataset.range],
        "moments_table": scalar_table.to_dict(),
        "model_residuals_table": model_table.to_dict(),
        "vix": vol_diag.to_dict(),
        "components": components,
    }
    bundle.add_json("diagnostics.json", report)
    bundle.add_text(
        "moments_table.txt",
        "Scalar AR innovations\n"
        + scalar_table.format_text()
        + "\nAR-SV model innovations\n"
        + model_table.format_text(),
    )
    return bundle.commit()


# ── simulate ──────────────────────────────────────────────────────────


def cmd_simulate(config: RunConfig) -> List[Path]:
    """Simulate paths and check long-run averages against closed forms."""
    config.validate("simulate")
    sim = config.simulation
    assert sim.seed is not None
    _, model = _load_model(config)
    model = _model_for_mode(model, sim.mode)
    steps = _steps(config)
    h = sim.h if sim.mode == "continuous" else None

    report: Dict[str, Any] = {
        **_header("simulate"),
        "mode": sim.mode,
        "steps": steps,
        "reps": sim.reps,
        "seed": sim.seed,
        "h": h,
        "innovation": model.innovation,
    }
    bundle = OutputBundle(config.output.dir)
    if _is_stable(model):
        try:
            lln = verify_lln(model, sim.mode, steps, sim.reps, sim.seed, h=h, threads=config.threads)
        except UndefinedMoment as exc:
            logger.warning("Skipping the LLN check of X: %s", exc)
            report["lln"] = {"skipped": str(exc)}
        else:
            metrics.record_lln(lln)
            report["lln"] = lln.to_dict()
            if not lln.passed:
                logger.warning("Time averages missed the stationary mean beyond 4 standard errors")
            if lln.square_norm_passed is False:
                logger.warning("Time average of |X|^2 missed its stationary value")
            running = pd.DataFrame(lln.running_mean, columns=list(lln.labels))
            running.insert(0, "steps", lln.checkpoints)
            bundle.add_frame("lln_running.csv", running)
        try:
            moments = verify_vol_moments(
                model, sim.mode, steps, sim.reps, sim.seed, h=h, threads=config.threads
            )
        except UndefinedMoment as exc:
            logger.warning("Skipping the volatility moment check: %s", exc)
        else:
            metrics.record_lln(moments)
            report["vol_moments"] = moments.to_dict()
    elif sim.allow_unstable:
        logger.warning("Model is not mean reverting; writing paths without LLN checks")
        report["lln"] = None
    else:
        raise Unstable(f"model is not mean reverting in {sim.mode} mode (use --allow-unstable)")

    path = simulate_path(model, sim.mode, min(steps, sim.export_rows), sim.seed, 0, h)
    bundle.add_frame("path.csv", path.to_frame())
    bundle.add_json("lln.json", report)
    return bundle.commit()


# ── returns ───────────────────────────────────────────────────────────


def cmd_returns(config: RunConfig) -> List[Path]:
    """Historical returns, term premia, CAPM slopes and the returns LLN."""
    config.validate("returns")
    sim = config.simulation
    assert sim.seed is not None
    rcfg = config.returns
    document, model = _load_model(config)
    panel = _load_panel(config)
    pca = project_panel(document, panel)
    curve = interpolate_loadings(pca)
    gamma = gamma_matrix(curve)
    wanted = sorted(set(rcfg.maturities) | {rcfg.benchmark, rcfg.short})
    for l in wanted:
        gamma.check_maturity(l)

    series = {l: return_series(panel, curve, gamma, pca.scores, l) for l in wanted}
    short = series[rcfg.short].exact
    premia = {l: term_premium(series[l].exact, short) for l in wanted}
    capm = [
        capm_slope(premia[l], premia[rcfg.benchmark], l, rcfg.benchmark, rcfg.short)
        for l in rcfg.maturities
    ]
    for result in capm:
        metrics.record_capm(result)

    sim_model = _model_for_mode(model, sim.mode)
    h = sim.h if sim.mode == "continuous" else None
    lln_reports: Optional[List[Dict[str, Any]]] = None
    if _is_stable(sim_model):
        lln_reports = []
        for l in rcfg.maturities:
            try:
                lln = returns_lln(
                    sim_model, gamma, l, _steps(config), sim.reps, sim.seed,
                    mode=sim.mode, h=h, threads=config.threads,
                )
            except UndefinedMoment as exc:
                logger.warning("Skipping the returns LLN check: %s", exc)
                lln_reports = None
                break
            metrics.record_lln(lln)
            lln_reports.append(lln.to_dict())
    elif sim.allow_unstable:
        logger.warning("Model is not mean reverting; skipping the returns LLN check")
    else:
        raise Unstable(f"model is not mean reverting in {sim.mode} mode (use --allow-unstable)")

    bundle = OutputBundle(config.output.dir)
    for l in wanted:
        item = series[l]
        bundle.add_frame(
            f"returns_l{l}.csv",
            pd.DataFrame(
                {
                    "date": [str(d) for d in item.dates],
                    "exact": item.exact,
                    "approx": item.approx,
                    "term_premium": premia[l],
                }
            ),
        )
    summary = {
        l: {
            "mean_exact": float(series[l].exact.mean()),
            "mean_approx": float(series[l].approx.mean()),
            "corr": float(np.corrcoef(series[l].exact, series[l].approx)[0, 1])
            if np.ptp(series[l].exact) > 0 and np.ptp(series[l].approx) > 0
            else None,
            "mean_abs_gap": float(np.abs(series[l].gap).mean()),
            "mean_term_premium": float(premia[l].mean()),
        }
        for l in wanted
    }
    bundle.add_json(
        "capm.json",
        {
            **_header("returns"),
            "benchmark": rcfg.benchmark,
            "short": rcfg.short,
            "results": [result.to_dict() for result in capm],
        },
    )
    bundle.add_json(
        "returns.json",
        {
            **_header("returns"),
            "range": [str(panel.dates[1]), str(panel.dates[-1])],
            "series": {str(l): values for l, values in summary.items()},
            "lln": lln_reports,
        },
    )
    return bundle.commit()


COMMANDS = {
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
    "returns": cmd_returns,
}


def run_command(name: str, config: RunConfig) -> List[Path]:
    try:
        command = COMMANDS[name]
    except KeyError:
        raise ConfigError(f"unknown command {name!r}") from None
    with metrics.command_duration.labels(command=name).time():
        written = command(config)
    written.append(metrics.write_metrics(config.output.dir))
    return written
