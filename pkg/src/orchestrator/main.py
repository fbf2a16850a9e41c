"""Command-line entry point for the ratesvol pipeline."""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from ..analysis.estimate import INNOVATION_LAWS
from ..errors import RatesVolError
from .commands import run_command
from .config import FREQUENCIES, LOG_LEVELS, MODES, RunConfig, merge_overrides, read_config_file

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratesvol",
        description="Treasury rate factors with VIX stochastic volatility",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration (flags override it)")
    common.add_argument("--output", help="Output directory (default: outputs)")
    common.add_argument("--model", help="Model file (default: <output>/model.json)")
    common.add_argument("--log-level", choices=LOG_LEVELS, help="Logging level (default: INFO)")
    common.add_argument("--threads", type=int, help="Worker threads for replications")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--rates", help="Zero-coupon rate panel CSV (percent)")
    data.add_argument("--vix", help="Volatility index CSV")
    data.add_argument("--rates-frequency", choices=FREQUENCIES, help="Rate panel sampling")
    data.add_argument("--vix-frequency", choices=FREQUENCIES, help="Volatility sampling")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--seed", type=int, help="Run seed (required)")
    sim.add_argument("--steps", type=int, help="Steps per replication (default: 1000000)")
    sim.add_argument("--reps", type=int, help="Independent replications (default: 8)")
    sim.add_argument("--mode", choices=MODES, help="Model dynamics (default: discrete)")
    sim.add_argument("--h", type=float, help="Continuous-time step in months (default: 1/12)")
    sim.add_argument("--horizon", type=float, help="Continuous-time horizon in months")
    sim.add_argument(
        "--innovation", choices=INNOVATION_LAWS, help="Innovation law (default: gaussian)"
    )
    sim.add_argument("--innovation-df", type=float, help="Student-t degrees of freedom")
    sim.add_argument(
        "--allow-unstable",
        action="store_true",
        default=None,
        help="Emit outputs for non-stationary models, skipping LLN checks",
    )

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    fit = sub.add_parser("fit", parents=[common, data], help="Fit PCA and the AR-SV model")
    fit.add_argument("--d", type=int, help="Number of principal components (default: 3)")
    fit.add_argument(
        "--vix-scaled", type=_int_list, help="Components with VIX-scaled noise, e.g. 2 or 1,2"
    )
    fit.add_argument("--diagonal-b", action="store_true", default=None, help="Diagonal B")
    fit.add_argument(
        "--diagonal-sigma", action="store_true", default=None, help="Diagonal residual covariance"
    )
    fit.add_argument(
        "--no-vol-feedback",
        dest="vol_feedback",
        action="store_false",
        default=None,
        help="Leave the c·V(t) term out of every row",
    )

    diagnose = sub.add_parser(
        "diagnose", parents=[common, data], help="Residual moments, tests, ACF and QQ data"
    )
    diagnose.add_argument("--component", type=int, help="Restrict outputs to one component (1-based)")
    diagnose.add_argument("--max-lag", type=int, help="ACF lags to export (default: 24)")
    diagnose.add_argument("--lb-lags", type=int, help="Ljung-Box lags (default: 10)")

    simulate = sub.add_parser(
        "simulate", parents=[common, sim], help="Simulate paths and verify time averages"
    )
    simulate.add_argument("--export-rows", type=int, help="Steps in the exported path (default: 10000)")

    returns = sub.add_parser(
        "returns", parents=[common, data, sim], help="Bond returns, term premia and CAPM slopes"
    )
    returns.add_argument("--l", type=_int_list, help="Maturities in months, e.g. 60,120")
    returns.add_argument("--benchmark", type=int, help="CAPM benchmark maturity (default: 120)")
    returns.add_argument("--short", type=int, help="Short-rate maturity (default: 1)")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    def get(name: str) -> Any:
        return getattr(args, name, None)

    return {
        "data": {
            "rates": get("rates"),
            "vix": get("vix"),
            "rates_frequency": get("rates_frequency"),
            "vix_frequency": get("vix_frequency"),
        },
        "model": {
            "d": get("d"),
            "vix_scaled": get("vix_scaled"),
            "diagonal_b": get("diagonal_b"),
            "diagonal_sigma": get("diagonal_sigma"),
            "vol_feedback": get("vol_feedback"),
        },
        "simulation": {
            "mode": get("mode"),
            "steps": get("steps"),
            "horizon": get("horizon"),
            "h": get("h"),
            "reps": get("reps"),
            "seed": get("seed"),
            "innovation": get("innovation"),
            "innovation_df": get("innovation_df"),
            "allow_unstable": get("allow_unstable"),
            "export_rows": get("export_rows"),
        },
        "returns": {
            "maturities": get("l"),
            "benchmark": get("benchmark"),
            "short": get("short"),
        },
        "diagnose": {
            "component": get("component"),
            "max_lag": get("max_lag"),
            "ljung_box_lags": get("lb_lags"),
        },
        "output": {"dir": get("output"), "model": get("model")},
        "log_level": get("log_level"),
        "threads": get("threads"),
    }


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """File values under command-line flags, then defaults."""
    data = read_config_file(args.config) if args.config else {}
    return RunConfig.from_dict(merge_overrides(data, _overrides(args)))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, stream=sys.stderr, force=True)
    try:
        config = config_from_args(args)
        logging.getLogger().setLevel(config.log_level)
        written = run_command(args.command, config)
    except RatesVolError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: FileNotFoundError: {exc}", file=sys.stderr)
        return 2
    logger.info("%s finished: %d files written", args.command, len(written))
    return 0


if __name__ == "__main__":
    sys.exit(main())
