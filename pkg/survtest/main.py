import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from survtest import __version__
from survtest.config import get_settings
from survtest.exceptions import DegenerateSampleError, HypothesisError, SchemaError, SurvTestError
from survtest.models.common import ErrorDocument
from survtest.models.results import MCTestResult, RunConfig, TestResult
from survtest.models.simulation import ScenarioConfig
from survtest.services.contrasts import null_space_basis, parse_hypothesis
from survtest.services.datasets import load_dataset, resolve_data_path, write_dataset
from survtest.services.engine import constrained_cumhaz, last_full_rank_time, nelson_aalen
from survtest.services.kernels import PRESET_LENGTH_SCALES, parse_kernel
from survtest.services.reports import render_text, run_config
from survtest.services.simulate import generate_dataset, power_study

logger = logging.getLogger("survtest")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SCHEMA = 2
EXIT_DEGENERATE = 3


# --- Argument parsing ---

def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _size_fields(text: str) -> dict:
    """'balanced:50' -> {'balanced': 50}; 'unbalanced:2' -> {'multiplier': 2.0}."""
    kind, _, value = text.partition(":")
    try:
        if kind == "balanced":
            return {"balanced": int(value)}
        if kind == "unbalanced":
            return {"multiplier": float(value)}
    except ValueError:
        pass
    raise SchemaError(f"cannot parse size '{text}'; use balanced:<n> or unbalanced:<multiplier>")


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="CSV file, or 'veteran' for the bundled dataset")
    parser.add_argument("--time-col", default="time")
    parser.add_argument("--status-col", default="status")
    parser.add_argument("--factors", type=_csv_list, default=[], help="comma-separated factor columns")
    parser.add_argument("--group-col", default=None, help="precomputed group column (one-way design)")


def _add_test_flags(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    _add_data_flags(parser)
    parser.add_argument("--hypothesis", action="append", default=[], help="e.g. main-effect:celltype, interaction")
    parser.add_argument("--contrast-file", default=None, help="CSV contrast matrix, one row per equation")
    parser.add_argument("--kernel", default="K3", help="K1..K5 or e.g. se:10,rq:2:1")
    parser.add_argument("--rescale-times", choices=["on", "off"], default="on")
    parser.add_argument("--reps", type=int, default=settings.reps, help="bootstrap replicates M")
    parser.add_argument("--alpha", type=float, default=settings.alpha)
    parser.add_argument("--seed", type=int, default=settings.seed)
    parser.add_argument("--weights", choices=["rademacher", "normal"], default=settings.weight_law)
    parser.add_argument("--out", default=None, help="write the JSON result document here")
    parser.add_argument("--format", choices=["json", "text", "csv"], default="text")
    parser.add_argument("--n-jobs", type=int, default=settings.n_jobs)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="survtest", description="Kernel log-rank tests for factorial survival designs")
    parser.add_argument("--version", action="version", version=f"survtest {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    _add_test_flags(commands.add_parser("test", help="test one hypothesis CΛ = 0"))
    _add_test_flags(commands.add_parser("mctest", help="multiple contrast test over the rows of each hypothesis"))

    simulate = commands.add_parser("simulate", help="draw one dataset from a simulation scenario")
    simulate.add_argument("--design", choices=["A", "B", "C"], required=True)
    simulate.add_argument("--theta", type=float, default=0.0)
    simulate.add_argument("--censoring", choices=["low", "medium", "high"], default="low")
    simulate.add_argument("--sizes", default="balanced:50")
    simulate.add_argument("--seed", type=int, default=settings.seed)
    simulate.add_argument("--out", default="simulated.csv")
    simulate.add_argument("--format", choices=["json", "text", "csv"], default="text")

    power = commands.add_parser("power", help="Monte Carlo rejection rates over a grid of scenarios")
    power.add_argument("--design", choices=["A", "B", "C"], required=True)
    power.add_argument("--hypothesis", default=None, help="default: main-effect:I for A/B, interaction for C")
    power.add_argument("--grid", type=_csv_list, default=["balanced:50"], help="comma-separated sizes")
    power.add_argument("--censoring", type=_csv_list, default=["low"])
    power.add_argument("--theta", type=_csv_list, default=["0"])
    power.add_argument("--reps", type=int, default=1000, help="Monte Carlo replications per grid cell")
    power.add_argument("--boot", type=int, default=settings.reps, help="bootstrap replicates M per test")
    power.add_argument("--kernel", action="append", default=[], help="repeatable; default K1..K5")
    power.add_argument("--multiple", action="store_true", help="add the multiple contrast column M")
    power.add_argument("--alpha", type=float, default=settings.alpha)
    power.add_argument("--seed", type=int, default=settings.seed)
    power.add_argument("--weights", choices=["rademacher", "normal"], default=settings.weight_law)
    power.add_argument("--out", default="power.csv")
    power.add_argument("--format", choices=["json", "text", "csv"], default="text")
    power.add_argument("--n-jobs", type=int, default=settings.n_jobs)

    curves = commands.add_parser("curves", help="per-group Nelson–Aalen curves as CSV")
    _add_data_flags(curves)
    curves.add_argument("--hypothesis", default=None, help="also emit the constrained estimate and tau_H")
    curves.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    curves.add_argument("--format", choices=["json", "text", "csv"], default="csv")
    return parser


# --- Commands ---

def _result_rows(result: TestResult | MCTestResult) -> pd.DataFrame:
    entries = [result] if isinstance(result, TestResult) else result.local_tests
    return pd.DataFrame(
        [
            {
                "hypothesis": local.hypothesis,
                "statistic": local.statistic,
                "critical_value": local.critical_value,
                "p_value": local.p_value,
                "reject": local.reject,
            }
            for local in entries
        ]
    )


def _run_test(args: argparse.Namespace) -> int:
    config = RunConfig(
        command=args.command,
        data=args.data,
        time_col=args.time_col,
        status_col=args.status_col,
        factors=args.factors,
        group_col=args.group_col,
        hypotheses=args.hypothesis,
        contrast_file=args.contrast_file,
        kernel=parse_kernel(args.kernel, rescale_times=args.rescale_times == "on"),
        reps=args.reps,
        alpha=args.alpha,
        seed=args.seed,
        weight_law=args.weights,
    )
    document = run_config(config, n_jobs=args.n_jobs)
    if args.out:
        Path(args.out).write_text(document.model_dump_json(indent=2))
        logger.info("result document written to %s", args.out)
    result = document.test if document.test is not None else document.mctest
    if args.format == "json":
        print(document.model_dump_json(indent=2))
    elif args.format == "csv":
        print(_result_rows(result).to_csv(index=False), end="")
    else:
        print(render_text(result))
    return EXIT_OK


def _run_simulate(args: argparse.Namespace) -> int:
    config = ScenarioConfig(
        design=args.design, theta=args.theta, censoring=args.censoring, seed=args.seed, **_size_fields(args.sizes)
    )
    design = config.factorial_design()
    sample = generate_dataset(config, np.random.default_rng(config.seed))
    write_dataset(sample, design, args.out)
    logger.info(
        "wrote %d observations (%.1f%% censored) to %s", sample.n, 100.0 * (1 - sample.n_events / sample.n), args.out
    )
    events = np.bincount(sample.groups[sample.status == 1] - 1, minlength=sample.k)
    summary = pd.DataFrame(
        {
            "group": [design.group_label(group) for group in range(1, design.k + 1)],
            "n": sample.group_counts(),
            "events": events,
            "censored_fraction": 1.0 - events / np.maximum(sample.group_counts(), 1),
        }
    )
    if args.format == "text":
        print(summary.to_string(index=False))
    elif args.format == "json":
        print(summary.to_json(orient="records", indent=2))
    else:
        print(summary.to_csv(index=False), end="")
    return EXIT_OK


def _run_power(args: argparse.Namespace) -> int:
    try:
        thetas = [float(theta) for theta in args.theta]
    except ValueError as e:
        raise SchemaError(f"cannot parse --theta: {e}") from e
    hypothesis = args.hypothesis or ("interaction" if args.design == "C" else "main-effect:I")
    grid = [
        ScenarioConfig(
            design=args.design,
            theta=theta,
            censoring=censoring,
            replications=args.reps,
            seed=args.seed,
            **_size_fields(size),
        )
        for size in args.grid
        for censoring in args.censoring
        for theta in thetas
    ]
    kernels = [parse_kernel(text) for text in (args.kernel or list(PRESET_LENGTH_SCALES))]
    rows = power_study(
        grid,
        hypothesis,
        kernels,
        reps=args.boot,
        alpha=args.alpha,
        seed=args.seed,
        include_multiple=args.multiple,
        weight_law=args.weights,
        n_jobs=args.n_jobs,
    )
    table = pd.DataFrame([row.model_dump() for row in rows])
    table.to_csv(args.out, index=False)
    logger.info("power table with %d rows written to %s", len(table), args.out)
    if args.format == "text":
        print(table.to_string(index=False))
    elif args.format == "json":
        print(table.to_json(orient="records", indent=2))
    return EXIT_OK


def _run_curves(args: argparse.Namespace) -> int:
    sample, design = load_dataset(
        resolve_data_path(args.data),
        time_col=args.time_col,
        status_col=args.status_col,
        factors=args.factors,
        group_col=args.group_col,
    )
    labels = [design.group_label(group) for group in range(1, design.k + 1)]
    estimate = nelson_aalen(sample)
    table = pd.DataFrame(estimate.values, columns=[f"na_{label}" for label in labels])
    table.insert(0, "time", estimate.times)
    if args.hypothesis:
        basis = null_space_basis(parse_hypothesis(design, args.hypothesis))
        constrained = constrained_cumhaz(sample, basis)
        for column, label in enumerate(labels):
            table[f"constrained_{label}"] = constrained.values[:, column]
        tau_h = last_full_rank_time(sample, basis)
        logger.info("tau_H = %s", "undefined" if tau_h is None else f"{tau_h:g}")
    if args.out:
        table.to_csv(args.out, index=False)
        logger.info("curves written to %s", args.out)
    else:
        print(table.to_csv(index=False), end="")
    return EXIT_OK


COMMANDS = {
    "test": _run_test,
    "mctest": _run_test,
    "simulate": _run_simulate,
    "power": _run_power,
    "curves": _run_curves,
}


# --- Error handling ---

def _handle_cli_error(e: Exception) -> tuple[int, ErrorDocument]:
    """Map exceptions to an exit code and an error document."""
    if isinstance(e, SchemaError):
        return EXIT_SCHEMA, ErrorDocument(error_code="schema_error", message=str(e))
    if isinstance(e, DegenerateSampleError):
        return EXIT_DEGENERATE, ErrorDocument(error_code="degenerate_data", message=str(e))
    if isinstance(e, HypothesisError):
        return EXIT_ERROR, ErrorDocument(error_code="hypothesis_error", message=str(e))
    if isinstance(e, SurvTestError):
        return EXIT_ERROR, ErrorDocument(error_code="survtest_error", message=str(e))
    return EXIT_ERROR, ErrorDocument(error_code="invalid_argument", message=str(e))


def run(argv: list[str] | None = None) -> int:
    settings = get_settings()
    logging.basicConfig(level=settings.log_level.upper(), format="[%(name)s] %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SurvTestError, ValueError) as e:
        code, error = _handle_cli_error(e)
        if args.format == "json":
            print(error.model_dump_json(indent=2))
        logger.error("%s: %s", error.error_code, error.message)
        return code


if __name__ == "__main__":
    sys.exit(run())
