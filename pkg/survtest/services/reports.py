"""Result documents: running a recorded configuration, replaying it and rendering text tables."""

import logging
from importlib import metadata

from survtest import __version__
from survtest.exceptions import HypothesisError
from survtest.models.design import ContrastMatrix, FactorialDesign
from survtest.models.results import MCTestResult, ResultDocument, RunConfig, TestResult
from survtest.models.sample import SurvivalSample
from survtest.services.bootstrap import single_test
from survtest.services.contrasts import parse_hypothesis, split_rows
from survtest.services.datasets import group_counts, load_dataset, read_contrast_file, resolve_data_path
from survtest.services.multiple import mctest

logger = logging.getLogger(__name__)


def version() -> str:
    try:
        return metadata.version("survtest")
    except metadata.PackageNotFoundError:
        return __version__


def _contrasts(config: RunConfig, design: FactorialDesign) -> list[ContrastMatrix]:
    contrasts = [parse_hypothesis(design, text) for text in config.hypotheses]
    if config.contrast_file:
        contrasts.append(read_contrast_file(config.contrast_file, design.k))
    if not contrasts:
        raise HypothesisError("give a hypothesis or a contrast file")
    return contrasts


def run_config(config: RunConfig, n_jobs: int | None = None) -> ResultDocument:
    """Load the data named in config and run its test; the document echoes config."""
    sample, design = load_dataset(
        resolve_data_path(config.data),
        time_col=config.time_col,
        status_col=config.status_col,
        factors=config.factors,
        group_col=config.group_col,
    )
    return run_on_sample(config, sample, design, n_jobs=n_jobs)


def run_on_sample(
    config: RunConfig, sample: SurvivalSample, design: FactorialDesign, n_jobs: int | None = None
) -> ResultDocument:
    contrasts = _contrasts(config, design)
    document = ResultDocument(version=version(), config=config, group_counts=group_counts(sample, design))
    if config.command == "test":
        if len(contrasts) != 1:
            raise HypothesisError(f"'test' takes exactly one hypothesis, got {len(contrasts)}; use 'mctest'")
        result = single_test(
            sample, contrasts[0], config.kernel, config.reps, config.alpha, config.seed, config.weight_law, n_jobs
        )
        return document.model_copy(update={"test": result})
    # every equation of every hypothesis becomes one local hypothesis
    local = [row for contrast in contrasts for row in split_rows(contrast)]
    result = mctest(sample, local, config.kernel, config.reps, config.alpha, config.seed, config.weight_law, n_jobs)
    return document.model_copy(update={"mctest": result})


def replay(document: ResultDocument, n_jobs: int | None = None) -> ResultDocument:
    """Re-run the recorded configuration of a document."""
    logger.info("replaying %s recorded by survtest %s", document.config.command, document.version)
    return run_config(document.config, n_jobs=n_jobs)


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(line[column]) for line in [header, *rows]) for column in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in [header, *rows]]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)


def _yes_no(flag: bool) -> str:
    return "yes" if flag else "no"


def render_text(result: TestResult | MCTestResult) -> str:
    """Aligned plain-text table of a test result."""
    if isinstance(result, TestResult):
        rows = [
            ["hypothesis", result.hypothesis],
            ["statistic", f"{result.statistic:.6g}"],
            ["critical value", f"{result.critical_value:.6g}"],
            ["p-value", f"{result.p_value:.4g}"],
            ["reject", _yes_no(result.reject)],
            ["null dimension", str(result.null_dim)],
            ["tau_H", "-" if result.tau_h is None else f"{result.tau_h:g}"],
        ]
        return _table(["", f"alpha={result.alpha:g}, M={result.reps}, seed={result.seed}"], rows)
    rows = [
        [
            local.hypothesis,
            f"{local.statistic:.6g}",
            f"{local.critical_value:.6g}",
            f"{local.p_value:.4g}",
            _yes_no(local.reject),
        ]
        for local in result.local_tests
    ]
    table = _table(["hypothesis", "statistic", "critical value", "p-value", "reject"], rows)
    footer = (
        f"beta_hat={result.beta_hat:.6g}  alpha={result.alpha:g}  M={result.reps}  seed={result.seed}  "
        f"global reject={_yes_no(result.reject)}"
    )
    return f"{table}\n{footer}"
