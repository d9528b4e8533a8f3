"""
Multi-seed experiment harness.

For every seed: generate a scenario, fit every candidate (λ1, λ2) once per
method, select per criterion, evaluate against the truth. Per-run artifacts
go under output_dir/<seed>/<method>/; the aggregate table has one row per
(method, criterion) with mean and population std over seeds.
"""

import logging
import math
from datetime import datetime
from pathlib import Path
from typing import List, NamedTuple, Sequence

import numpy as np
import pandas as pd

from . import storage
from .errors import InvalidInputError, TvisingError
from .metrics import best_f1_under_h, evaluate, localization_error
from .models import (
    Criterion,
    ExperimentConfig,
    FusedNorm,
    Method,
    ScenarioConfig,
    SearchSpec,
    SolverOptions,
    TraceEntry,
)
from .sampler import generate_scenario
from .selection import candidates, fit_candidates, pick_best, score

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["method", "criterion", "h_mean", "h_std", "f1_mean", "f1_std", "d_hat_mean", "d_hat_std"]
RUN_COLUMNS = ["seed", "method", "criterion", "lambda1", "lambda2", "h", "precision", "recall", "f1", "d_hat"]

# ── Run log ──────────────────────────────────────────────
RUN_LOG_LIMIT = 1000
run_log: list[dict] = []


def _log(entry: dict):
    """Append to the run log, keep the last RUN_LOG_LIMIT entries."""
    global run_log
    run_log.append({**entry, "timestamp": datetime.now().isoformat()})
    if len(run_log) > RUN_LOG_LIMIT:
        run_log = run_log[-RUN_LOG_LIMIT:]


class ExperimentResult(NamedTuple):
    results: pd.DataFrame
    runs: pd.DataFrame
    oracle: pd.DataFrame
    failures: int


def method_search(spec: SearchSpec, method: Method) -> SearchSpec:
    """The per-timestamp baseline pins λ1 to 0 and searches λ2 only."""
    if method != Method.per_timestamp:
        return spec
    return spec.model_copy(update={
        "lambda1_range": (0.0, 0.0),
        "grid_counts": (1, spec.grid_counts[1]),
    })


def aggregate(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean and population std of h, F1 and D̂ per (method, criterion)."""
    if runs.empty:
        return pd.DataFrame(columns=RESULT_COLUMNS)
    grouped = runs.groupby(["method", "criterion"], sort=False)
    table = grouped.agg(
        h_mean=("h", "mean"),
        h_std=("h", lambda s: float(np.std(s))),
        f1_mean=("f1", "mean"),
        f1_std=("f1", lambda s: float(np.std(s))),
        d_hat_mean=("d_hat", "mean"),
        d_hat_std=("d_hat", lambda s: float(np.std(s))),
    )
    return table.reset_index()[RESULT_COLUMNS]


def _select(fits, criterion: Criterion, scenario) -> tuple[List[TraceEntry], int]:
    trace = [
        TraceEntry(
            lambda1=fit.lambda1,
            lambda2=fit.lambda2,
            criterion=score(fit, criterion, scenario.train, scenario.holdout),
            num_change_points=len(fit.model.change_points),
        )
        for fit in fits
    ]
    return trace, pick_best(trace, criterion)


def _run_method(config: ExperimentConfig, scenario, seed: int, method: Method, out: Path):
    spec = method_search(config.search, method)
    fits = fit_candidates(scenario.train, candidates(spec), method.fused_norm, config.solver)
    reports = [evaluate(scenario.model, fit.model) for fit in fits]

    rows = []
    for criterion in config.criteria:
        trace, best = _select(fits, criterion, scenario)
        report = reports[best]
        storage.write_csv(out / f"trace_{criterion.value}.csv", storage.trace_frame(trace))
        storage.save_estimated(out / f"model_{criterion.value}.json", fits[best].model)
        storage.save_report(out / f"report_{criterion.value}.json", report)
        rows.append({
            "seed": seed,
            "method": method.value,
            "criterion": criterion.value,
            "lambda1": trace[best].lambda1,
            "lambda2": trace[best].lambda2,
            "h": report.h_score,
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
            "d_hat": report.num_detected,
        })

    oracle = [
        {"seed": seed, "method": method.value, "h_max": h_max, "best_f1": best_f1_under_h(reports, h_max)}
        for h_max in config.oracle_h_thresholds
    ]
    return rows, oracle


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    if Criterion.auc in config.criteria and config.scenario.holdout_per_timestamp == 0:
        raise InvalidInputError("AUC selection needs holdout_per_timestamp > 0")
    global run_log
    run_log = []
    root = Path(config.output_dir)

    rows: List[dict] = []
    oracle_rows: List[dict] = []
    failures = 0
    for seed in config.replicates:
        scenario = generate_scenario(config.scenario.model_copy(update={"seed": seed}))
        _log({"type": "scenario", "seed": seed, "change_points": list(scenario.model.change_points)})
        for method in config.methods:
            try:
                new_rows, new_oracle = _run_method(config, scenario, seed, method, root / str(seed) / method.value)
            except TvisingError as exc:
                failures += 1
                logger.error("seed %d, method %s failed: %s", seed, method.value, exc.detail)
                _log({"type": "run_failed", "seed": seed, "method": method.value, "error": exc.detail})
                continue
            rows.extend(new_rows)
            oracle_rows.extend(new_oracle)
            for row in new_rows:
                _log({"type": "run_done", **row})
            logger.info("seed %d, method %s done", seed, method.value)

    if failures:
        logger.warning("%d of %d runs failed", failures, len(config.replicates) * len(config.methods))

    runs = pd.DataFrame(rows, columns=RUN_COLUMNS)
    oracle = pd.DataFrame(oracle_rows, columns=["seed", "method", "h_max", "best_f1"])
    results = aggregate(runs)
    if write:
        storage.write_csv(root / "results.csv", results)
        storage.write_csv(root / "runs.csv", runs)
        if config.oracle_h_thresholds:
            storage.write_csv(root / "oracle.csv", oracle)
        storage.save_run_log(root / "run_log.jsonl", run_log)
    return ExperimentResult(results, runs, oracle, failures)


# ── Consistency sweep ────────────────────────────────────

def fraction_change_points(fractions: Sequence[float], n: int) -> List[int]:
    """T_j = floor(τ_j·n) + 1."""
    return [int(math.floor(t * n)) + 1 for t in fractions]


def localization_trend(
    fractions: Sequence[float],
    horizons: Sequence[int],
    seeds: Sequence[int],
    scenario: ScenarioConfig = ScenarioConfig(),
    spec: SearchSpec = SearchSpec(),
    fused_norm: FusedNorm = FusedNorm.group_l2,
    opts: SolverOptions = SolverOptions(),
    workers: int | None = None,
) -> dict[int, float]:
    """
    Median localization error over seeds for each horizon n, with the
    change-points at fixed fractions of n.
    """
    trend = {}
    for n in horizons:
        true_cp = fraction_change_points(fractions, n)
        errors = []
        for seed in seeds:
            config = scenario.model_copy(update={"n": n, "change_points": true_cp, "seed": seed})
            generated = generate_scenario(ScenarioConfig.model_validate(config.model_dump()))
            fits = fit_candidates(generated.train, candidates(spec), fused_norm, opts, workers=workers)
            _, best = _select(fits, spec.criterion, generated)
            errors.append(localization_error(true_cp, fits[best].model.change_points, n))
        trend[n] = float(np.median(errors))
        logger.info("n=%d: median localization error %.4f over %d seeds", n, trend[n], len(seeds))
    return trend
