"""
File formats for every object tvising reads or writes.

JSON for models, datasets and reports, CSV (through pandas) for tabular
output, YAML or JSON for config files. Node indices in files are 1-based.
Any failure to read, parse, or write is raised as DataIOError; content that
parses but does not validate is raised as InvalidInputError.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Type, TypeVar

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ValidationError

from .errors import DataIOError, InvalidInputError
from .models import (
    EstimatedModel,
    EvaluationReport,
    ModelDiagnostics,
    NodeSolution,
    PiecewiseIsingModel,
    SearchResult,
    SpinDataset,
    TraceEntry,
    WeightMatrix,
)

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT", bound=BaseModel)

SIGN_FILTERS = ("all", "positive", "negative")


# ── Raw I/O ──────────────────────────────────────────────

def write_json(path, payload: Any) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")
    except (OSError, ValueError) as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    logger.debug("wrote %s", path)
    return path


def read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataIOError(f"{path} is not valid JSON: {exc}") from exc


def write_csv(path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def read_csv(path, **kwargs) -> pd.DataFrame:
    path = Path(path)
    try:
        return pd.read_csv(path, **kwargs)
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataIOError(f"{path} is not valid CSV: {exc}") from exc


def _validated(cls: Type[ConfigT], payload: Any, source) -> ConfigT:
    try:
        return cls.model_validate(payload)
    except ValidationError as exc:
        raise InvalidInputError(f"{source}: {exc}") from exc


def load_config(path, cls: Type[ConfigT]) -> ConfigT:
    """Read a YAML (.yaml/.yml) or JSON config file into a typed config."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            payload = yaml.safe_load(text)
        else:
            payload = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise DataIOError(f"cannot parse {path}: {exc}") from exc
    return _validated(cls, payload or {}, path)


# ── Ising models ─────────────────────────────────────────

def weights_to_dict(w: WeightMatrix) -> dict:
    return {"p": w.p, "edges": [[a, b, weight] for a, b, weight in w.edges()]}


def weights_from_dict(payload: dict) -> WeightMatrix:
    try:
        return WeightMatrix.from_edges(int(payload["p"]), payload.get("edges", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad weight matrix: {exc}") from exc


def save_piecewise(path, model: PiecewiseIsingModel) -> Path:
    return write_json(path, {
        "n": model.n,
        "change_points": list(model.change_points),
        "segments": [weights_to_dict(s) for s in model.segments],
    })


def load_piecewise(path) -> PiecewiseIsingModel:
    payload = read_json(path)
    try:
        segments = [weights_from_dict(s) for s in payload["segments"]]
        return PiecewiseIsingModel(n=payload["n"], change_points=payload.get("change_points", []), segments=segments)
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path}: missing field {exc}") from exc
    except ValidationError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc


def save_diagnostics(path, diag: ModelDiagnostics) -> Path:
    # +inf (no change-points) has no JSON spelling
    xi_min = diag.xi_min if math.isfinite(diag.xi_min) else None
    return write_json(path, {"delta_min": diag.delta_min, "xi_min": xi_min})


# ── Datasets ─────────────────────────────────────────────

def dataset_to_dict(dataset: SpinDataset) -> dict:
    return {"n": dataset.n, "p": dataset.p, "blocks": [b.tolist() for b in dataset.blocks]}


def save_dataset(path, dataset: SpinDataset) -> Path:
    """JSON for .json paths, long-form CSV otherwise."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return write_json(path, dataset_to_dict(dataset))
    return write_csv(path, dataset_frame(dataset))


def dataset_frame(dataset: SpinDataset) -> pd.DataFrame:
    """One row per observation: timestamp, replicate, v1..vp (1-based)."""
    stacked = np.vstack(dataset.blocks)
    frame = pd.DataFrame(stacked, columns=[f"v{k}" for k in range(1, dataset.p + 1)])
    frame.insert(0, "replicate", np.concatenate([np.arange(1, c + 1) for c in dataset.counts]))
    frame.insert(0, "timestamp", np.repeat(np.arange(1, dataset.n + 1), dataset.counts))
    return frame


def dataset_from_frame(frame: pd.DataFrame, source="dataset") -> SpinDataset:
    value_cols = [c for c in frame.columns if c not in ("timestamp", "replicate")]
    if "timestamp" not in frame.columns or not value_cols:
        raise InvalidInputError(f"{source}: need a timestamp column and at least one value column")
    frame = frame.sort_values(["timestamp", "replicate"] if "replicate" in frame.columns else ["timestamp"], kind="stable")
    stamps = frame["timestamp"].to_numpy()
    n = int(stamps.max()) if stamps.size else 0
    if n < 1 or set(stamps.tolist()) != set(range(1, n + 1)):
        raise InvalidInputError(f"{source}: timestamps must cover 1..n with at least one row each")
    if frame[value_cols].isna().to_numpy().any():
        raise InvalidInputError(f"{source}: missing values; ingest the file to impute or drop them")
    values = frame[value_cols].to_numpy()
    blocks = [values[stamps == i] for i in range(1, n + 1)]
    try:
        return SpinDataset(n=n, p=len(value_cols), blocks=blocks)
    except ValidationError as exc:
        raise InvalidInputError(f"{source}: {exc}") from exc


def load_dataset(path) -> SpinDataset:
    path = Path(path)
    if path.suffix.lower() != ".json":
        return dataset_from_frame(read_csv(path), path)
    payload = read_json(path)
    try:
        return SpinDataset(n=payload["n"], p=payload["p"], blocks=payload["blocks"])
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path}: missing field {exc}") from exc
    except (ValidationError, ValueError) as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc


# ── Solver output ────────────────────────────────────────

def solution_to_dict(solution: NodeSolution, with_beta: bool = True) -> dict:
    out = {
        "node": solution.node,
        "objective": solution.objective,
        "iterations": solution.iterations,
        "stationarity_violation": solution.stationarity_violation,
        "converged": solution.converged,
        "inner_converged": solution.inner_converged,
    }
    if with_beta:
        out["beta"] = solution.beta.tolist()
    return out


def solution_from_dict(payload: dict) -> NodeSolution:
    return _validated(NodeSolution, payload, f"node {payload.get('node')}")


def save_solutions(path, solutions: Sequence[NodeSolution]) -> Path:
    return write_json(path, {"nodes": [solution_to_dict(s) for s in solutions]})


def load_solutions(path) -> List[NodeSolution]:
    payload = read_json(path)
    nodes = payload.get("nodes") if isinstance(payload, dict) else None
    if not isinstance(nodes, list):
        raise InvalidInputError(f"{path}: expected an object with a 'nodes' list")
    return [solution_from_dict(row if isinstance(row, dict) else {}) for row in nodes]


def save_stationarity_report(path, solutions: Sequence[NodeSolution], limits: Sequence[float]) -> Path:
    rows = []
    for solution, limit in zip(solutions, limits):
        row = solution_to_dict(solution, with_beta=False)
        row["limit"] = limit
        row["passed"] = solution.stationarity_violation is None or solution.stationarity_violation <= limit
        rows.append(row)
    return write_json(path, {"nodes": rows})


def estimated_to_dict(model: EstimatedModel) -> dict:
    segments = []
    for j, edges in enumerate(model.edges):
        theta = model.theta[j]
        segments.append({
            "edges": [[a, b, float(theta[a - 1, b - 1]), float(theta[b - 1, a - 1])] for a, b in sorted(edges)]
        })
    return {
        "n": model.n,
        "p": model.p,
        "change_points": list(model.change_points),
        "segments": segments,
        "theta": model.theta.tolist(),
        "node_change_points": {str(a): cps for a, cps in model.node_change_points.items()},
        "change_strengths": list(model.change_strengths),
        "stationarity": list(model.stationarity),
        "objectives": list(model.objectives),
    }


def save_estimated(path, model: EstimatedModel) -> Path:
    return write_json(path, estimated_to_dict(model))


def load_estimated(path) -> EstimatedModel:
    payload = read_json(path)
    try:
        n, p = int(payload["n"]), int(payload["p"])
        segments = payload["segments"]
        edges = [frozenset((int(e[0]), int(e[1])) for e in s.get("edges", [])) for s in segments]
        if "theta" in payload:
            theta = np.asarray(payload["theta"], dtype=float)
        else:
            theta = np.zeros((len(segments), p, p))
            for j, s in enumerate(segments):
                for a, b, w_ab, w_ba in s.get("edges", []):
                    theta[j, a - 1, b - 1] = w_ab
                    theta[j, b - 1, a - 1] = w_ba
        return EstimatedModel(
            n=n,
            p=p,
            change_points=payload.get("change_points", []),
            theta=theta,
            edges=edges,
            node_change_points={int(a): cps for a, cps in payload.get("node_change_points", {}).items()},
            change_strengths=payload.get("change_strengths", []),
            stationarity=payload.get("stationarity", []),
            objectives=payload.get("objectives", []),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidInputError(f"{path}: malformed estimated model ({exc!r})") from exc
    except (ValidationError, ValueError) as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc


def edge_frame(model: EstimatedModel, sign: str = "all") -> pd.DataFrame:
    """
    Per-segment edge list for plotting. weight is the mean of θ̂_ab and θ̂_ba;
    sign keeps all edges or only the positive or negative ones.
    """
    if sign not in SIGN_FILTERS:
        raise InvalidInputError(f"sign must be one of {SIGN_FILTERS}, got {sign!r}")
    bounds = [1, *model.change_points, model.n + 1]
    rows = []
    for j, edges in enumerate(model.edges):
        theta = model.theta[j]
        for a, b in sorted(edges):
            weight = 0.5 * (theta[a - 1, b - 1] + theta[b - 1, a - 1])
            if (sign == "positive" and weight <= 0) or (sign == "negative" and weight >= 0):
                continue
            rows.append({
                "segment": j + 1,
                "start": bounds[j],
                "stop": bounds[j + 1] - 1,
                "a": a,
                "b": b,
                "weight": float(weight),
            })
    return pd.DataFrame(rows, columns=["segment", "start", "stop", "a", "b", "weight"])


# ── Selection and evaluation ─────────────────────────────

def trace_frame(trace: Iterable[TraceEntry]) -> pd.DataFrame:
    return pd.DataFrame(
        [t.model_dump() for t in trace],
        columns=["lambda1", "lambda2", "criterion", "num_change_points"],
    )


def save_search(path, result: SearchResult) -> Path:
    return write_json(path, {
        "lambda1": result.lambda1,
        "lambda2": result.lambda2,
        "criterion": result.criterion.value,
        "value": result.value,
    })


def save_report(path, report: EvaluationReport) -> Path:
    return write_json(path, report.model_dump())


def save_run_log(path, entries: List[dict]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(json.dumps(e) + "\n" for e in entries))
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    return path
