"""
From node-wise solutions to a piece-wise constant graph model.

Change-points are the union over nodes of the timestamps where a node's
coefficient vector moves; inside each detected segment a node's vector is
the mean of its columns; edges follow the max (or min) rule.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence

import numpy as np

from .config import DEFAULT_TAU_CP, DEFAULT_TAU_SPARSE, worker_count
from .errors import InvalidInputError, SolverError
from .models import EdgeRule, EstimatedModel, NodeSolution, PenaltyConfig, SolverOptions, SpinDataset
from .solver import fit_node

logger = logging.getLogger(__name__)


def _jumps(solution: NodeSolution) -> np.ndarray:
    """‖β^(i) − β^(i−1)‖₂ for i = 2..n."""
    return np.linalg.norm(np.diff(solution.beta, axis=1), axis=0)


def node_change_points(solution: NodeSolution, tau_cp: float = DEFAULT_TAU_CP) -> List[int]:
    """1-based timestamps where this node's coefficient vector changes."""
    return [int(i) + 2 for i in np.flatnonzero(_jumps(solution) > tau_cp)]


def _check_solutions(solutions: Sequence[NodeSolution]) -> None:
    if not solutions:
        raise InvalidInputError("no node solutions given")
    shapes = {s.beta.shape for s in solutions}
    if len(shapes) != 1:
        raise InvalidInputError(f"node solutions disagree on shape: {sorted(shapes)}")


def extract_change_points(solutions: Sequence[NodeSolution], tau_cp: float = DEFAULT_TAU_CP) -> List[int]:
    """i is a change-point iff some node's vector jumps by more than tau_cp at i."""
    _check_solutions(solutions)
    largest = np.max([_jumps(s) for s in solutions], axis=0)
    return [int(i) + 2 for i in np.flatnonzero(largest > tau_cp)]


def change_strengths(solutions: Sequence[NodeSolution], change_points: Sequence[int]) -> List[float]:
    """Largest node-wise jump at each change-point."""
    largest = np.max([_jumps(s) for s in solutions], axis=0)
    return [float(largest[i - 2]) for i in change_points]


def segment_parameters(solutions: Sequence[NodeSolution], change_points: Sequence[int]) -> np.ndarray:
    """
    θ̂ as a (segments, p, p) array: theta[j, a, b] is node a's coefficient on
    node b in segment j, the mean of β̂_a's columns over that segment.
    """
    _check_solutions(solutions)
    p = len(solutions)
    n = solutions[0].n
    bounds = [0, *[i - 1 for i in change_points], n]
    theta = np.zeros((len(bounds) - 1, p, p))
    others = [np.delete(np.arange(p), a) for a in range(p)]
    for solution in solutions:
        a = solution.node - 1
        for j, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
            theta[j, a, others[a]] = solution.beta[:, lo:hi].mean(axis=1)
    return theta


def assemble_graphs(
    theta: np.ndarray,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    rule: EdgeRule = EdgeRule.max,
) -> List[frozenset]:
    """Edge set per segment as 1-based pairs (a, b), a < b."""
    magnitude = np.abs(theta)
    sym = np.swapaxes(magnitude, 1, 2)
    combined = np.maximum(magnitude, sym) if rule == EdgeRule.max else np.minimum(magnitude, sym)
    edges = []
    for segment in combined:
        rows, cols = np.nonzero(np.triu(segment > tau_sparse, k=1))
        edges.append(frozenset((int(a) + 1, int(b) + 1) for a, b in zip(rows, cols)))
    return edges


def build_model(
    solutions: Sequence[NodeSolution],
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    rule: EdgeRule = EdgeRule.max,
) -> EstimatedModel:
    change_points = extract_change_points(solutions, tau_cp)
    theta = segment_parameters(solutions, change_points)
    return EstimatedModel(
        n=solutions[0].n,
        p=len(solutions),
        change_points=change_points,
        theta=theta,
        edges=assemble_graphs(theta, tau_sparse, rule),
        node_change_points={s.node: node_change_points(s, tau_cp) for s in solutions},
        change_strengths=change_strengths(solutions, change_points),
        stationarity=[s.stationarity_violation for s in solutions],
        objectives=[s.objective for s in solutions],
    )


def fit_nodes(
    dataset: SpinDataset,
    penalty: PenaltyConfig,
    opts: SolverOptions = SolverOptions(),
    workers: int | None = None,
) -> List[NodeSolution]:
    """Fit every node; per-node results do not depend on the worker count."""

    def _fit(node: int) -> NodeSolution:
        try:
            return fit_node(dataset, node, penalty, opts)
        except SolverError as exc:
            raise SolverError(f"node {node} failed: {exc.detail}", node=node) from exc

    nodes = range(1, dataset.p + 1)
    pool_size = worker_count(workers)
    if pool_size == 1:
        return [_fit(a) for a in nodes]
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        return list(pool.map(_fit, nodes))


def certificate_failures(solutions: Sequence[NodeSolution], opts: SolverOptions) -> List[int]:
    """Nodes whose stationarity violation exceeds tol_stationarity·(1 + |objective|)."""
    failed = []
    for s in solutions:
        limit = opts.tol_stationarity * (1.0 + abs(s.objective))
        if s.stationarity_violation is not None and s.stationarity_violation > limit:
            failed.append(s.node)
    return failed


def fit_model(
    dataset: SpinDataset,
    penalty: PenaltyConfig,
    opts: SolverOptions = SolverOptions(),
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    rule: EdgeRule = EdgeRule.max,
    workers: int | None = None,
) -> EstimatedModel:
    solutions = fit_nodes(dataset, penalty, opts, workers)
    failed = certificate_failures(solutions, opts)
    if failed:
        logger.warning("stationarity certificate above tolerance for nodes %s", failed)
    model = build_model(solutions, tau_cp, tau_sparse, rule)
    logger.info(
        "fit λ1=%g λ2=%g (%s): %d change-points",
        penalty.lambda1, penalty.lambda2, penalty.fused_norm.value, len(model.change_points),
    )
    return model
