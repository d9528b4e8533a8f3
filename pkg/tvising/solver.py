"""
Node-wise penalized conditional likelihood.

For node a the unknown is a (p-1) x n matrix β whose column i holds the
coefficients of the other nodes at timestamp i. The smooth part is the
logistic loss of x_a given x_{∖a}, summed over all replicates and
timestamps; the nonsmooth part is λ1·fused(β) + λ2·‖β‖₁.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, SolverError
from .models import FusedNorm, NodeSolution, PenaltyConfig, SolverOptions, SpinDataset, StepRule
from .prox import prox_combined

logger = logging.getLogger(__name__)

# consecutive near-stalled iterations before declaring convergence
_PATIENCE = 5


class NodeProblem(NamedTuple):
    """Samples of one node's regression, stacked in timestamp order."""
    node: int           # 1-based
    X: np.ndarray       # (N, p-1) float, x_{∖a}
    y: np.ndarray       # (N,) float, x_a
    ts: np.ndarray      # (N,) 0-based timestamp of each row
    offsets: np.ndarray # (n,) first row of each timestamp
    counts: np.ndarray  # (n,)

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape[1], self.counts.size


def node_problem(dataset: SpinDataset, node: int) -> NodeProblem:
    if not 1 <= node <= dataset.p:
        raise InvalidInputError(f"node {node} outside 1..{dataset.p}")
    a = node - 1
    stacked = np.vstack(dataset.blocks).astype(float)
    counts = dataset.counts
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    ts = np.repeat(np.arange(dataset.n), counts)
    return NodeProblem(node, np.delete(stacked, a, axis=1), stacked[:, a], ts, offsets, counts)


def _margins(beta: np.ndarray, problem: NodeProblem) -> np.ndarray:
    return np.einsum("ij,ij->i", problem.X, beta.T[problem.ts])


def loss_value(beta: np.ndarray, problem: NodeProblem) -> float:
    z = _margins(beta, problem)
    return float(np.sum(np.logaddexp(z, -z) - problem.y * z))


def _loss_and_gradient(beta: np.ndarray, problem: NodeProblem) -> tuple[float, np.ndarray]:
    z = _margins(beta, problem)
    value = float(np.sum(np.logaddexp(z, -z) - problem.y * z))
    residual = np.tanh(z) - problem.y
    grad = np.add.reduceat(problem.X * residual[:, None], problem.offsets, axis=0).T
    return value, grad


def _check_beta(beta: np.ndarray, problem: NodeProblem) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != problem.shape:
        raise InvalidInputError(f"beta must have shape {problem.shape}, got {beta.shape}")
    return beta


def node_loss_and_gradient(beta, dataset: SpinDataset, node: int) -> tuple[float, np.ndarray]:
    """Negative conditional log-likelihood of node (1-based) and its gradient."""
    problem = node_problem(dataset, node)
    return _loss_and_gradient(_check_beta(beta, problem), problem)


def penalty_value(beta: np.ndarray, penalty: PenaltyConfig) -> float:
    diffs = beta[:, 1:] - beta[:, :-1]
    if penalty.fused_norm == FusedNorm.group_l2:
        fused = float(np.linalg.norm(diffs, axis=0).sum())
    else:
        fused = float(np.abs(diffs).sum())
    return penalty.lambda1 * fused + penalty.lambda2 * float(np.abs(beta).sum())


def lipschitz_bound(problem: NodeProblem) -> float:
    """
    Gradient Lipschitz constant of the loss.

    The Hessian is block diagonal over timestamps and each block is bounded by
    n^(i)·(p-1) since spins are ±1 and the logistic curvature is at most 1.
    """
    return float(problem.X.shape[1] * problem.counts.max())


# ── Fit ──────────────────────────────────────────────────

def fit_node(
    dataset: SpinDataset,
    node: int,
    penalty: PenaltyConfig,
    opts: SolverOptions = SolverOptions(),
) -> NodeSolution:
    """
    Monotone accelerated proximal gradient from β = 0.

    A proximal point is accepted only if it does not increase the objective;
    a rejected point also resets the momentum. Iteration stops once the
    accepted objective has decreased by at most tol_outer (relative) for a few
    consecutive iterations, or after max_outer_iter.
    """
    problem = node_problem(dataset, node)
    l_max = lipschitz_bound(problem)
    lip = l_max if opts.step_rule == StepRule.fixed else l_max / 16.0

    x = np.zeros(problem.shape)
    y = x
    t = 1.0
    objective = loss_value(x, problem) + penalty_value(x, penalty)
    inner_ok = True
    stalled = 0
    converged = False
    k = 0
    for k in range(1, opts.max_outer_iter + 1):
        f_y, g_y = _loss_and_gradient(y, problem)
        tol_inner = min(opts.tol_inner, opts.tol_outer * max(abs(objective), 1.0))
        while True:
            prox = prox_combined(
                y - g_y / lip,
                penalty.lambda1 / lip,
                penalty.lambda2 / lip,
                penalty.fused_norm,
                tol_inner,
                opts.max_inner_iter,
            )
            z = prox.value
            f_z = loss_value(z, problem)
            if opts.step_rule == StepRule.fixed or lip >= l_max:
                break
            step = z - y
            if f_z <= f_y + float(np.sum(g_y * step)) + 0.5 * lip * float(np.sum(step * step)) + 1e-12 * abs(f_y):
                break
            lip = min(2.0 * lip, l_max)
        inner_ok = inner_ok and prox.converged

        if not np.all(np.isfinite(z)) or not math.isfinite(f_z):
            raise SolverError(f"non-finite iterate for node {node} at iteration {k}", node=node)

        candidate = f_z + penalty_value(z, penalty)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if candidate <= objective:
            decrease = objective - candidate
            x_next, objective = z, candidate
            y = x_next + ((t - 1.0) / t_next) * (x_next - x)
            t = t_next
        else:
            decrease = 0.0
            x_next = x
            y = x
            t = 1.0
        x = x_next

        stalled = stalled + 1 if decrease <= opts.tol_outer * max(abs(objective), 1.0) else 0
        if stalled >= _PATIENCE:
            converged = True
            break

    if not converged:
        logger.warning("node %d: no convergence after %d iterations (objective %.6g)", node, k, objective)
    if not inner_ok:
        logger.warning("node %d: inner prox hit its iteration cap at least once", node)

    solution = NodeSolution(
        node=node,
        beta=x,
        objective=loss_value(x, problem) + penalty_value(x, penalty),
        iterations=k,
        converged=converged,
        inner_converged=inner_ok,
    )
    violation = check_stationarity(
        solution, dataset, penalty, opts.certificate_directions, opts.certificate_seed + node
    )
    logger.debug(
        "node %d: %d iterations, objective %.8g, violation %.3g", node, k, solution.objective, violation
    )
    return solution.model_copy(update={"stationarity_violation": violation})


# ── Optimality certificate ───────────────────────────────

def _norm_directional(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Directional derivative of Σ_j ‖g_j‖₂ (columns) along u, batched over u."""
    norms = np.linalg.norm(g, axis=0)
    active = norms > 0
    unit = np.where(active, g / np.where(active, norms, 1.0), 0.0)
    along = np.einsum("rc,krc->kc", unit, u)
    return np.where(active, along, np.linalg.norm(u, axis=1)).sum(axis=1)


def _abs_directional(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Directional derivative of Σ|g| along u, batched over u."""
    return np.where(g != 0, np.sign(g) * u, np.abs(u)).sum(axis=(1, 2))


def _directions(shape: tuple[int, int], count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-Frobenius directions: half Gaussian, half signed coordinate vectors."""
    size = shape[0] * shape[1]
    half = count // 2
    gaussian = rng.standard_normal((count - half, size))
    coordinate = np.zeros((half, size))
    coordinate[np.arange(half), rng.integers(0, size, size=half)] = rng.choice((-1.0, 1.0), size=half)
    dirs = np.concatenate([gaussian, coordinate])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return dirs.reshape(count, *shape)


def directional_derivatives(
    beta: np.ndarray, grad: np.ndarray, penalty: PenaltyConfig, directions: np.ndarray
) -> np.ndarray:
    """f′(β; V) of the penalized objective for each V in directions."""
    smooth = np.einsum("rc,krc->k", grad, directions)
    diff_beta = beta[:, 1:] - beta[:, :-1]
    diff_dirs = directions[:, :, 1:] - directions[:, :, :-1]
    if penalty.fused_norm == FusedNorm.group_l2:
        fused = _norm_directional(diff_beta, diff_dirs)
    else:
        fused = _abs_directional(diff_beta, diff_dirs)
    return smooth + penalty.lambda1 * fused + penalty.lambda2 * _abs_directional(beta, directions)


def check_stationarity(
    solution: NodeSolution,
    dataset: SpinDataset,
    penalty: PenaltyConfig,
    num_directions: int = 64,
    seed: int = 0,
) -> float:
    """
    Largest descent rate found among random unit directions.

    The objective is convex, so β̂ is optimal exactly when every directional
    derivative is nonnegative; the return value is max(0, −min f′(β̂; V)).
    """
    problem = node_problem(dataset, solution.node)
    beta = _check_beta(solution.beta, problem)
    _, grad = _loss_and_gradient(beta, problem)
    directions = _directions(beta.shape, max(num_directions, 1), np.random.default_rng(seed))
    slopes = directional_derivatives(beta, grad, penalty, directions)
    return float(max(0.0, -slopes.min()))
