"""
Hyperparameter selection: AIC on the training data or AUC on held-out data,
over a grid or a seeded random sample of (λ1, λ2).
"""

import itertools
import logging
import math
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .config import DEFAULT_TAU_CP, DEFAULT_TAU_SPARSE
from .errors import InvalidInputError
from .estimator import build_model, fit_nodes
from .models import (
    Criterion,
    DimConvention,
    EdgeRule,
    EstimatedModel,
    FusedNorm,
    NodeSolution,
    PenaltyConfig,
    SearchResult,
    SearchSpec,
    SearchStrategy,
    SolverOptions,
    SpinDataset,
    TraceEntry,
)
from .solver import loss_value, node_problem

logger = logging.getLogger(__name__)


# ── AIC ──────────────────────────────────────────────────

def dim_count(
    solution: NodeSolution,
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    convention: DimConvention = DimConvention.repeat_first,
) -> int:
    """Nonzero coordinates summed over the columns where β̂ changes."""
    beta = solution.beta
    first = beta[:, :1] if convention == DimConvention.repeat_first else np.zeros((beta.shape[0], 1))
    previous = np.hstack([first, beta[:, :-1]])
    changed = np.linalg.norm(beta - previous, axis=0) > tau_cp
    nonzeros = (np.abs(beta) > tau_sparse).sum(axis=0)
    return int(nonzeros[changed].sum())


def aic(
    solutions: Sequence[NodeSolution],
    dataset: SpinDataset,
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    convention: DimConvention = DimConvention.repeat_first,
) -> float:
    """Mean over nodes of 2·L_a(β̂_a) + 2·Dim(β̂_a)."""
    scores = []
    for solution in solutions:
        loss = loss_value(solution.beta, node_problem(dataset, solution.node))
        scores.append(2.0 * loss + 2.0 * dim_count(solution, tau_cp, tau_sparse, convention))
    return float(np.mean(scores))


# ── AUC ──────────────────────────────────────────────────

def roc_auc(scores, labels) -> float:
    """Area under the ROC curve with midranks for tied scores."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    positives = int(labels.sum())
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        logger.warning("AUC undefined with a single label class; returning 0.5")
        return 0.5
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - positives * (positives + 1) / 2.0) / (positives * negatives))


def auc_score(model: EstimatedModel, holdout: SpinDataset) -> float:
    """Pooled AUC of P(X_a = +1 | x_{∖a}) over nodes, timestamps and replicates."""
    if holdout.n != model.n or holdout.p != model.p:
        raise InvalidInputError(
            f"holdout is n={holdout.n}, p={holdout.p} but the model is n={model.n}, p={model.p}"
        )
    scores = []
    labels = []
    for i, block in enumerate(holdout.blocks, start=1):
        x = block.astype(float)
        fields = x @ model.theta[model.segment_of(i)].T
        scores.append(expit(2.0 * fields).ravel())
        labels.append((block == 1).ravel())
    return roc_auc(np.concatenate(scores), np.concatenate(labels))


# ── Search ───────────────────────────────────────────────

class CandidateFit(NamedTuple):
    lambda1: float
    lambda2: float
    solutions: List[NodeSolution]
    model: EstimatedModel


def candidates(spec: SearchSpec) -> List[tuple[float, float]]:
    if spec.strategy == SearchStrategy.grid:
        axis1 = np.linspace(*spec.lambda1_range, spec.grid_counts[0])
        axis2 = np.linspace(*spec.lambda2_range, spec.grid_counts[1])
        return [(float(a), float(b)) for a, b in itertools.product(axis1, axis2)]
    rng = np.random.default_rng(spec.seed)
    lam1 = rng.uniform(*spec.lambda1_range, size=spec.num_points)
    lam2 = rng.uniform(*spec.lambda2_range, size=spec.num_points)
    return [(float(a), float(b)) for a, b in zip(lam1, lam2)]


def fit_candidates(
    dataset: SpinDataset,
    pairs: Sequence[tuple[float, float]],
    fused_norm: FusedNorm,
    opts: SolverOptions = SolverOptions(),
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    rule: EdgeRule = EdgeRule.max,
    workers: int | None = None,
) -> List[CandidateFit]:
    """Fit every pair in order; node fits inside a pair run in parallel."""
    fits = []
    for k, (lam1, lam2) in enumerate(pairs, start=1):
        penalty = PenaltyConfig(lambda1=lam1, lambda2=lam2, fused_norm=fused_norm)
        solutions = fit_nodes(dataset, penalty, opts, workers)
        model = build_model(solutions, tau_cp, tau_sparse, rule)
        logger.info("candidate %d/%d λ1=%.4g λ2=%.4g: %d change-points", k, len(pairs), lam1, lam2, len(model.change_points))
        fits.append(CandidateFit(lam1, lam2, solutions, model))
    return fits


def score(
    fit: CandidateFit,
    criterion: Criterion,
    dataset: SpinDataset,
    holdout: SpinDataset | None,
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    convention: DimConvention = DimConvention.repeat_first,
) -> float:
    if criterion == Criterion.aic:
        return aic(fit.solutions, dataset, tau_cp, tau_sparse, convention)
    if holdout is None:
        raise InvalidInputError("AUC selection needs a holdout dataset")
    return auc_score(fit.model, holdout)


def pick_best(trace: Sequence[TraceEntry], criterion: Criterion) -> int:
    """
    Index of the best entry: lowest AIC or highest AUC, ties going to the
    larger λ1 and then the larger λ2.
    """
    if not trace:
        raise InvalidInputError("empty search trace")
    sign = 1.0 if criterion == Criterion.auc else -1.0
    return max(
        range(len(trace)),
        key=lambda k: (sign * trace[k].criterion, trace[k].lambda1, trace[k].lambda2),
    )


def search(
    dataset: SpinDataset,
    holdout: SpinDataset | None,
    spec: SearchSpec,
    fused_norm: FusedNorm = FusedNorm.group_l2,
    opts: SolverOptions = SolverOptions(),
    tau_cp: float = DEFAULT_TAU_CP,
    tau_sparse: float = DEFAULT_TAU_SPARSE,
    convention: DimConvention = DimConvention.repeat_first,
    rule: EdgeRule = EdgeRule.max,
    keep_models: bool = False,
    workers: int | None = None,
) -> SearchResult:
    if spec.criterion == Criterion.auc and (holdout is None or holdout.total == 0):
        raise InvalidInputError("AUC selection needs a nonempty holdout dataset")
    pairs = candidates(spec)
    # |∂L/∂β| at the origin is at most n^(i) per entry, so λ2 >= max n^(i) keeps β̂ = 0
    largest = int(dataset.counts.max())
    if min(lam2 for _, lam2 in pairs) >= largest:
        logger.warning("every candidate has lambda2 >= %d (largest per-timestamp count); all estimates will be zero", largest)
    fits = fit_candidates(dataset, pairs, fused_norm, opts, tau_cp, tau_sparse, rule, workers=workers)
    trace = [
        TraceEntry(
            lambda1=fit.lambda1,
            lambda2=fit.lambda2,
            criterion=score(fit, spec.criterion, dataset, holdout, tau_cp, tau_sparse, convention),
            num_change_points=len(fit.model.change_points),
        )
        for fit in fits
    ]
    best = pick_best(trace, spec.criterion)
    if not math.isfinite(trace[best].criterion):
        logger.warning("best %s value is not finite", spec.criterion.value)
    return SearchResult(
        lambda1=trace[best].lambda1,
        lambda2=trace[best].lambda2,
        criterion=spec.criterion,
        value=trace[best].criterion,
        trace=trace,
        models=[fit.model for fit in fits] if keep_models else None,
    )
