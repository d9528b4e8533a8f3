"""
Evaluation metrics: change-point localization and temporal edge recovery.
"""

from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .models import EstimatedModel, EvaluationReport, F1Averaging, PiecewiseIsingModel


def _farthest(source: Sequence[int], target: Sequence[int]) -> int:
    """max over s in source of the distance to the nearest point of target."""
    s = np.asarray(source)[:, None]
    t = np.asarray(target)[None, :]
    return int(np.abs(s - t).min(axis=1).max())


def hausdorff(true_cp: Iterable[int], est_cp: Iterable[int], n: int) -> float:
    """
    Hausdorff distance between change-point sets, divided by n.

    Both empty gives 0 and exactly one empty gives 1, the worst score.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    true_cp = sorted(set(true_cp))
    est_cp = sorted(set(est_cp))
    if not true_cp and not est_cp:
        return 0.0
    if not true_cp or not est_cp:
        return 1.0
    return max(_farthest(true_cp, est_cp), _farthest(est_cp, true_cp)) / n


def one_sided_distance(a: Iterable[int], b: Iterable[int]) -> float:
    """sup over b of the distance to the nearest point of a."""
    a = sorted(set(a))
    b = sorted(set(b))
    if not b:
        return 0.0
    if not a:
        raise InvalidInputError("one_sided_distance is undefined for an empty first set")
    return float(_farthest(b, a))


def localization_error(true_cp: Sequence[int], est_cp: Sequence[int], n: int) -> float:
    """
    max_j |T̂_j − T_j| / n when both sets have the same size (matched in
    order), otherwise the Hausdorff score.
    """
    true_cp = sorted(set(true_cp))
    est_cp = sorted(set(est_cp))
    if len(true_cp) != len(est_cp):
        return hausdorff(true_cp, est_cp, n)
    if not true_cp:
        return 0.0
    return float(np.abs(np.subtract(est_cp, true_cp)).max()) / n


def _harmonic(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ratios(true: frozenset, est: frozenset) -> tuple[float, float]:
    if not true and not est:
        return 1.0, 1.0
    hits = len(true & est)
    precision = hits / len(est) if est else 0.0
    recall = hits / len(true) if true else 0.0
    return precision, recall


def temporal_f1(
    true_edges: Sequence[frozenset],
    est: EstimatedModel,
    averaging: F1Averaging = F1Averaging.of_means,
) -> tuple[float, float, float]:
    """
    Precision and recall per timestamp, averaged over time.

    of_means: F1 is the harmonic mean of the averaged precision and recall.
    mean_of_per_timestamp: F1 is the average of the per-timestamp F1 scores.
    """
    if len(true_edges) != est.n:
        raise InvalidInputError(f"truth covers {len(true_edges)} timestamps, estimate covers {est.n}")
    for edges in true_edges:
        for a, b in edges:
            if not 1 <= a < b <= est.p:
                raise InvalidInputError(f"true edge ({a}, {b}) does not fit p={est.p}")

    per_timestamp = [_ratios(frozenset(t), e) for t, e in zip(true_edges, est.edge_sets())]
    precision = float(np.mean([pr for pr, _ in per_timestamp]))
    recall = float(np.mean([rc for _, rc in per_timestamp]))
    if averaging == F1Averaging.of_means:
        f1 = _harmonic(precision, recall)
    else:
        f1 = float(np.mean([_harmonic(pr, rc) for pr, rc in per_timestamp]))
    return precision, recall, f1


def evaluate(
    truth: PiecewiseIsingModel,
    est: EstimatedModel,
    averaging: F1Averaging = F1Averaging.of_means,
) -> EvaluationReport:
    if truth.n != est.n or truth.p != est.p:
        raise InvalidInputError(f"truth is n={truth.n}, p={truth.p} but the estimate is n={est.n}, p={est.p}")
    precision, recall, f1 = temporal_f1(truth.edge_sets(), est, averaging)
    return EvaluationReport(
        h_score=hausdorff(truth.change_points, est.change_points, truth.n),
        precision=precision,
        recall=recall,
        f1=f1,
        num_detected=len(est.change_points),
    )


def best_f1_under_h(reports: Iterable[EvaluationReport], h_max: float) -> Optional[float]:
    """Highest F1 among reports with h_score <= h_max, or None."""
    eligible: List[float] = [r.f1 for r in reports if r.h_score <= h_max]
    return max(eligible) if eligible else None
