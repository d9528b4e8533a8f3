import numpy as np
import pytest

from tvising.errors import InvalidInputError
from tvising.metrics import (
    best_f1_under_h,
    evaluate,
    hausdorff,
    localization_error,
    one_sided_distance,
    temporal_f1,
)
from tvising.models import EstimatedModel, EvaluationReport, F1Averaging, PiecewiseIsingModel, WeightMatrix


def _estimate(n: int, p: int, change_points, edges) -> EstimatedModel:
    return EstimatedModel(
        n=n,
        p=p,
        change_points=change_points,
        theta=np.zeros((len(change_points) + 1, p, p)),
        edges=[frozenset(e) for e in edges],
    )


# ── Change-points ────────────────────────────────────────

def test_hausdorff_examples():
    assert hausdorff([51, 81], [51, 81], 100) == 0.0
    assert hausdorff([51, 81], [50, 81], 100) == pytest.approx(0.01)
    assert hausdorff([51, 81], [51], 100) == pytest.approx(0.30)
    assert hausdorff([51], [51, 90], 100) == pytest.approx(0.39)


def test_hausdorff_empty_sets():
    assert hausdorff([], [], 100) == 0.0
    assert hausdorff([51], [], 100) == 1.0
    assert hausdorff([], [40], 100) == 1.0
    with pytest.raises(InvalidInputError):
        hausdorff([1], [1], 0)


def test_every_timestamp_baseline():
    # what a fit with no fusion penalty reports
    everything = list(range(2, 101))
    assert hausdorff([51], everything, 100) == pytest.approx(0.49)
    assert hausdorff([51, 81], everything, 100) == pytest.approx(0.49)


def test_hausdorff_symmetric_and_order_free(rng):
    for _ in range(20):
        a = rng.choice(np.arange(2, 60), size=3, replace=False).tolist()
        b = rng.choice(np.arange(2, 60), size=4, replace=False).tolist()
        assert hausdorff(a, b, 60) == hausdorff(b, a, 60)
        assert hausdorff(a[::-1], b, 60) == hausdorff(a, b, 60)
        assert 0.0 <= hausdorff(a, b, 60) <= 1.0


def test_one_sided_distance():
    assert one_sided_distance([51, 81], [50]) == 1.0
    assert one_sided_distance([50], [51, 81]) == 31.0
    assert one_sided_distance([10], []) == 0.0
    with pytest.raises(InvalidInputError):
        one_sided_distance([], [3])


def test_one_sided_distance_bounded_by_hausdorff(rng):
    n = 80
    for _ in range(50):
        a = rng.choice(np.arange(2, n + 1), size=int(rng.integers(1, 6)), replace=False)
        b = rng.choice(np.arange(2, n + 1), size=int(rng.integers(1, 6)), replace=False)
        assert one_sided_distance(a, b) <= n * hausdorff(a, b, n)
        assert one_sided_distance(b, a) <= n * hausdorff(a, b, n)


def test_localization_error():
    assert localization_error([51, 81], [53, 80], 100) == pytest.approx(0.02)
    assert localization_error([], [], 100) == 0.0
    assert localization_error([51, 81], [51], 100) == pytest.approx(0.30)


# ── Edge recovery ────────────────────────────────────────

def test_f1_perfect_recovery():
    truth = [frozenset({(1, 2)})] * 3 + [frozenset({(2, 3)})] * 3
    est = _estimate(6, 3, [4], [{(1, 2)}, {(2, 3)}])
    assert temporal_f1(truth, est) == (1.0, 1.0, 1.0)


def test_f1_partial_recovery():
    truth = [frozenset({(1, 2), (2, 3)})] * 4
    est = _estimate(4, 3, [], [{(1, 2), (1, 3)}])
    precision, recall, f1 = temporal_f1(truth, est)
    assert precision == pytest.approx(0.5)
    assert recall == pytest.approx(0.5)
    assert f1 == pytest.approx(0.5)


def test_f1_empty_conventions():
    empty_truth = [frozenset()] * 2
    assert temporal_f1(empty_truth, _estimate(2, 3, [], [set()])) == (1.0, 1.0, 1.0)
    assert temporal_f1(empty_truth, _estimate(2, 3, [], [{(1, 2)}])) == (0.0, 0.0, 0.0)
    assert temporal_f1([frozenset({(1, 2)})] * 2, _estimate(2, 3, [], [set()])) == (0.0, 0.0, 0.0)


def test_f1_averaging_modes():
    # timestamp 1 perfect, timestamp 2 finds one of two edges plus a false one
    truth = [frozenset({(1, 2)}), frozenset({(1, 2), (2, 3)})]
    est = _estimate(2, 3, [2], [{(1, 2)}, {(1, 2), (1, 3)}])
    p_mean, r_mean, f1_means = temporal_f1(truth, est, F1Averaging.of_means)
    assert (p_mean, r_mean) == (pytest.approx(0.75), pytest.approx(0.75))
    assert f1_means == pytest.approx(0.75)

    truth = [frozenset({(1, 2)}), frozenset({(1, 2), (2, 3), (1, 3)})]
    est = _estimate(2, 3, [2], [{(1, 2)}, {(1, 2)}])
    _, _, f1_means = temporal_f1(truth, est, F1Averaging.of_means)
    _, _, f1_per = temporal_f1(truth, est, F1Averaging.mean_of_per_timestamp)
    # precision (1, 1), recall (1, 1/3)
    assert f1_means == pytest.approx(2 * 1.0 * (2 / 3) / (1.0 + 2 / 3))
    assert f1_per == pytest.approx(0.5 * (1.0 + 0.5))


def test_f1_invariant_to_node_relabeling(rng):
    perm = rng.permutation(4) + 1

    def relabel(edges):
        return frozenset(tuple(sorted((int(perm[a - 1]), int(perm[b - 1])))) for a, b in edges)

    truth = [frozenset({(1, 2), (3, 4)})] * 2 + [frozenset({(1, 3)})] * 2
    est_edges = [{(1, 2), (2, 4)}, {(1, 3), (1, 4)}]
    base = temporal_f1(truth, _estimate(4, 4, [3], est_edges))
    moved = temporal_f1([relabel(t) for t in truth], _estimate(4, 4, [3], [relabel(e) for e in est_edges]))
    assert moved == pytest.approx(base)


def test_f1_rejects_mismatch():
    est = _estimate(3, 3, [], [set()])
    with pytest.raises(InvalidInputError):
        temporal_f1([frozenset()] * 2, est)
    with pytest.raises(InvalidInputError):
        temporal_f1([frozenset({(1, 4)})] * 3, est)
    with pytest.raises(InvalidInputError):
        temporal_f1([frozenset({(2, 1)})] * 3, est)


# ── Reports ──────────────────────────────────────────────

def test_evaluate_report():
    first = WeightMatrix.from_edges(3, [(1, 2, 0.7)])
    second = WeightMatrix.from_edges(3, [(2, 3, -0.6)])
    truth = PiecewiseIsingModel(n=10, change_points=[6], segments=[first, second])
    est = _estimate(10, 3, [5], [{(1, 2)}, {(2, 3)}])
    report = evaluate(truth, est)
    assert report.h_score == pytest.approx(0.1)
    assert report.num_detected == 1
    assert report.precision == pytest.approx(0.9)
    assert report.recall == pytest.approx(0.9)

    with pytest.raises(InvalidInputError):
        evaluate(truth, _estimate(9, 3, [], [set()]))


def test_best_f1_under_h():
    reports = [
        EvaluationReport(h_score=0.02, precision=0.5, recall=0.5, f1=0.5, num_detected=2),
        EvaluationReport(h_score=0.10, precision=0.9, recall=0.9, f1=0.9, num_detected=3),
        EvaluationReport(h_score=0.04, precision=0.7, recall=0.7, f1=0.7, num_detected=2),
    ]
    assert best_f1_under_h(reports, 0.05) == 0.7
    assert best_f1_under_h(reports, 0.10) == 0.9
    assert best_f1_under_h(reports, 0.01) is None
