import numpy as np
import pytest

from tvising.config import DEFAULT_TAU_CP
from tvising.errors import InvalidInputError, SolverError
from tvising.estimator import (
    assemble_graphs,
    build_model,
    certificate_failures,
    change_strengths,
    extract_change_points,
    fit_model,
    fit_nodes,
    node_change_points,
    segment_parameters,
)
from tvising.models import EdgeRule, FusedNorm, NodeSolution, PenaltyConfig, SolverOptions
from tvising.sampler import generate_scenario


def _constant(node: int, p: int = 3, n: int = 100, value: float = 0.0) -> NodeSolution:
    return NodeSolution(node=node, beta=np.full((p - 1, n), value), objective=1.0, iterations=1)


def _jump_at(node: int, at: int, size: float = 0.7, p: int = 3, n: int = 100) -> NodeSolution:
    beta = np.zeros((p - 1, n))
    beta[0, at - 1:] = size
    return NodeSolution(node=node, beta=beta, objective=1.0, iterations=1)


def test_constant_solutions_have_no_change_points():
    solutions = [_constant(a, value=0.3) for a in (1, 2, 3)]
    assert extract_change_points(solutions) == []
    model = build_model(solutions)
    assert model.num_segments == 1
    assert model.edges == [frozenset({(1, 2), (1, 3), (2, 3)})]


def test_single_jump_detected():
    solutions = [_jump_at(1, 51), _constant(2), _constant(3)]
    assert extract_change_points(solutions) == [51]
    assert node_change_points(solutions[0]) == [51]
    assert node_change_points(solutions[1]) == []
    assert change_strengths(solutions, [51]) == pytest.approx([0.7])


def test_change_points_are_union_over_nodes():
    solutions = [_jump_at(1, 30), _jump_at(2, 70, size=-0.2), _constant(3)]
    model = build_model(solutions)
    assert model.change_points == [30, 70]
    assert model.node_change_points == {1: [30], 2: [70], 3: []}
    assert model.change_strengths == pytest.approx([0.7, 0.2])


def test_jump_threshold_is_strict():
    solutions = [_jump_at(1, 10, size=0.5), _constant(2), _constant(3)]
    assert extract_change_points(solutions, tau_cp=0.5) == []
    assert extract_change_points(solutions, tau_cp=0.4) == [10]


def test_segment_parameters_average_columns():
    beta = np.vstack([np.arange(1.0, 101.0), np.zeros(100)])
    solutions = [NodeSolution(node=1, beta=beta, objective=0.0, iterations=1), _constant(2), _constant(3)]
    theta = segment_parameters(solutions, [51])
    assert theta.shape == (2, 3, 3)
    assert theta[0, 0, 1] == pytest.approx(25.5)
    assert theta[1, 0, 1] == pytest.approx(75.5)
    assert theta[0, 0, 2] == 0.0
    assert (np.diagonal(theta, axis1=1, axis2=2) == 0).all()


def test_segment_parameters_node_order():
    # node 2's coefficients are on nodes 1 and 3
    beta = np.array([[0.4] * 5, [-0.9] * 5])
    solutions = [_constant(1, n=5), NodeSolution(node=2, beta=beta, objective=0.0, iterations=1), _constant(3, n=5)]
    theta = segment_parameters(solutions, [])
    assert theta[0, 1, 0] == pytest.approx(0.4)
    assert theta[0, 1, 2] == pytest.approx(-0.9)


def test_edge_rules():
    theta = np.zeros((1, 3, 3))
    theta[0, 0, 1] = 0.5
    theta[0, 1, 2] = 0.2
    theta[0, 2, 1] = -0.3
    assert assemble_graphs(theta, rule=EdgeRule.max) == [frozenset({(1, 2), (2, 3)})]
    assert assemble_graphs(theta, rule=EdgeRule.min) == [frozenset({(2, 3)})]
    assert assemble_graphs(theta, tau_sparse=0.5) == [frozenset()]
    assert assemble_graphs(theta, tau_sparse=0.4) == [frozenset({(1, 2)})]


def test_mismatched_solutions_rejected():
    with pytest.raises(InvalidInputError):
        extract_change_points([])
    with pytest.raises(InvalidInputError):
        build_model([_constant(1, n=10), _constant(2, n=12), _constant(3, n=10)])


def test_certificate_failures():
    ok = NodeSolution(node=1, beta=np.zeros((2, 3)), objective=10.0, iterations=1, stationarity_violation=1e-4)
    bad = NodeSolution(node=2, beta=np.zeros((2, 3)), objective=10.0, iterations=1, stationarity_violation=0.01)
    unknown = NodeSolution(node=3, beta=np.zeros((2, 3)), objective=10.0, iterations=1)
    assert certificate_failures([ok, bad, unknown], SolverOptions()) == [2]


# ── Fitting ──────────────────────────────────────────────

def test_fit_nodes_independent_of_workers(tiny_dataset, fast_opts):
    penalty = PenaltyConfig(lambda1=1.0, lambda2=0.5)
    serial = fit_nodes(tiny_dataset, penalty, fast_opts, workers=1)
    parallel = fit_nodes(tiny_dataset, penalty, fast_opts, workers=2)
    assert [s.node for s in parallel] == [1, 2, 3, 4]
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.beta, b.beta)
        assert a.objective == b.objective


def test_fit_nodes_reports_failing_node(tiny_dataset, monkeypatch):
    def _fail(dataset, node, penalty, opts):
        raise SolverError("non-finite iterate", node=node)

    monkeypatch.setattr("tvising.estimator.fit_node", _fail)
    with pytest.raises(SolverError, match="node 1 failed"):
        fit_nodes(tiny_dataset, PenaltyConfig(lambda1=1.0, lambda2=1.0), workers=1)


def test_zero_lambda1_splits_every_timestamp(tiny_dataset, fast_opts):
    model = fit_model(tiny_dataset, PenaltyConfig(lambda1=0.0, lambda2=0.5), fast_opts)
    assert model.change_points == [2, 3, 4, 5, 6]
    assert model.num_segments == tiny_dataset.n


def test_fit_model_on_scenario(small_scenario, fast_opts):
    model = fit_model(small_scenario.train, PenaltyConfig(lambda1=2.0, lambda2=1.0), fast_opts)
    assert model.n == small_scenario.train.n
    assert model.p == small_scenario.train.p
    assert len(model.stationarity) == len(model.objectives) == model.p
    assert set(model.node_change_points) == set(range(1, model.p + 1))
    for edges in model.edges:
        assert all(1 <= a < b <= model.p for a, b in edges)


def test_group_change_points_stable_across_thresholds(small_scenario, fast_opts):
    solutions = fit_nodes(small_scenario.train, PenaltyConfig(lambda1=6.0, lambda2=1.0), fast_opts)
    reference = extract_change_points(solutions, tau_cp=1e-8)
    for tau_cp in (1e-10, 1e-9, 1e-7, 1e-6):
        assert extract_change_points(solutions, tau_cp=tau_cp) == reference


def _partial_columns(solutions) -> int:
    """Consecutive column pairs that differ in some coordinates but not all."""
    count = 0
    for solution in solutions:
        moved = np.diff(solution.beta, axis=1) != 0
        count += int((moved.any(axis=0) & ~moved.all(axis=0)).sum())
    return count


@pytest.mark.parametrize("seed", range(5))
def test_group_penalty_ties_whole_columns_unlike_entrywise(seed, small_config, fast_opts):
    config = small_config.model_copy(update={"seed": seed, "holdout_per_timestamp": 0})
    train = generate_scenario(config).train

    group = fit_nodes(train, PenaltyConfig(lambda1=2.0, lambda2=1.0), fast_opts)
    for solution in group:
        jumps = np.linalg.norm(np.diff(solution.beta, axis=1), axis=0)
        still = jumps <= DEFAULT_TAU_CP
        assert (np.diff(solution.beta, axis=1)[:, still] == 0).all()

    partial = 0
    for lam1, lam2 in ((1.0, 0.5), (2.0, 1.0), (0.5, 0.5)):
        tesla = fit_nodes(train, PenaltyConfig(lambda1=lam1, lambda2=lam2, fused_norm=FusedNorm.l1), fast_opts)
        partial = _partial_columns(tesla)
        if partial:
            break
    assert partial > 0
