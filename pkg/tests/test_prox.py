import numpy as np
import pytest

from tvising.models import FusedNorm
from tvising.prox import group_fused_dual, prox_combined, prox_fused_1d, prox_group_fused, prox_l1


def _group_objective(b, v, tau1, tau2=0.0):
    diffs = np.linalg.norm(b[:, 1:] - b[:, :-1], axis=0).sum()
    return 0.5 * np.sum((b - v) ** 2) + tau1 * diffs + tau2 * np.abs(b).sum()


def _locally_optimal(objective, b, rng, trials=200, eps=1e-3, slack=1e-9) -> bool:
    """A convex objective has no descent along random short steps at its minimizer."""
    base = objective(b)
    for _ in range(trials):
        step = rng.standard_normal(b.shape)
        if objective(b + eps * step / np.linalg.norm(step)) < base - slack:
            return False
    return True


def _tv_certificate(v, b, tau, tol=1e-9) -> bool:
    """KKT check for 1-D TV denoising: v - b = Dᵀu with u = tau·sign(Db) on jumps and |u| <= tau."""
    u = np.cumsum(b - v)[:-1]
    if abs(np.sum(b - v)) > tol:
        return False
    if np.any(np.abs(u) > tau + tol):
        return False
    jumps = np.diff(b)
    moving = np.abs(jumps) > tol
    return bool(np.all(np.abs(u[moving] - tau * np.sign(jumps[moving])) <= 1e-7))


# ── ℓ1 ───────────────────────────────────────────────────

def test_prox_l1_examples():
    v = np.array([[0.3, -1.2, 2.0]])
    assert np.array_equal(prox_l1(v, 0.0), v)
    assert prox_l1(v, 0.5) == pytest.approx(np.array([[0.0, -0.7, 1.5]]))


# ── Group fused ──────────────────────────────────────────

def test_group_fused_trivial_cases(rng):
    v = rng.standard_normal((3, 5))
    assert np.array_equal(prox_group_fused(v, 0.0), v)
    constant = np.repeat(rng.standard_normal((3, 1)), 5, axis=1)
    assert np.allclose(prox_group_fused(constant, 2.0), constant, atol=1e-12)


def test_group_fused_two_columns_collapse():
    v = np.array([[0.0, 0.6], [0.0, 0.8]])  # ‖v_2 − v_1‖ = 1
    out = prox_group_fused(v, 0.6)
    assert np.array_equal(out[:, 0], out[:, 1])
    assert out[:, 0] == pytest.approx([0.3, 0.4], abs=1e-12)


def test_group_fused_two_columns_shrink():
    v = np.array([[0.0, 3.0], [0.0, 4.0]])  # ‖v_2 − v_1‖ = 5
    tau = 1.0
    direction = np.array([0.6, 0.8])
    out = prox_group_fused(v, tau)
    assert out[:, 0] == pytest.approx(v[:, 0] + tau * direction, abs=1e-10)
    assert out[:, 1] == pytest.approx(v[:, 1] - tau * direction, abs=1e-10)


def test_group_fused_large_tau_gives_row_means(rng):
    v = rng.standard_normal((4, 7))
    out = prox_group_fused(v, 100.0)
    assert np.allclose(out, v.mean(axis=1, keepdims=True), atol=1e-9)
    assert (np.diff(out, axis=1) == 0).all()


@pytest.mark.parametrize("shape", [(1, 6), (3, 4), (5, 10)])
def test_group_fused_random_optimal(shape, rng):
    for _ in range(10):
        v = rng.standard_normal(shape)
        tau = float(rng.uniform(0.05, 1.5))
        result = group_fused_dual(v, tau, tol=1e-12)
        assert result.gap <= 1e-10
        assert _locally_optimal(lambda b: _group_objective(b, v, tau), result.value, rng)


def test_group_fused_single_row_equals_1d(rng):
    for _ in range(20):
        v = rng.standard_normal(6)
        tau = float(rng.uniform(0.05, 1.0))
        grouped = prox_group_fused(v[None, :], tau, tol=1e-13)[0]
        assert grouped == pytest.approx(prox_fused_1d(v, tau), abs=1e-6)


# ── 1-D fused ────────────────────────────────────────────

def test_fused_1d_examples():
    v = np.array([0.0, 1.0])
    assert np.array_equal(prox_fused_1d(v, 0.0), v)
    assert prox_fused_1d(v, 0.6) == pytest.approx([0.5, 0.5], abs=1e-12)
    assert prox_fused_1d([2.5], 1.0) == pytest.approx([2.5])
    assert prox_fused_1d([], 1.0).size == 0


def test_fused_1d_random_kkt(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        v = rng.standard_normal(n) * 2
        tau = float(rng.uniform(0.01, 2.0))
        b = prox_fused_1d(v, tau)
        assert _tv_certificate(v, b, tau)


def test_fused_1d_long_signal_kkt(rng):
    v = np.concatenate([np.zeros(40), np.full(30, 3.0), np.full(30, -1.0)]) + 0.3 * rng.standard_normal(100)
    b = prox_fused_1d(v, 2.0)
    assert _tv_certificate(v, b, 2.0)
    assert len(np.unique(np.round(b, 12))) < 20


# ── Nonexpansiveness ─────────────────────────────────────

@pytest.mark.parametrize("operator", ["l1", "fused_1d", "group"])
def test_firm_nonexpansive(operator, rng):
    for _ in range(20):
        u = rng.standard_normal((3, 6))
        v = rng.standard_normal((3, 6))
        tau = float(rng.uniform(0.1, 1.0))
        if operator == "l1":
            pu, pv = prox_l1(u, tau), prox_l1(v, tau)
        elif operator == "fused_1d":
            pu, pv = prox_fused_1d(u[0], tau), prox_fused_1d(v[0], tau)
            u, v = u[0], v[0]
        else:
            pu, pv = prox_group_fused(u, tau, tol=1e-12), prox_group_fused(v, tau, tol=1e-12)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-7


# ── Combined ─────────────────────────────────────────────

def test_combined_reduces_to_single_terms(rng):
    v = rng.standard_normal((3, 5))
    assert np.array_equal(prox_combined(v, 0.0, 0.4, FusedNorm.group_l2).value, prox_l1(v, 0.4))
    alone = group_fused_dual(v, 0.7, tol=1e-13).value
    assert prox_combined(v, 0.7, 0.0, FusedNorm.group_l2, tol_inner=1e-8).value == pytest.approx(alone, abs=2e-6)


def test_combined_l1_is_exact_composition(rng):
    v = rng.standard_normal((3, 8))
    expected = prox_l1(np.vstack([prox_fused_1d(row, 0.5) for row in v]), 0.3)
    result = prox_combined(v, 0.5, 0.3, FusedNorm.l1)
    assert result.converged
    assert np.array_equal(result.value, expected)


def test_combined_group_random_optimal(rng):
    for _ in range(10):
        v = rng.standard_normal((3, 4))
        tau1, tau2 = rng.uniform(0.05, 0.8, size=2)
        result = prox_combined(v, tau1, tau2, FusedNorm.group_l2, tol_inner=1e-9, max_iter=5000)
        assert result.converged
        assert _locally_optimal(lambda b: _group_objective(b, v, tau1, tau2), result.value, rng, slack=1e-8)


def test_combined_huge_penalties_give_zero(rng):
    v = rng.standard_normal((3, 6))
    for norm in FusedNorm:
        assert not prox_combined(v, 50.0, 50.0, norm).value.any()
