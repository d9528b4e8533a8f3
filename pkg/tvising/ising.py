"""
Exact Ising model mathematics.

Joint probabilities are computed by enumerating all 2^p states, with the
normalizing constant kept in log space. That is only feasible for small p;
it serves as ground truth for the sampler and solver, never as part of the
estimation pipeline.
"""

import itertools

import numpy as np
from scipy.special import expit, logsumexp

from .config import MAX_JOINT_P, MAX_TABLE_P
from .errors import InvalidInputError
from .models import ModelDiagnostics, PiecewiseIsingModel, SpinVector, WeightMatrix

_CHUNK_BITS = 16


def spin_vector(values, p: int | None = None) -> SpinVector:
    """Validate and return a ±1 vector, optionally of length p."""
    x = np.asarray(values)
    if x.ndim != 1:
        raise InvalidInputError(f"spin vector must be 1-D, got shape {x.shape}")
    if p is not None and x.shape[0] != p:
        raise InvalidInputError(f"spin vector has length {x.shape[0]}, model has p={p}")
    if not np.all(np.abs(x) == 1):
        raise InvalidInputError("spin vector entries must be -1 or +1")
    return x.astype(np.int8)


def all_states(p: int) -> np.ndarray:
    """All 2^p spin vectors, first coordinate most significant, +1 before -1."""
    codes = np.arange(2**p)[:, None] >> np.arange(p)[::-1]
    return (1 - 2 * (codes & 1)).astype(np.int8)


def energy(w: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Σ_{a<b} x_a x_b ω_ab for each row of states."""
    x = states.astype(float)
    return 0.5 * np.einsum("sa,ab,sb->s", x, w, x)


def log_partition(model: WeightMatrix) -> float:
    """log Z(Ω) by enumeration, in chunks of 2^16 states."""
    if model.p > MAX_JOINT_P:
        raise InvalidInputError(f"p={model.p} too large for enumeration (max {MAX_JOINT_P})")
    p = model.p
    if p <= _CHUNK_BITS:
        return float(logsumexp(energy(model.w, all_states(p))))

    low = all_states(_CHUNK_BITS)
    partial = []
    for prefix in itertools.product((1, -1), repeat=p - _CHUNK_BITS):
        head = np.broadcast_to(np.array(prefix, dtype=np.int8), (low.shape[0], len(prefix)))
        partial.append(logsumexp(energy(model.w, np.hstack([head, low]))))
    return float(logsumexp(partial))


def joint_probability(model: WeightMatrix, x) -> float:
    x = spin_vector(x, model.p)
    return float(np.exp(energy(model.w, x[None, :])[0] - log_partition(model)))


def enumerate_distribution(model: WeightMatrix) -> dict[tuple[int, ...], float]:
    """Probability of every state, keyed by the state tuple."""
    if model.p > MAX_TABLE_P:
        raise InvalidInputError(f"p={model.p} too large for a full table (max {MAX_TABLE_P})")
    states = all_states(model.p)
    log_weights = energy(model.w, states)
    probs = np.exp(log_weights - logsumexp(log_weights))
    return {tuple(int(v) for v in s): float(pr) for s, pr in zip(states, probs)}


def conditional_probability(omega_a, x_a: int, x_rest) -> float:
    """P(X_a = x_a | X_rest = x_rest) for coupling vector ω_a."""
    omega_a = np.asarray(omega_a, dtype=float)
    x_rest = np.asarray(x_rest, dtype=float)
    if omega_a.shape != x_rest.shape or omega_a.ndim != 1:
        raise InvalidInputError(
            f"omega_a and x_rest must be vectors of equal length, got {omega_a.shape} and {x_rest.shape}"
        )
    if x_a not in (-1, 1):
        raise InvalidInputError(f"x_a must be -1 or +1, got {x_a}")
    return float(expit(2.0 * x_a * np.dot(omega_a, x_rest)))


def weights_at(model: PiecewiseIsingModel, i: int) -> WeightMatrix:
    """Coupling matrix in force at 1-based timestamp i."""
    if not 1 <= i <= model.n:
        raise InvalidInputError(f"timestamp {i} outside 1..{model.n}")
    j = int(np.searchsorted(model.change_points, i, side="right"))
    return model.segments[j]


def diagnostics(model: PiecewiseIsingModel) -> ModelDiagnostics:
    """
    Minimal change-point spacing and minimal parameter jump.

    With no change-points the spacing is reported as the horizon n and the
    jump as +inf.
    """
    if not model.change_points:
        return ModelDiagnostics(delta_min=model.n, xi_min=float("inf"))

    spacing = np.diff([1, *model.change_points])
    # node-wise jumps are column differences; the shared zero diagonal drops out
    jumps = [
        np.linalg.norm(after.w - before.w, axis=0).min()
        for before, after in zip(model.segments, model.segments[1:])
    ]
    return ModelDiagnostics(delta_min=int(spacing.min()), xi_min=float(min(jumps)))
