"""
Typed domain objects shared by every tvising module.

Array-valued models are frozen and hold read-only numpy arrays. Node and
timestamp indices are 1-based wherever they are user-facing (edge lists,
change-points, node ids) and 0-based inside arrays.
"""

import math
from enum import Enum
from typing import Optional, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_BURN_IN,
    DEFAULT_LAG,
    DEFAULT_LAMBDA1_RANGE,
    DEFAULT_LAMBDA2_RANGE,
)

# A ±1 vector of length p. Kept as a plain array; see ising.spin_vector.
SpinVector = np.ndarray

# Unordered node pairs (a, b) with 1 <= a < b <= p.
EdgeSet = frozenset


def _frozen_array(value, dtype) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_change_points(change_points: List[int], n: int) -> None:
    if any(b <= a for a, b in zip(change_points, change_points[1:])):
        raise ValueError(f"change_points must be strictly increasing, got {change_points}")
    if change_points and (change_points[0] < 2 or change_points[-1] > n):
        raise ValueError(f"change_points must lie in 2..{n}, got {change_points}")


# ── Enums ────────────────────────────────────────────────

class FusedNorm(str, Enum):
    group_l2 = "group_l2"
    l1 = "l1"


class StepRule(str, Enum):
    fixed = "fixed"
    backtracking = "backtracking"


class SearchStrategy(str, Enum):
    grid = "grid"
    random = "random"


class Criterion(str, Enum):
    aic = "aic"
    auc = "auc"


class Method(str, Enum):
    tvifl = "tvifl"
    tesla = "tesla"
    per_timestamp = "per_timestamp"

    @property
    def fused_norm(self) -> FusedNorm:
        """Tesla fuses coordinate-wise; the other methods fuse whole vectors."""
        return FusedNorm.l1 if self == Method.tesla else FusedNorm.group_l2


class MissingPolicy(str, Enum):
    drop = "drop"
    group_majority = "group-majority"


class EdgeRule(str, Enum):
    max = "max"
    min = "min"


class DimConvention(str, Enum):
    repeat_first = "repeat_first"  # β^(0) = β^(1)
    zero_start = "zero_start"      # β^(0) = 0


class F1Averaging(str, Enum):
    of_means = "of_means"
    mean_of_per_timestamp = "mean_of_per_timestamp"


class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ── Ising models ─────────────────────────────────────────

class WeightMatrix(_ArrayModel):
    p: int = Field(ge=2)
    w: np.ndarray

    @field_validator("w", mode="before")
    @classmethod
    def _as_array(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def _check(self):
        if self.w.shape != (self.p, self.p):
            raise ValueError(f"w must be {self.p}x{self.p}, got {self.w.shape}")
        if not np.all(np.isfinite(self.w)):
            raise ValueError("w has non-finite entries")
        if np.any(np.diag(self.w) != 0):
            raise ValueError("w must have a zero diagonal")
        if not np.array_equal(self.w, self.w.T):
            raise ValueError("w must be symmetric")
        return self

    @classmethod
    def zeros(cls, p: int) -> "WeightMatrix":
        return cls(p=p, w=np.zeros((p, p)))

    @classmethod
    def from_edges(cls, p: int, edges) -> "WeightMatrix":
        """Build from (a, b, weight) triples with 1-based nodes."""
        w = np.zeros((p, p))
        for a, b, weight in edges:
            if not (1 <= a <= p and 1 <= b <= p) or a == b:
                raise ValueError(f"invalid edge ({a}, {b}) for p={p}")
            w[a - 1, b - 1] = w[b - 1, a - 1] = float(weight)
        return cls(p=p, w=w)

    def edges(self) -> List[Tuple[int, int, float]]:
        rows, cols = np.nonzero(np.triu(self.w, k=1))
        return [(int(a) + 1, int(b) + 1, float(self.w[a, b])) for a, b in zip(rows, cols)]

    def edge_set(self) -> frozenset:
        return frozenset((a, b) for a, b, _ in self.edges())

    def neighborhood(self, a: int) -> np.ndarray:
        """ω_a: column a with coordinate a removed (0-based a)."""
        return np.delete(self.w[:, a], a)


class PiecewiseIsingModel(_ArrayModel):
    n: int = Field(ge=1)
    change_points: List[int] = []
    segments: List[WeightMatrix]

    @model_validator(mode="after")
    def _check(self):
        _check_change_points(self.change_points, self.n)
        if len(self.segments) != len(self.change_points) + 1:
            raise ValueError(
                f"{len(self.change_points)} change-points need "
                f"{len(self.change_points) + 1} segments, got {len(self.segments)}"
            )
        if len({s.p for s in self.segments}) != 1:
            raise ValueError("all segments must share p")
        return self

    @property
    def p(self) -> int:
        return self.segments[0].p

    @property
    def boundaries(self) -> List[int]:
        """T_0 = 1, T_1..T_D, T_{D+1} = n + 1."""
        return [1, *self.change_points, self.n + 1]

    def edge_sets(self) -> List[frozenset]:
        """True edge set at each timestamp 1..n."""
        out = []
        for j, segment in enumerate(self.segments):
            edges = segment.edge_set()
            out.extend([edges] * (self.boundaries[j + 1] - self.boundaries[j]))
        return out


class ModelDiagnostics(BaseModel):
    delta_min: int
    xi_min: float


# ── Data ─────────────────────────────────────────────────

class SpinDataset(_ArrayModel):
    n: int = Field(ge=1)
    p: int = Field(ge=2)
    blocks: List[np.ndarray]

    @field_validator("blocks", mode="before")
    @classmethod
    def _as_arrays(cls, v):
        return [_frozen_array(np.atleast_2d(np.asarray(b)), np.int8) for b in v]

    @model_validator(mode="after")
    def _check(self):
        if len(self.blocks) != self.n:
            raise ValueError(f"expected {self.n} blocks, got {len(self.blocks)}")
        for i, block in enumerate(self.blocks, start=1):
            if block.ndim != 2 or block.shape[1] != self.p or block.shape[0] < 1:
                raise ValueError(f"block {i} must have shape (n_i >= 1, {self.p}), got {block.shape}")
            if not np.all(np.abs(block) == 1):
                raise ValueError(f"block {i} has entries other than -1/+1")
        return self

    @property
    def counts(self) -> np.ndarray:
        return np.array([b.shape[0] for b in self.blocks])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


class ScenarioConfig(BaseModel):
    p: int = Field(default=20, ge=2)
    n: int = Field(default=100, ge=1)
    change_points: List[int] = [51, 81]
    degree: int = Field(default=2, ge=1)
    obs_per_timestamp: int = Field(default=8, ge=1)
    holdout_per_timestamp: int = Field(default=5, ge=0)
    burn_in: int = Field(default=DEFAULT_BURN_IN, ge=0)
    lag: int = Field(default=DEFAULT_LAG, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check(self):
        if self.degree >= self.p:
            raise ValueError(f"degree {self.degree} must be < p={self.p}")
        if (self.degree * self.p) % 2:
            raise ValueError(f"degree * p must be even, got {self.degree} * {self.p}")
        _check_change_points(self.change_points, self.n)
        return self


class Scenario(_ArrayModel):
    model: PiecewiseIsingModel
    train: SpinDataset
    holdout: Optional[SpinDataset] = None
    true_edges: List[frozenset]


# ── Solver ───────────────────────────────────────────────

class PenaltyConfig(BaseModel):
    lambda1: float = Field(ge=0, allow_inf_nan=False)
    lambda2: float = Field(ge=0, allow_inf_nan=False)
    fused_norm: FusedNorm = FusedNorm.group_l2


class SolverOptions(BaseModel):
    max_outer_iter: int = Field(default=10000, ge=1)
    tol_outer: float = Field(default=1e-9, gt=0)
    tol_inner: float = Field(default=1e-8, gt=0)
    tol_stationarity: float = Field(default=1e-4, gt=0)
    step_rule: StepRule = StepRule.fixed
    max_inner_iter: int = Field(default=2000, ge=1)
    certificate_directions: int = Field(default=64, ge=1)
    certificate_seed: int = 0


class NodeSolution(_ArrayModel):
    node: int = Field(ge=1)
    beta: np.ndarray
    objective: float
    iterations: int
    stationarity_violation: Optional[float] = None
    converged: bool = True
    inner_converged: bool = True

    @field_validator("beta", mode="before")
    @classmethod
    def _as_array(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def _check(self):
        if self.beta.ndim != 2:
            raise ValueError(f"beta must be 2-D, got shape {self.beta.shape}")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta has non-finite entries")
        return self

    @property
    def n(self) -> int:
        return self.beta.shape[1]


class EstimatedModel(_ArrayModel):
    n: int
    p: int
    change_points: List[int]
    theta: np.ndarray  # (segments, p, p); theta[j, a, b] = θ̂_ab^(j), zero diagonal
    edges: List[frozenset]
    node_change_points: dict[int, List[int]] = {}
    change_strengths: List[float] = []
    stationarity: List[Optional[float]] = []
    objectives: List[float] = []

    @field_validator("theta", mode="before")
    @classmethod
    def _as_array(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def _check(self):
        _check_change_points(self.change_points, self.n)
        segments = len(self.change_points) + 1
        if self.theta.shape != (segments, self.p, self.p):
            raise ValueError(f"theta must be ({segments}, {self.p}, {self.p}), got {self.theta.shape}")
        if len(self.edges) != segments:
            raise ValueError(f"expected {segments} edge sets, got {len(self.edges)}")
        return self

    @property
    def num_segments(self) -> int:
        return len(self.change_points) + 1

    def segment_of(self, i: int) -> int:
        """0-based segment index holding 1-based timestamp i."""
        return int(np.searchsorted(self.change_points, i, side="right"))

    def edge_sets(self) -> List[frozenset]:
        """Estimated edge set at each timestamp 1..n."""
        return [self.edges[self.segment_of(i)] for i in range(1, self.n + 1)]


# ── Selection & evaluation ───────────────────────────────

class SearchSpec(BaseModel):
    strategy: SearchStrategy = SearchStrategy.random
    lambda1_range: Tuple[float, float] = DEFAULT_LAMBDA1_RANGE
    lambda2_range: Tuple[float, float] = DEFAULT_LAMBDA2_RANGE
    num_points: int = Field(default=16, ge=1)
    grid_counts: Tuple[int, int] = (4, 4)
    criterion: Criterion = Criterion.auc
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        for name in ("lambda1_range", "lambda2_range"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi) or not math.isfinite(hi):
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi < inf, got {(lo, hi)}")
        if min(self.grid_counts) < 1:
            raise ValueError(f"grid_counts must be >= 1, got {self.grid_counts}")
        return self


class TraceEntry(BaseModel):
    lambda1: float
    lambda2: float
    criterion: float
    num_change_points: int


class SearchResult(_ArrayModel):
    lambda1: float
    lambda2: float
    criterion: Criterion
    value: float
    trace: List[TraceEntry]
    models: Optional[List[EstimatedModel]] = Field(default=None, exclude=True)


class EvaluationReport(BaseModel):
    h_score: float = Field(ge=0, le=1)
    precision: float = Field(ge=0, le=1)
    recall: float = Field(ge=0, le=1)
    f1: float = Field(ge=0, le=1)
    num_detected: int = Field(ge=0)


class ExperimentConfig(BaseModel):
    scenario: ScenarioConfig = ScenarioConfig()
    methods: List[Method] = Field(default=[Method.tvifl, Method.tesla], min_length=1)
    search: SearchSpec = SearchSpec()
    criteria: List[Criterion] = Field(default=[Criterion.auc], min_length=1)
    replicates: List[int] = Field(default=[0], min_length=1)
    output_dir: str = "results"
    solver: SolverOptions = SolverOptions()
    oracle_h_thresholds: List[float] = []
