"""
Synthetic piece-wise constant Ising models and Gibbs-sampled datasets.

Every random draw goes through a numpy Generator. A scenario derives one
independent stream per segment from (seed, segment index), so the output
does not depend on the order segments are generated in.
"""

import logging
from collections import defaultdict

import numpy as np
from scipy.special import expit

from .config import DEFAULT_BURN_IN, DEFAULT_LAG
from .errors import InvalidInputError
from .models import PiecewiseIsingModel, Scenario, ScenarioConfig, SpinDataset, WeightMatrix

logger = logging.getLogger(__name__)

WEIGHT_RANGE = (0.5, 1.0)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def segment_rng(seed: int, segment: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, segment]))


# ── Graphs and weights ───────────────────────────────────

def random_regular_graph(p: int, d: int, seed=None) -> np.ndarray:
    """
    Random d-regular graph on p nodes as a 0/1 adjacency matrix.

    Stubs are shuffled and paired. Pairs that would form a self-loop or a
    repeated edge return their stubs to the pool, which is shuffled and
    paired again. An attempt restarts from an empty graph when no leftover
    pair can form a new edge.
    """
    if (p * d) % 2:
        raise InvalidInputError(f"no {d}-regular graph on {p} nodes: d * p must be even")
    if not 0 < d < p:
        raise InvalidInputError(f"degree must satisfy 0 < d < p, got d={d}, p={p}")
    rng = _rng(seed)

    def _suitable(edges, potential_edges) -> bool:
        if not potential_edges:
            return True
        for s1 in potential_edges:
            for s2 in potential_edges:
                if s1 == s2:
                    break
                if s1 > s2:
                    s1, s2 = s2, s1
                if (s1, s2) not in edges:
                    return True
        return False

    def _try_creation():
        edges = set()
        stubs = list(range(p)) * d
        while stubs:
            potential_edges = defaultdict(int)
            rng.shuffle(stubs)
            stubiter = iter(stubs)
            for s1, s2 in zip(stubiter, stubiter):
                if s1 > s2:
                    s1, s2 = s2, s1
                if s1 != s2 and (s1, s2) not in edges:
                    edges.add((s1, s2))
                else:
                    potential_edges[s1] += 1
                    potential_edges[s2] += 1
            if not _suitable(edges, potential_edges):
                return None
            stubs = [node for node, count in potential_edges.items() for _ in range(count)]
        return edges

    edges = _try_creation()
    attempts = 1
    while edges is None:
        edges = _try_creation()
        attempts += 1
    logger.debug("regular graph p=%d d=%d after %d attempt(s)", p, d, attempts)

    adjacency = np.zeros((p, p), dtype=np.int8)
    for a, b in edges:
        adjacency[a, b] = adjacency[b, a] = 1
    return adjacency


def random_weights(adjacency: np.ndarray, seed=None) -> WeightMatrix:
    """Weights uniform on [-1, -0.5] ∪ [0.5, 1] on the edges of adjacency."""
    rng = _rng(seed)
    p = adjacency.shape[0]
    rows, cols = np.nonzero(np.triu(adjacency, k=1))
    magnitude = rng.uniform(*WEIGHT_RANGE, size=rows.size)
    sign = rng.choice((-1.0, 1.0), size=rows.size)
    w = np.zeros((p, p))
    w[rows, cols] = magnitude * sign
    return WeightMatrix(p=p, w=w + w.T)


# ── Gibbs sampling ───────────────────────────────────────

def gibbs_sample(
    model: WeightMatrix,
    count: int,
    burn_in: int = DEFAULT_BURN_IN,
    lag: int = DEFAULT_LAG,
    seed=None,
    chains: int = 1,
) -> np.ndarray:
    """
    Draw count states with single-site Gibbs chains.

    One sweep resamples nodes 0..p-1 in order. The first burn_in sweeps are
    discarded, then every chain emits its state after each lag sweeps.
    Independent chains advance together as rows of one array, so chains=C
    needs about count / C emission rounds. Returns an int8 array of shape
    (count, p) filled round by round.
    """
    if count < 1 or lag < 1 or burn_in < 0 or chains < 1:
        raise InvalidInputError(
            f"need count >= 1, lag >= 1, burn_in >= 0, chains >= 1; got {count}, {lag}, {burn_in}, {chains}"
        )
    rng = _rng(seed)
    w = model.w
    p = model.p
    x = rng.choice((-1.0, 1.0), size=(chains, p))

    def sweep():
        u = rng.random((chains, p))
        for a in range(p):
            x[:, a] = np.where(u[:, a] < expit(2.0 * (x @ w[a])), 1.0, -1.0)

    for _ in range(burn_in):
        sweep()
    rounds = -(-count // chains)
    out = np.empty((rounds * chains, p), dtype=np.int8)
    for k in range(rounds):
        for _ in range(lag):
            sweep()
        out[k * chains : (k + 1) * chains] = x
    return out[:count]


# ── Scenarios ────────────────────────────────────────────

def generate_scenario(config: ScenarioConfig) -> Scenario:
    """Random piece-wise constant model plus train/holdout datasets."""
    boundaries = [1, *config.change_points, config.n + 1]
    per_timestamp = config.obs_per_timestamp + config.holdout_per_timestamp

    segments = []
    train_blocks = []
    holdout_blocks = []
    for j, (start, stop) in enumerate(zip(boundaries, boundaries[1:])):
        rng = segment_rng(config.seed, j)
        weights = random_weights(random_regular_graph(config.p, config.degree, rng), rng)
        length = stop - start
        draws = gibbs_sample(weights, length * per_timestamp, config.burn_in, config.lag, rng)
        draws = draws.reshape(length, per_timestamp, config.p)
        segments.append(weights)
        train_blocks.extend(draws[:, : config.obs_per_timestamp])
        holdout_blocks.extend(draws[:, config.obs_per_timestamp :])
        logger.info("segment %d: timestamps %d..%d, %d edges", j + 1, start, stop - 1, len(weights.edges()))

    model = PiecewiseIsingModel(n=config.n, change_points=config.change_points, segments=segments)
    train = SpinDataset(n=config.n, p=config.p, blocks=train_blocks)
    holdout = None
    if config.holdout_per_timestamp:
        holdout = SpinDataset(n=config.n, p=config.p, blocks=holdout_blocks)
    return Scenario(model=model, train=train, holdout=holdout, true_edges=model.edge_sets())
