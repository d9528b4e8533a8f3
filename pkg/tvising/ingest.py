"""
Real-data ingestion.

Input is a CSV with one column per node (header = node names) and one row
per observation in time order; entries are -1, +1 or blank. Blanks are
either dropped with their row or imputed with the majority value of the
node's group in that row.
"""

import logging
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd

from .errors import InvalidInputError
from .models import MissingPolicy, SpinDataset
from .storage import read_csv

logger = logging.getLogger(__name__)


class IngestResult(NamedTuple):
    dataset: SpinDataset
    columns: List[str]
    dropped_rows: int
    imputed: int


def parse_spins(frame: pd.DataFrame, zero_one: bool = False) -> np.ndarray:
    """
    Float matrix with ±1 and NaN for blanks. With zero_one, 0/1 input is
    mapped to -1/+1; otherwise any value but ±1 is rejected with its location.
    """
    text = frame.astype(str).apply(lambda col: col.str.strip())
    blank = text.eq("") | frame.isna()
    values = text.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    allowed = (0.0, 1.0) if zero_one else (-1.0, 1.0)
    bad = ~blank.to_numpy() & ~np.isin(values, allowed)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise InvalidInputError(
            f"row {r + 1}, column {frame.columns[c]!r}: value {frame.iat[r, c]!r} is not one of "
            f"{'0/1' if zero_one else '-1/+1'}"
        )
    values[blank.to_numpy()] = np.nan
    if zero_one:
        values = 2.0 * values - 1.0
    return values


def read_groups(path, columns: List[str]) -> List[str]:
    """Group label per column from a two-column CSV: node, group."""
    frame = read_csv(path, dtype=str)
    if list(frame.columns[:2]) != ["node", "group"]:
        raise InvalidInputError(f"{path}: expected header 'node,group', got {list(frame.columns)}")
    labels = dict(zip(frame["node"].str.strip(), frame["group"].str.strip()))
    missing = [c for c in columns if c not in labels]
    if missing:
        raise InvalidInputError(f"{path}: no group for columns {missing}")
    return [labels[c] for c in columns]


def _majority(values: np.ndarray) -> np.ndarray:
    """Sign of the row sums ignoring NaN; 0 where tied or empty."""
    return np.sign(np.nansum(values, axis=1))


def impute_group_majority(values: np.ndarray, groups: List[str]) -> np.ndarray:
    """
    Fill each blank with the majority of its group in the same row. A tied
    or empty group falls back to the whole-row majority, then to +1.
    """
    out = values.copy()
    groups = np.asarray(groups)
    row_vote = _majority(values)
    for label in np.unique(groups):
        cols = np.flatnonzero(groups == label)
        vote = _majority(values[:, cols])
        vote = np.where(vote == 0, row_vote, vote)
        vote = np.where(vote == 0, 1.0, vote)
        block = out[:, cols]
        rows, where = np.nonzero(np.isnan(block))
        block[rows, where] = vote[rows]
        out[:, cols] = block
    return out


def to_dataset(values: np.ndarray, bin_size: int = 1) -> SpinDataset:
    """Consecutive runs of bin_size rows become one timestamp; the last bin may be short."""
    if bin_size < 1:
        raise InvalidInputError(f"bin size must be >= 1, got {bin_size}")
    if values.shape[0] == 0:
        raise InvalidInputError("no observations left")
    blocks = [values[k : k + bin_size] for k in range(0, values.shape[0], bin_size)]
    return SpinDataset(n=len(blocks), p=values.shape[1], blocks=blocks)


def ingest(
    path,
    policy: MissingPolicy = MissingPolicy.drop,
    groups_path=None,
    bin_size: int = 1,
    zero_one: bool = False,
) -> IngestResult:
    frame = read_csv(path, dtype=str, keep_default_na=False)
    columns = [str(c).strip() for c in frame.columns]
    if len(columns) < 2:
        raise InvalidInputError(f"{path}: need at least two node columns")
    values = parse_spins(frame, zero_one)
    missing = np.isnan(values)

    dropped = imputed = 0
    if policy == MissingPolicy.drop:
        keep = ~missing.any(axis=1)
        dropped = int((~keep).sum())
        values = values[keep]
    else:
        if groups_path is None:
            raise InvalidInputError("the group-majority policy needs a groups file")
        values = impute_group_majority(values, read_groups(groups_path, columns))
        imputed = int(missing.sum())

    logger.info("ingested %s: %d rows kept, %d dropped, %d entries imputed", path, values.shape[0], dropped, imputed)
    return IngestResult(to_dataset(values.astype(np.int8), bin_size), columns, dropped, imputed)


def cumulative_curves(dataset: SpinDataset, columns: Optional[List[str]] = None) -> pd.DataFrame:
    """Running sum of each node's values in observation order."""
    stacked = np.vstack(dataset.blocks).astype(int)
    names = columns or [f"v{k}" for k in range(1, dataset.p + 1)]
    frame = pd.DataFrame(np.cumsum(stacked, axis=0), columns=names)
    frame.insert(0, "timestamp", np.repeat(np.arange(1, dataset.n + 1), dataset.counts))
    frame.insert(0, "observation", np.arange(1, stacked.shape[0] + 1))
    return frame
