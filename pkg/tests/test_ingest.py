import numpy as np
import pandas as pd
import pytest

from tvising.errors import DataIOError, InvalidInputError
from tvising.ingest import cumulative_curves, impute_group_majority, ingest, parse_spins, read_groups, to_dataset
from tvising.models import MissingPolicy

NAN = np.nan


@pytest.fixture
def votes_csv(tmp_path):
    path = tmp_path / "votes.csv"
    path.write_text("a,b,c,d\n1,-1,,1\n-1,-1,1,1\n1,,1,-1\n")
    return path


@pytest.fixture
def groups_csv(tmp_path):
    path = tmp_path / "groups.csv"
    path.write_text("node,group\na,left\nb,left\nc,right\nd,right\n")
    return path


def test_group_majority_imputation(votes_csv, groups_csv):
    result = ingest(votes_csv, MissingPolicy.group_majority, groups_csv)
    assert result.columns == ["a", "b", "c", "d"]
    assert (result.imputed, result.dropped_rows) == (2, 0)
    assert result.dataset.n == 3
    rows = np.vstack(result.dataset.blocks).tolist()
    assert rows == [[1, -1, 1, 1], [-1, -1, 1, 1], [1, 1, 1, -1]]


def test_drop_policy(votes_csv):
    result = ingest(votes_csv, MissingPolicy.drop)
    assert (result.dropped_rows, result.imputed) == (2, 0)
    assert np.vstack(result.dataset.blocks).tolist() == [[-1, -1, 1, 1]]


def test_group_majority_needs_groups(votes_csv, tmp_path):
    with pytest.raises(InvalidInputError, match="groups file"):
        ingest(votes_csv, MissingPolicy.group_majority)
    with pytest.raises(DataIOError):
        ingest(votes_csv, MissingPolicy.group_majority, tmp_path / "absent.csv")


def test_impute_fallbacks():
    values = np.array([
        [1.0, -1.0, NAN, NAN],   # right group empty, row tied: +1
        [NAN, -1.0, -1.0, 1.0],  # left group says -1
        [1.0, -1.0, NAN, -1.0],  # right group says -1
    ])
    out = impute_group_majority(values, ["left", "left", "right", "right"])
    assert out.tolist() == [[1, -1, 1, 1], [-1, -1, -1, 1], [1, -1, -1, -1]]

    tied_group = np.array([[1.0, -1.0, NAN, -1.0]])
    out = impute_group_majority(tied_group, ["g", "g", "g", "h"])
    assert out.tolist() == [[1, -1, -1, -1]]


def test_rejects_zero_with_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,-1\n-1,0\n")
    with pytest.raises(InvalidInputError, match="row 2, column 'b'"):
        ingest(path)


def test_zero_one_input(tmp_path):
    path = tmp_path / "binary.csv"
    path.write_text("a,b\n1,0\n0,0\n")
    result = ingest(path, zero_one=True)
    assert np.vstack(result.dataset.blocks).tolist() == [[1, -1], [-1, -1]]
    with pytest.raises(InvalidInputError):
        ingest(path)


def test_parse_spins_blanks_and_signs():
    frame = pd.DataFrame({"a": ["+1", " -1 ", ""], "b": ["1", "", "-1"]})
    values = parse_spins(frame)
    assert values[0].tolist() == [1.0, 1.0]
    assert values[1, 0] == -1.0
    assert np.isnan(values[1, 1]) and np.isnan(values[2, 0])


def test_read_groups_validation(tmp_path):
    path = tmp_path / "groups.csv"
    path.write_text("name,team\na,x\n")
    with pytest.raises(InvalidInputError, match="node,group"):
        read_groups(path, ["a"])
    path.write_text("node,group\na,x\n")
    with pytest.raises(InvalidInputError, match="no group"):
        read_groups(path, ["a", "b"])


def test_binning():
    values = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1], [1, 1]], dtype=np.int8)
    dataset = to_dataset(values, bin_size=2)
    assert dataset.n == 3
    assert dataset.counts.tolist() == [2, 2, 1]
    with pytest.raises(InvalidInputError):
        to_dataset(values, bin_size=0)
    with pytest.raises(InvalidInputError):
        to_dataset(values[:0])


def test_everything_dropped(tmp_path):
    path = tmp_path / "sparse.csv"
    path.write_text("a,b\n1,\n,-1\n")
    with pytest.raises(InvalidInputError, match="no observations"):
        ingest(path)


def test_cumulative_curves():
    dataset = to_dataset(np.array([[1, -1], [1, -1], [-1, -1]], dtype=np.int8), bin_size=2)
    frame = cumulative_curves(dataset, ["alice", "bob"])
    assert list(frame.columns) == ["observation", "timestamp", "alice", "bob"]
    assert frame.values.tolist() == [[1, 1, 1, -1], [2, 1, 2, -2], [3, 2, 1, -3]]
