import json

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import dims, seeds, tensor_from_seed
from kahlerlab import tensor_core as tc
from kahlerlab.errors import LoadError
from kahlerlab.models import example_1_2, fubini_study
from kahlerlab.serialization import (
    deserialize,
    deserialize_with_report,
    from_dict,
    serialize,
    to_dict,
)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, n=dims)
def test_round_trip_is_bitwise(tmp_path_factory, seed, n):
    T = tensor_from_seed(seed, n)
    path = tmp_path_factory.mktemp("rt") / "t.json"
    serialize(T, path)
    np.testing.assert_array_equal(deserialize(path).entries, T.entries)


def test_file_layout(tmp_path):
    path = serialize(fubini_study(2, 4), tmp_path / "fs.json")
    data = json.loads(path.read_text())
    assert data["schema"] == "kct-1" and data["n"] == 2
    assert [1, 1, 1, 1, 4.0, 0.0] in data["entries"]
    assert all(min(r[:4]) >= 1 for r in data["entries"])


def test_generating_set_is_completed():
    rows = [[1, 1, 1, 1, 4.0, 0.0], [2, 2, 2, 2, 4.0, 0.0], [1, 1, 2, 2, 2.0, 0.0], [1, 2, 2, 1, 2.0, 0.0]]
    T, rep = from_dict({"schema": "kct-1", "n": 2, "entries": rows})
    np.testing.assert_array_equal(T.entries, fubini_study(2, 4).entries)
    assert rep.given == 4
    assert (2, 2, 1, 1) in rep.completed and (2, 1, 1, 2) in rep.completed
    assert (1, 1, 1, 1) not in rep.completed


def test_complex_entry_completion_conjugates():
    T, rep = from_dict({"schema": "kct-1", "n": 2, "entries": [[1, 2, 1, 1, 0.5, 0.25]]})
    assert T.entries[1, 0, 0, 0] == 0.5 - 0.25j
    assert T.entries[0, 0, 0, 1] == 0.5 + 0.25j
    assert sorted(rep.completed) == [(1, 1, 1, 2), (1, 1, 2, 1), (2, 1, 1, 1)]
    assert tc.validate(T) == []


@pytest.mark.parametrize("rows, match", [
    ([[1, 1, 2, 2, 1.0, 0.0], [2, 2, 1, 1, 2.0, 0.0]], "symmetry"),
    ([[1, 2, 1, 1, 1.0, 1.0], [2, 1, 1, 1, 1.0, 1.0]], "symmetry"),
    ([[1, 1, 1, 1, 1.0, 0.0], [1, 1, 1, 1, 2.0, 0.0]], "duplicate"),
    ([[1, 1, 1, 3, 1.0, 0.0]], "outside"),
    ([[1, 1, 1, 1, 1.0]], "must be"),
    ([[1, 1, 1, 1, "x", 0.0]], "numeric"),
])
def test_inconsistent_files_raise(rows, match):
    with pytest.raises(LoadError, match=match):
        from_dict({"schema": "kct-1", "n": 2, "entries": rows})


def test_small_disagreement_is_tolerated():
    rows = [[1, 1, 2, 2, 1.0, 0.0], [2, 2, 1, 1, 1.0 + 1e-10, 0.0]]
    T, _ = from_dict({"schema": "kct-1", "n": 2, "entries": rows})
    assert T.entries[1, 1, 0, 0] == 1.0 + 1e-10


def test_bad_headers(tmp_path):
    for data in ({"schema": "other", "n": 2, "entries": []}, {"schema": "kct-1", "n": 0, "entries": []},
                 {"schema": "kct-1", "n": 2, "entries": {}}, []):
        with pytest.raises(LoadError):
            from_dict(data)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(LoadError):
        deserialize(bad)
    with pytest.raises(LoadError):
        deserialize(tmp_path / "missing.json")


def test_report_from_file(tmp_path):
    path = serialize(example_1_2(2), tmp_path / "ex.json")
    T, rep = deserialize_with_report(path)
    assert rep.given == len(to_dict(example_1_2(2))["entries"])
    assert rep.completed == []
