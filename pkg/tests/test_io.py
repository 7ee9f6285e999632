import csv
import json
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tempomode.io import atomic_write_text, csv_text, dumps, write_csv, write_json


class TestJSON:
    @given(x=st.floats(allow_nan=False, allow_infinity=False))
    def test_floats_round_trip(self, x):
        assert json.loads(dumps({"x": x}))["x"] == x

    def test_seventeen_digits(self):
        text = dumps([0.1])
        assert "0.10000000000000001" in text

    def test_integral_float_keeps_point(self):
        assert json.loads(dumps(2.0)) == 2.0 and "2.0" in dumps(2.0)

    def test_non_finite_become_null(self):
        assert json.loads(dumps([float("nan"), float("inf")])) == [None, None]

    def test_numpy_and_complex(self):
        doc = json.loads(dumps({"a": np.arange(3), "b": np.float32(0.5), "c": 1 + 2j, "d": np.bool_(True)}))
        assert doc == {"a": [0, 1, 2], "b": 0.5, "c": {"re": 1.0, "im": 2.0}, "d": True}

    def test_deterministic_key_order(self):
        assert dumps({"b": 1, "a": 2}) == dumps({"b": 1, "a": 2})
        assert list(json.loads(dumps({"b": 1, "a": 2}))) == ["b", "a"]

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            dumps(object())


class TestCSV:
    def test_round_trip(self):
        x = np.array([0.1, 1 / 3, -2.5e-17])
        text = csv_text(["x", "label"], [x, ["a", "b,c", "d"]])
        rows = list(csv.reader(text.splitlines()))
        assert rows[0] == ["x", "label"]
        assert [float(r[0]) for r in rows[1:]] == list(x)
        assert rows[2][1] == "b,c"

    def test_write(self, tmp_path):
        write_csv(tmp_path / "sub" / "t.csv", ["n"], [[1, 2]])
        assert (tmp_path / "sub" / "t.csv").read_text() == "n\n1\n2\n"


class TestAtomicWrite:
    def test_replaces_and_leaves_no_temp(self, tmp_path):
        p = tmp_path / "out.json"
        write_json(p, {"v": 1})
        write_json(p, {"v": 2})
        assert json.loads(p.read_text()) == {"v": 2}
        assert os.listdir(tmp_path) == ["out.json"]

    def test_failure_keeps_previous_content(self, tmp_path, monkeypatch):
        p = tmp_path / "out.txt"
        atomic_write_text(p, "old")

        def boom(src, dst):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            atomic_write_text(p, "new")
        assert p.read_text() == "old"
        assert os.listdir(tmp_path) == ["out.txt"]
