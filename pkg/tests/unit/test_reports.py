"""Unit tests for canonical JSON and output bundles."""

import json
import math

import numpy as np
import pandas as pd
import pytest

from src.orchestrator.reports import OutputBundle, dumps, frame_to_csv


class TestDumps:
    def test_float_formatting(self):
        assert dumps(0.1) == "0.1\n"
        assert dumps(2.0) == "2.0\n"
        assert dumps(1e20) == "1e+20\n"
        assert dumps(np.float64(1 / 3)) == "0.3333333333333333\n"
        assert dumps(math.nan) == "null\n"
        assert dumps(-math.inf) == "null\n"

    def test_scalars(self):
        assert dumps(True) == "true\n"
        assert dumps(None) == "null\n"
        assert dumps(np.int64(3)) == "3\n"
        assert dumps('a"b\\c\n') == '"a\\"b\\\\c\\n"\n'
        assert dumps("Γ") == '"Γ"\n'

    def test_layout(self):
        text = dumps({"b": [1, 2.5], "a": {"x": []}, "rows": [[1.0]]})
        assert text == (
            "{\n"
            '  "b": [\n'
            "    1,\n"
            "    2.5\n"
            "  ],\n"
            '  "a": {\n'
            '    "x": []\n'
            "  },\n"
            '  "rows": [\n'
            "    [\n"
            "      1.0\n"
            "    ]\n"
            "  ]\n"
            "}\n"
        )

    def test_nested_numpy_values(self):
        data = {"m": np.array([[1.0, np.inf]]), "k": (np.int32(2), np.bool_(True))}
        assert json.loads(dumps(data)) == {"m": [[1.0, None]], "k": [2, True]}

    def test_parses_back_exactly(self):
        values = np.random.default_rng(0).standard_normal(20)
        data = {"values": values, "flag": np.bool_(False)}
        parsed = json.loads(dumps(data))
        assert parsed["values"] == values.tolist()
        assert parsed["flag"] is False

    def test_rejects_unknown_types(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})


class TestFrameToCsv:
    def test_full_precision(self):
        text = frame_to_csv(pd.DataFrame({"a": [0.1], "b": [1]}))
        assert text == "a,b\n0.10000000000000001,1\n"


class TestOutputBundle:
    def test_nothing_written_before_commit(self, tmp_path):
        bundle = OutputBundle(tmp_path / "out")
        bundle.add_json("report.json", {"x": 1})
        assert not (tmp_path / "out").exists()

    def test_commit_writes_everything(self, tmp_path):
        bundle = OutputBundle(tmp_path / "out")
        bundle.add_json("report.json", {"x": 1})
        bundle.add_text("table.txt", "hello\n")
        bundle.add_frame("data.csv", pd.DataFrame({"a": [1.5]}))
        bundle.add_json(tmp_path / "elsewhere" / "model.json", {"d": 1})
        written = bundle.commit()
        assert len(written) == 4
        assert json.loads((tmp_path / "out" / "report.json").read_text()) == {"x": 1}
        assert (tmp_path / "out" / "table.txt").read_text() == "hello\n"
        assert (tmp_path / "elsewhere" / "model.json").is_file()
        assert not [p for p in (tmp_path / "out").iterdir() if p.name.startswith(".")]
