import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randnewton import serialize


class TestFormatFloat:
    @pytest.mark.parametrize(
        "value,text",
        [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (np.pi, "3.1415926535897931"),
        ],
    )
    def test_known_renderings(self, value, text):
        assert serialize.format_float(value) == text

    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    @settings(max_examples=200, deadline=None)
    def test_round_trips_exactly(self, x):
        assert float(serialize.format_float(x)) == x


class TestDumpsJson:
    def test_scalar_kinds(self):
        doc = {"a": 1, "b": 0.5, "c": True, "d": None, "e": "text"}
        got = serialize.dumps_json(doc)
        assert '"a": 1' in got
        assert '"b": 0.5' in got
        assert '"c": true' in got
        assert '"d": null' in got
        assert got.endswith("\n")

    def test_nan_and_inf_become_strings(self):
        got = serialize.dumps_json({"x": float("nan"), "y": float("inf"), "z": float("-inf")})
        assert '"x": "nan"' in got
        assert '"y": "inf"' in got
        assert '"z": "-inf"' in got

    def test_simple_list_inline(self):
        got = serialize.dumps_json({"v": [1, 2, 3]})
        assert '"v": [1, 2, 3]' in got

    def test_insertion_order_preserved(self):
        got = serialize.dumps_json({"zebra": 1, "alpha": 2})
        assert got.index("zebra") < got.index("alpha")

    def test_numpy_values_accepted(self):
        got = serialize.dumps_json(
            {"i": np.int64(3), "f": np.float64(0.25), "arr": np.array([1.0, 2.0])}
        )
        assert '"i": 3' in got
        assert '"f": 0.25' in got
        assert '"arr": [1, 2]' in got

    def test_full_precision_floats(self):
        x = 0.1 + 0.2
        got = serialize.dumps_json({"x": x})
        assert serialize.format_float(x) in got

    def test_unserializable_rejected(self):
        with pytest.raises(TypeError):
            serialize.dumps_json({"bad": object()})

    def test_deterministic(self):
        doc = {"nested": {"a": [1.5, 2.5], "b": {"c": "d"}}, "top": 0.1}
        assert serialize.dumps_json(doc) == serialize.dumps_json(doc)


class TestWriteCsv:
    def test_floats_get_full_precision(self, tmp_path):
        path = tmp_path / "t.csv"
        serialize.write_csv(path, ["x", "name"], [[np.pi, "row"]])
        text = path.read_text()
        assert text == "x,name\n3.1415926535897931,row\n"

    def test_ints_stay_ints(self, tmp_path):
        path = tmp_path / "t.csv"
        serialize.write_csv(path, ["n"], [[7]])
        assert path.read_text().splitlines()[1] == "7"

    def test_rerun_byte_identical(self, tmp_path):
        rows = [[0.1, 1], [0.2, 2]]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        serialize.write_csv(p1, ["x", "k"], rows)
        serialize.write_csv(p2, ["x", "k"], rows)
        assert p1.read_bytes() == p2.read_bytes()
