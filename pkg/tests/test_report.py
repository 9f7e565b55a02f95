import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freesub.ncalg.scalar import Scalar
from freesub.report import EmitError, dumps_csv, dumps_json, emit_report, to_jsonable, write_text


def test_to_jsonable_exact_and_complex():
    assert to_jsonable(Fraction(-3, 4)) == "-3/4"
    assert to_jsonable(Scalar(Fraction(1, 2), Fraction(-1, 3))) == ["1/2", "-1/3"]
    assert to_jsonable(1 - 2j) == [1.0, -2.0]
    assert to_jsonable(np.complex128(0.5j)) == [0.0, 0.5]
    assert to_jsonable(np.arange(3)) == [0, 1, 2]
    assert to_jsonable(np.bool_(True)) is True


def test_non_finite_floats_become_strings():
    assert to_jsonable([math.nan, math.inf, -math.inf]) == ["nan", "inf", "-inf"]
    json.loads(dumps_json({"x": math.nan}))


def test_unknown_type_rejected():
    with pytest.raises(TypeError):
        to_jsonable(object())


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert json.loads(dumps_json({"x": x}))["x"] == x
    row = dumps_csv(["x"], [{"x": x}]).splitlines()[1]
    assert float(row) == x


def test_csv_columns_and_cells():
    text = dumps_csv(["a", "b", "c", "d"], [{"a": 0.1, "b": True, "c": [1, 2], "d": None}])
    assert text == 'a,b,c,d\n0.1,true,"[1,2]",\n'


def test_json_key_order_is_preserved():
    assert list(json.loads(dumps_json({"z": 1, "a": 2}))) == ["z", "a"]


def test_atomic_write(tmp_path):
    p = write_text(tmp_path / "sub" / "out.json", "hello\n")
    assert p.read_text() == "hello\n"
    assert not (tmp_path / "sub" / "out.json.tmp").exists()


def test_write_failure_raises_emit_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(EmitError):
        write_text(blocker / "out.json", "data")


def test_emit_report_formats(tmp_path):
    emit_report({"a": 1}, "json", tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text()) == {"a": 1}
    emit_report({}, "csv", tmp_path / "r.csv", ["a"], [{"a": 1}])
    assert (tmp_path / "r.csv").read_text() == "a\n1\n"
    with pytest.raises(ValueError):
        emit_report({}, "csv", tmp_path / "r.csv")
    with pytest.raises(ValueError):
        emit_report({}, "xml", tmp_path / "r.xml")
