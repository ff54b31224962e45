import math

import pytest

from rfsense.tables import Table, format_value, merge_columns, read_csv, to_csv


def test_format_is_17_significant_digits():
    assert format_value(0.1) == "1.0000000000000001e-01"
    assert format_value(1.0) == "1.0000000000000000e+00"
    assert format_value(math.nan) == "nan"
    assert format_value(-math.inf) == "-inf"
    assert float(format_value(1 / 3)) == 1 / 3


def test_csv_layout_and_round_trip():
    t = Table(["a", "b"], [(1.0, 2.5), (math.pi, -1e-300)], comments=["hello", "two\nlines"])
    text = to_csv(t)
    lines = text.split("\n")
    assert lines[:3] == ["# hello", "# two", "# lines"]
    assert lines[3] == "a,b"
    assert text.endswith("\n") and "\r" not in text
    back = read_csv(text)
    assert back.columns == ["a", "b"]
    assert back.rows == t.rows


def test_row_width_checked():
    with pytest.raises(ValueError):
        to_csv(Table(["a"], [(1.0, 2.0)]))


def test_merge_columns():
    a = Table(["x", "y"], [(1.0, 2.0), (2.0, 3.0)])
    b = Table(["x", "y"], [(1.0, 5.0), (2.0, 6.0)])
    m = merge_columns("x", [("A", a), ("B", b)], ["y"])
    assert m.columns == ["x", "y_A", "y_B"]
    assert m.rows == [(1.0, 2.0, 5.0), (2.0, 3.0, 6.0)]
