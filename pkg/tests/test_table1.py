import pytest

from anharmonic.table1 import (
    CELLS,
    REFERENCE,
    REFERENCE_ENUM,
    compute_cell,
    decimals,
    diff_report,
    format_table,
    reproduce_table,
    rounded_match,
    row_order,
    within_last_digit,
)


def test_row_order():
    assert row_order(1) == 3 and row_order(50) == 101
    assert row_order(50, "literal") == 50
    with pytest.raises(ValueError):
        row_order(3, "other")


def test_digit_helpers():
    assert decimals("26.42476") == 5 and decimals("3") == 0
    assert rounded_match(0.5083706818, "0.508370682")
    assert not rounded_match(0.5083783965, "0.508378396")
    assert within_last_digit(0.5083783965, "0.508378396")
    assert not within_last_digit(0.50837, "0.508378396")


def test_reference_shape():
    assert len(REFERENCE_ENUM) == len(CELLS) == 6
    assert all(len(v) == 6 for v in REFERENCE.values())


@pytest.fixture(scope="module")
def low_rows():
    return reproduce_table(rows=[1, 3], jobs=2)


def test_low_rows_agree_with_printed(low_rows):
    lines = diff_report(low_rows)
    assert len(lines) == 6 * 3
    for label, cell, value, printed, rounded, within, rel in lines:
        assert within, (label, cell, value, printed)
        if label == "E_num":
            assert rounded


def test_parallel_matches_serial(low_rows):
    serial = reproduce_table(rows=[1, 3], cells=CELLS[:2], jobs=1)
    for a, b in zip(serial, low_rows[:2]):
        assert a.sums == b.sums and a.E_num == b.E_num


def test_format_table(low_rows):
    text = format_table(low_rows, rows=[1, 3])
    lines = text.splitlines()
    assert lines[-1].split()[0] == "E_num"
    assert "0.508693705" in lines[1]
    assert "26.42476" in lines[-1]


def test_cell_errors_do_not_abort():
    # K = 1 has no stationary point; the cell still returns with the error recorded
    res = compute_cell(0, "0.01", rows=[1], row_orders="literal")
    assert 1 in res.errors and res.E_num is not None
