from math import comb

import pytest

from src.algebra.fpmodules import FPModule
from src.algebra.groebner import Ideal
from src.models.schema import INFINITE
from src.sampling.hilbert_sampler import (
    SampleTable,
    as_range,
    diagonal_frame,
    sample_diagonal,
    sample_grid,
    sample_mixed,
    sample_power_grid,
)


def test_as_range_bounds():
    assert as_range([2, 5]) == [2, 3, 4, 5]
    assert as_range(range(0, 3)) == [0, 1, 2]
    with pytest.raises(ValueError):
        as_range([1, 2, 3])
    with pytest.raises(ValueError):
        as_range([4, 2])
    with pytest.raises(ValueError):
        as_range([-1, 2])


def test_min_structure_grid(free, maximal):
    table = sample_grid(0, free, free, maximal, maximal, ((1, 4), (1, 4)))
    for n, m, v in table.cells():
        assert v == comb(min(n, m) + 1, 2)
    lines = table.to_csv().splitlines()
    assert lines[0] == "n\\m,1,2,3,4"
    assert lines[1] == "1,1,1,1,1"
    assert lines[2] == "2,1,3,3,3"


def test_csv_written_to_path(tmp_path, free, maximal):
    table = sample_grid(0, free, free, maximal, maximal, ((1, 2), (1, 3)))
    path = tmp_path / "table.csv"
    table.to_csv(path)
    assert path.read_text() == "n\\m,1,2,3\n1,1,1,1\n2,1,3,3\n"


def test_tor1_of_power_quotients(free, maximal):
    table = sample_grid(1, free, free, maximal, maximal, ((1, 3), (1, 3)))
    for n, m, v in table.cells():
        assert v == comb(n + m + 1, 2) - comb(max(n, m) + 1, 2)


def test_parallel_matches_sequential(free, maximal):
    ranges = ((1, 3), (1, 3))
    sequential = sample_grid(1, free, free, maximal, maximal, ranges)
    parallel = sample_grid(1, free, free, maximal, maximal, ranges, workers=2)
    assert sequential.to_dict() == parallel.to_dict()
    assert sample_diagonal(0, free, free, maximal, [1, 4], workers=3) == sample_diagonal(0, free, free, maximal, [1, 4])


def test_mixed_table(free, maximal):
    table = sample_mixed(0, free, free, maximal, maximal, ((0, 2), (1, 3)))
    assert table.kind == "mixed"
    for n, m, v in table.cells():
        # I^n / I^(n+m) for I the maximal ideal
        assert v == comb(n + m + 1, 2) - comb(n + 1, 2)
    assert [table.value(0, m) for m in (1, 2, 3)] == [1, 3, 6]


def test_power_table(line_x, line_y, maximal):
    table = sample_power_grid(1, line_x, line_y, maximal, maximal, ((1, 3), (1, 3)))
    assert table.kind == "power"
    assert all(v == 1 for _, _, v in table.cells())


def test_diagonal(free, maximal):
    values = sample_diagonal(0, free, free, maximal, [1, 5])
    assert values == [comb(n + 1, 2) for n in range(1, 6)]
    frame = diagonal_frame(range(1, 6), values)
    assert list(frame.columns) == ["n", "H"]
    assert frame["H"].tolist() == [1, 3, 6, 10, 15]


def test_infinite_cells(R2, line_x):
    x_ideal = Ideal(R2, ["x"])
    table = sample_grid(0, line_x, line_x, x_ideal, x_ideal, ((1, 2), (1, 2)))
    assert table.has_infinite()
    assert all(v is INFINITE for _, _, v in table.cells())
    assert table.to_dict()["values"] == [["INF", "INF"], ["INF", "INF"]]
    assert table.to_csv().splitlines()[1] == "1,INF,INF"


def test_counterexample_family_one(line_x, maximal):
    table = sample_grid(1, line_x, line_x, maximal, maximal, ((1, 4), (1, 4)))
    for n, m, v in table.cells():
        assert v == 2 * min(n, m)
    second = sample_grid(2, line_x, line_x, maximal, maximal, ((1, 3), (1, 3)))
    for n, m, v in second.cells():
        assert v == min(n, m)


def test_counterexample_family_two(R2, line_x, maximal):
    N2 = FPModule.from_matrix(R2, [["x", 0], [0, "x"]])
    for i, factor in ((0, 2), (1, 4), (2, 2)):
        table = sample_grid(i, line_x, N2, maximal, maximal, ((1, 3), (1, 3)))
        for n, m, v in table.cells():
            assert v == factor * min(n, m), (i, n, m)


def test_residue_field_against_free(residue_field, free, maximal):
    table = sample_grid(1, residue_field, free, maximal, maximal, ((1, 2), (1, 4)))
    for n, m, v in table.cells():
        assert v == m + 1


def test_from_function_and_to_dict():
    table = SampleTable.from_function(0, "grid", [1, 2], [3, 4], lambda n, m: n * m, "product")
    assert table.n_values == [1, 2]
    assert table.m_values == [3, 4]
    assert table.value(2, 4) == 8
    assert table.to_dict() == {
        "i": 0,
        "kind": "grid",
        "description": "product",
        "n": [1, 2],
        "m": [3, 4],
        "values": [[3, 4], [6, 8]],
    }
