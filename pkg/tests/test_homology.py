from math import comb

import pytest

import src.algebra.homology as homology

from src.algebra.fpmodules import FPModule, scale_module
from src.algebra.groebner import Ideal
from src.algebra.homology import (
    check_prop5,
    free_resolution,
    image_stabilization,
    induced_image_A,
    induced_image_B,
    long_exact_alternating_sum,
    tor,
    tor_symmetric_check,
)
from src.algebra.polyring import MonomialOrder, PolynomialRing
from src.models.schema import INFINITE, is_finite

CORPUS_PAIRS = [
    ("k", "k"),
    ("R/(x)", "R/(x)"),
    ("R/(x)", "R/(y)"),
    ("R", "k"),
    ("R/(x^2,xy,y^3)", "k"),
    ("R/(x^2,xy,y^3)", "R/(x)"),
]


@pytest.mark.parametrize("nvars", [2, 3])
def test_koszul_lengths(nvars):
    ring = PolynomialRing([f"x{j}" for j in range(1, nvars + 1)], 32003)
    k = FPModule.cyclic(ring, Ideal.maximal(ring))
    for i in range(nvars + 2):
        assert tor(i, k, k).length == comb(nvars, i)


def test_resolution_of_residue_field(residue_field):
    res = free_resolution(residue_field, 3)
    assert res.ranks[:3] == [1, 2, 1]
    assert res.rank(3) == 0
    for j in range(1, res.length):
        assert res.differential(j).compose(res.differential(j + 1)).is_zero()
    with pytest.raises(ValueError):
        res.differential(0)
    with pytest.raises(ValueError):
        free_resolution(residue_field, 0)


def test_resolution_is_cached_by_presentation(R2):
    a = FPModule.cyclic(R2, Ideal(R2, ["x", "y"]))
    b = FPModule.from_matrix(R2, [["y", "x"]])
    assert free_resolution(a, 2) is free_resolution(b, 2)


def test_resolution_cache_separates_monomial_orders(R2):
    deglex = R2.with_order(MonomialOrder.parse("deglex"))
    a = FPModule.cyclic(R2, Ideal(R2, ["x", "y"]))
    b = FPModule.cyclic(deglex, Ideal(deglex, ["x", "y"]))
    assert a.key() != b.key()
    assert free_resolution(a, 2) is not free_resolution(b, 2)


def test_caches_are_bounded(R2, monkeypatch):
    monkeypatch.setattr(homology, "CACHE_LIMIT", 2)
    modules = [FPModule.cyclic(R2, Ideal(R2, [f"x^{d}", "y"])) for d in (1, 2, 3)]
    first = free_resolution(modules[0], 1)
    for module in modules[1:]:
        free_resolution(module, 1)
    assert len(homology._resolution_cache) == 2
    assert free_resolution(modules[0], 1) is not first


def test_regular_sequence(line_x, line_y):
    assert tor(0, line_x, line_y).length == 1
    assert tor(1, line_x, line_y).is_zero()
    assert tor(1, line_x, line_x).length is INFINITE
    assert tor(-1, line_x, line_y).is_zero()


def test_free_argument(free, residue_field):
    assert tor(0, free, residue_field).length == 1
    assert tor(1, free, residue_field).is_zero()
    assert tor(1, residue_field, free).is_zero()


def _corpus(R2):
    m = Ideal.maximal(R2)
    k = FPModule.cyclic(R2, m, name="k")
    Rx = FPModule.cyclic(R2, Ideal(R2, ["x"]), name="R/(x)")
    Ry = FPModule.cyclic(R2, Ideal(R2, ["y"]), name="R/(y)")
    cube = FPModule.cyclic(R2, Ideal(R2, ["x^2", "x*y", "y^3"]), name="R/(x^2, xy, y^3)")
    diag = FPModule.from_matrix(R2, [["x", 0], [0, "x"]], name="coker diag(x, x)")
    mixed = FPModule.from_matrix(R2, [["x", "y", 0], [0, "x", "y"]], name="coker [[x, y, 0], [0, x, y]]")
    R = FPModule.free(R2)
    return [
        (k, k), (k, Rx), (Rx, Ry), (Rx, Rx), (cube, Rx), (cube, k),
        (diag, Rx), (diag, k), (mixed, k), (mixed, Ry), (R, cube), (cube, cube),
    ]


def test_tor_is_symmetric_on_corpus(R2):
    for A, B in _corpus(R2):
        for i in range(4):
            assert tor_symmetric_check(i, A, B), (i, A, B)


def test_subquotient_arguments(R2, residue_field):
    m = Ideal.maximal(R2)
    # m as a module: Tor_0(m, k) = m/m^2 has length 2
    assert tor(0, scale_module(m, 1, FPModule.free(R2)), residue_field).length == 2


def test_induced_image_into_quotient(R2, free, maximal):
    image = induced_image_B(0, maximal, 2, free, free, include_target=True)
    assert image.length == 3
    assert image.target.length == 3
    assert image.source.length is INFINITE


def test_induced_image_from_power(R2, line_x, maximal):
    image = induced_image_A(0, maximal, 2, 1, line_x, line_x, include_source=True)
    assert image.length is INFINITE
    assert not image.is_zero()
    assert image.matches_probe
    assert induced_image_A(0, maximal, 0, None, line_x, line_x).target.length is INFINITE


def test_induced_image_vanishes_for_residue_field(residue_field, maximal):
    for n in range(1, 4):
        assert induced_image_A(1, maximal, n, None, residue_field, residue_field).is_zero()
    assert induced_image_A(1, maximal, 0, None, residue_field, residue_field).length == 2


def test_image_stabilization(line_x, line_y, maximal):
    result = image_stabilization(0, maximal, line_x, line_y, budget=4)
    assert result.verified
    assert result.k is not None and result.k <= 4
    assert result.window == 4
    with pytest.raises(ValueError):
        image_stabilization(0, maximal, line_x, line_y, budget=-1)


@pytest.mark.parametrize("i", [0, 1, 2])
@pytest.mark.parametrize("pair", CORPUS_PAIRS)
def test_image_stabilization_on_corpus(i, pair, named_modules, maximal):
    M, N = (named_modules[name] for name in pair)
    result = image_stabilization(i, maximal, M, N, budget=8)
    assert result.verified
    assert result.k <= 4


@pytest.mark.parametrize(
    "i, pair, k",
    [
        (0, ("R/(x)", "R/(y)"), 0),
        (1, ("k", "k"), 0),
        (1, ("R/(x)", "R/(x)"), 0),
        (1, ("R/(x^2,xy,y^3)", "k"), 2),
    ],
)
def test_image_stabilization_index(i, pair, k, named_modules, maximal):
    M, N = (named_modules[name] for name in pair)
    assert image_stabilization(i, maximal, M, N, budget=8).k == k


@pytest.mark.parametrize("i", [0, 1, 2])
@pytest.mark.parametrize("pair", CORPUS_PAIRS)
def test_prop5_on_corpus(i, pair, named_modules, maximal):
    M, N = (named_modules[name] for name in pair)
    report = check_prop5(i, maximal, M, N, budget=8)
    assert report.agree, report.conditions
    # for the maximal ideal every condition amounts to finite length of Tor_i(M, N)
    assert set(report.conditions.values()) == {is_finite(tor(i, M, N).length)}


@pytest.mark.parametrize("i", [0, 1])
def test_prop5_conditions_agree(i, residue_field, line_x, maximal):
    for M, N in ((residue_field, residue_field), (line_x, line_x)):
        report = check_prop5(i, maximal, M, N, budget=3)
        assert report.agree, report.conditions


def test_prop5_values(residue_field, line_x, maximal):
    assert all(check_prop5(1, maximal, residue_field, residue_field, budget=3).conditions.values())
    assert not any(check_prop5(0, maximal, line_x, line_x, budget=3).conditions.values())
    with pytest.raises(ValueError):
        check_prop5(0, maximal, line_x, line_x, budget=0)


def test_long_exact_sequence_sums_to_zero(R2, free, residue_field, maximal):
    cube = FPModule.cyclic(R2, Ideal(R2, ["x^2", "x*y", "y^3"]))
    for n in (1, 2):
        assert long_exact_alternating_sum(maximal, n, free, residue_field) == 0
        assert long_exact_alternating_sum(maximal, n, cube, residue_field) == 0
    assert long_exact_alternating_sum(maximal, 1, free, free) is INFINITE
