from concurrent.futures import ThreadPoolExecutor

import pytest

import src.algebra.fpmodules as fpmodules

from src.algebra.fpmodules import (
    FPModule,
    FreeModule,
    ModuleMap,
    Subquotient,
    annihilator,
    module_groebner,
    module_length,
    scale_module,
    submodule_intersect,
    syzygies,
)
from src.algebra.groebner import Ideal, ideal_power
from src.algebra.polyring import Vector
from src.models.schema import INFINITE
from src.utils.validators import NonHomogeneousError


def test_lengths_of_cyclic_modules(R2, residue_field, line_x):
    assert residue_field.length() == 1
    assert line_x.length() is INFINITE
    assert FPModule.cyclic(R2, ideal_power(Ideal.maximal(R2), 3)).length() == 6
    assert FPModule.free(R2).length() is INFINITE


def test_matrix_presentations(R2):
    diag = FPModule.from_matrix(R2, [["x", 0], [0, "x"]])
    assert diag.rank == 2
    assert diag.length() is INFINITE
    assert FPModule.from_matrix(R2, [["x", "y"]]).length() == 1
    assert FPModule.from_matrix(R2, [["x^2", "x*y", "y^2"]]).length() == 3
    with pytest.raises(NonHomogeneousError):
        FPModule.from_matrix(R2, [["x + 1"]])
    with pytest.raises(ValueError):
        ModuleMap.from_rows(R2, [["x", "y"], ["x"]])


def test_zero_module(R2):
    assert FPModule.cyclic(R2, Ideal.unit(R2)).is_zero()
    assert FPModule(R2, 0).is_zero()
    assert FPModule(R2, 0).length() == 0


def test_syzygies_of_a_row(R2):
    x, y = R2.gens
    row = ModuleMap.from_rows(R2, [[x, y]])
    syz = syzygies(row)
    assert syz.source.rank == 1
    assert row.compose(syz).is_zero()
    col = syz.columns[0]
    assert {str(col.component(0)), str(col.component(1))} in ({"y", "-x"}, {"-y", "x"})


def test_syzygies_edge_cases(R2):
    zero_map = ModuleMap.from_columns(R2, 2, [Vector.zero(R2, 2)])
    assert syzygies(zero_map).source.rank == 1
    empty = ModuleMap(FreeModule(R2, 0), FreeModule(R2, 1), [])
    assert syzygies(empty).source.rank == 0


def test_syzygies_of_three_monomials(R2):
    row = ModuleMap.from_rows(R2, [["x^2", "x*y", "y^2"]])
    syz = syzygies(row)
    assert row.compose(syz).is_zero()
    assert len(syz.columns) == 2


def test_submodule_intersection(R2):
    ambient = FreeModule(R2, 1)
    x, y = R2.gens
    meet = submodule_intersect([x.as_vector()], [y.as_vector()], ambient)
    basis = Subquotient(ambient, meet).numerator_basis
    assert [e for _, e in basis.leading_terms] == [(1, 1)]
    assert submodule_intersect([], [y.as_vector()], ambient) == []


def test_annihilators(R2, residue_field, line_x):
    assert annihilator(residue_field).equals(Ideal.maximal(R2))
    assert annihilator(line_x).equals(Ideal(R2, ["x"]))
    diag = FPModule.from_matrix(R2, [["x", 0], [0, "y^2"]])
    assert annihilator(diag).equals(Ideal(R2, ["x*y^2"]))
    assert annihilator(FPModule.free(R2)).is_zero()
    assert annihilator(FPModule.cyclic(R2, Ideal.unit(R2))).is_unit()


def test_scale_module(R2, residue_field, free):
    m = Ideal.maximal(R2)
    cube = FPModule.cyclic(R2, ideal_power(m, 3))
    assert module_length(scale_module(m, 1, cube)) == 5
    assert scale_module(m, 1, residue_field).is_zero()
    assert module_length(scale_module(m, 0, cube)) == 6
    assert module_length(scale_module(m, 2, free)) is INFINITE
    with pytest.raises(ValueError):
        scale_module(m, -1, free)


def test_length_is_additive_on_quotients(R2):
    m = Ideal.maximal(R2)
    M = FPModule.from_matrix(R2, [["x^2", "y", 0], [0, "x", "y^3"]])
    for n in range(1, 4):
        whole = M.quotient_by_power(m, n + 2).length()
        sub = module_length(scale_module(m, n, M.quotient_by_power(m, n + 2)))
        top = M.quotient_by_power(m, n).length()
        assert whole == sub + top


def test_subquotient_presentation(R2):
    m = Ideal.maximal(R2)
    ambient = FreeModule(R2, 1)
    U = [g.as_vector() for g in m.generators]
    V = [g.as_vector() for g in ideal_power(m, 3).generators]
    S = Subquotient(ambient, U, V)
    assert S.length() == 5
    assert S.presentation().length() == 5
    assert S.contains(R2.parse("x*y").as_vector())
    assert S.is_trivial_class(R2.parse("x^2*y").as_vector())
    assert not S.is_trivial_class(R2.parse("x^2").as_vector())


def test_direct_sum(R2, residue_field, line_x):
    total = residue_field.direct_sum(residue_field)
    assert total.length() == 2
    assert residue_field.direct_sum(line_x).length() is INFINITE


def test_module_groebner(R2):
    x, y = R2.gens
    F2 = FreeModule(R2, 2)
    split = module_groebner([Vector.from_components(R2, [x, 0]), Vector.from_components(R2, [0, y])], F2)
    assert len(split) == 2

    basis = module_groebner([Vector.from_components(R2, [x, y]), Vector.from_components(R2, [y, x])], F2)
    assert any(pos == 1 for pos, _ in basis.leading_terms)

    with pytest.raises(ValueError):
        module_groebner([Vector.from_components(R2, [x])], F2)


def test_subquotient_bases_are_built_once_under_threads(R2, mocker):
    spy = mocker.spy(fpmodules, "module_groebner")
    x, y = R2.gens
    quotient = Subquotient(
        FreeModule(R2, 1),
        [Vector.from_components(R2, [x]), Vector.from_components(R2, [y])],
        [Vector.from_components(R2, [x ** 2])],
    )
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: (quotient.numerator_basis, quotient.denominator_basis), range(32)))
    assert spy.call_count == 2
    assert all(num is results[0][0] and den is results[0][1] for num, den in results)
