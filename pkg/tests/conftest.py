import logging

import pytest

from src.algebra.fpmodules import FPModule
from src.algebra.groebner import Ideal
from src.algebra.homology import clear_caches
from src.algebra.polyring import PolynomialRing
from src.utils.validators import set_certification

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)


@pytest.fixture(autouse=True)
def certified_engine():
    """Every engine call re-checks its certificates while testing."""
    set_certification(True)
    yield
    set_certification(False)
    clear_caches()


@pytest.fixture
def R2():
    return PolynomialRing(["x", "y"], 32003)


@pytest.fixture
def R3():
    return PolynomialRing(["x", "y", "z"], 32003)


@pytest.fixture
def maximal(R2):
    return Ideal.maximal(R2)


@pytest.fixture
def free(R2):
    return FPModule.free(R2)


@pytest.fixture
def residue_field(R2):
    return FPModule.cyclic(R2, Ideal.maximal(R2), name="k")


@pytest.fixture
def line_x(R2):
    """R/(x)."""
    return FPModule.cyclic(R2, Ideal(R2, ["x"]), name="R/(x)")


@pytest.fixture
def line_y(R2):
    """R/(y)."""
    return FPModule.cyclic(R2, Ideal(R2, ["y"]), name="R/(y)")


@pytest.fixture
def named_modules(R2, free, residue_field, line_x, line_y):
    """The cyclic modules most checks run on, keyed by short names."""
    return {
        "R": free,
        "k": residue_field,
        "R/(x)": line_x,
        "R/(y)": line_y,
        "R/(x^2,xy,y^3)": FPModule.cyclic(R2, Ideal(R2, ["x^2", "x*y", "y^3"]), name="R/(x^2, xy, y^3)"),
    }
