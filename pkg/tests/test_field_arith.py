import logging
from fractions import Fraction

import pytest

from src.algebra.field_arith import DEFAULT_CHARACTERISTIC, FieldScalar, PrimeField, add, inv, mul

logger = logging.getLogger(__name__)


def test_default_characteristic():
    assert PrimeField().p == DEFAULT_CHARACTERISTIC == 32003


@pytest.mark.parametrize("p", [0, 1, 4, 32004, "7"])
def test_rejects_non_primes(p):
    with pytest.raises(ValueError):
        PrimeField(p)


def test_small_prime_warns(caplog):
    with caplog.at_level(logging.WARNING):
        PrimeField(7)
    assert "F_7" in caplog.text


def test_reduce_integers_and_rationals():
    F = PrimeField(7)
    assert F.reduce(-1) == 6
    assert F.reduce(Fraction(1, 2)) == 4
    with pytest.raises(ZeroDivisionError):
        F.reduce(Fraction(1, 7))


def test_scalar_arithmetic():
    F = PrimeField(32003)
    a, b = F(5), F(-3)
    assert int(add(a, b)) == 2
    assert int(mul(a, b)) == 32003 - 15
    assert int(a * inv(a)) == 1
    assert int(a / a) == 1
    assert int(-a) == 32003 - 5
    assert a + 1 == F(6)


def test_inverse_of_zero_raises():
    F = PrimeField(32003)
    with pytest.raises(ZeroDivisionError):
        inv(F(0))
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_scalars_must_be_reduced_and_compatible():
    with pytest.raises(ValueError):
        FieldScalar(7, 7)
    with pytest.raises(ValueError):
        PrimeField(7)(1) + PrimeField(11)(1)


def test_symmetric_representative():
    F = PrimeField(7)
    assert F.symmetric(6) == -1
    assert F.symmetric(3) == 3
