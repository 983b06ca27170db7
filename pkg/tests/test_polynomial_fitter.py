import itertools
import random
from math import comb

import pytest
from sympy import Rational

from src.harness.reports import explain
from src.models.schema import INFINITE, FitVerdict
from src.sampling.hilbert_sampler import SampleTable
from src.sampling.polynomial_fitter import (
    IntegerPolynomial,
    binom_int,
    find_region_evidence,
    fit_bivariate,
    fit_univariate,
)

GRID = range(1, 9)


def _table(func, n_values=GRID, m_values=GRID):
    return SampleTable.from_function(0, "grid", n_values, m_values, func)


def test_binom_int():
    assert binom_int(5, 2) == 10
    assert binom_int(3, 5) == 0
    assert binom_int(-1, 2) == 1
    assert binom_int(-2, 3) == -4
    assert binom_int(-4, 0) == 1
    with pytest.raises(ValueError):
        binom_int(3, -1)


def test_random_polynomials_are_recovered():
    rng = random.Random(20240517)
    basis = [(a, b) for a in range(5) for b in range(5 - a)]
    for _ in range(200):
        coefficients = {key: rng.randint(-5, 5) for key in rng.sample(basis, rng.randint(1, 5))}
        expected = IntegerPolynomial.build(coefficients, (1, 1))
        fit = fit_bivariate(_table(expected.evaluate), 4, [(1, 1)])
        assert fit.verdict is FitVerdict.POLYNOMIAL
        assert fit.polynomial == expected
        assert fit.holdout_cells > 0


def test_min_structure_has_no_polynomial():
    fit = fit_bivariate(_table(lambda n, m: comb(min(n, m) + 1, 2)), 2)
    assert fit.verdict is FitVerdict.NO_POLYNOMIAL_FOUND
    assert fit.polynomial is None
    assert fit.residuals
    evidence = fit.region_evidence
    assert evidence.line == "n = 1*m + 0"
    assert evidence.above.evaluate(5, 3) == comb(4, 2)
    assert evidence.below.evaluate(3, 5) == comb(4, 2)


def test_region_evidence_absent_for_polynomial():
    assert find_region_evidence(_table(lambda n, m: n * m + 1), 2) is None


def test_onset_detection():
    fit = fit_bivariate(_table(lambda n, m: n * m if n >= 3 else 0), 2)
    assert fit.verdict is FitVerdict.POLYNOMIAL
    assert fit.onset == (3, 1)
    assert fit.polynomial.evaluate(7, 5) == 35
    assert fit.polynomial.monomial_coefficients() == {(1, 1): Rational(1)}
    assert fit.fit_window == ((3, 6), (1, 4))


def test_onsets_without_holdout_are_skipped():
    fit = fit_bivariate(_table(lambda n, m: n + m, range(1, 5), range(1, 5)), 2)
    assert fit.verdict is FitVerdict.NO_POLYNOMIAL_FOUND
    assert fit.onsets_tried == [(1, 1)]
    assert fit.onset is None


def test_infinite_values():
    fit = fit_bivariate(_table(lambda n, m: INFINITE), 2)
    assert fit.verdict is FitVerdict.INFINITE_VALUES
    assert fit_univariate([INFINITE] * 8, 2).verdict is FitVerdict.INFINITE_VALUES


def test_invalid_arguments():
    table = _table(lambda n, m: 0)
    with pytest.raises(ValueError):
        fit_bivariate(table, -1)
    with pytest.raises(ValueError):
        fit_bivariate(table, 2, [])
    gappy = SampleTable.from_function(0, "grid", [1, 3], [1, 2], lambda n, m: 0)
    with pytest.raises(ValueError):
        fit_bivariate(gappy, 1)
    with pytest.raises(ValueError):
        fit_univariate([], 1)


def test_univariate_triangular_numbers():
    values = [comb(n + 1, 2) for n in GRID]
    fit = fit_univariate(values, 2)
    assert fit.verdict is FitVerdict.POLYNOMIAL
    assert fit.univariate
    assert fit.onset == (1, 0)
    assert fit.polynomial.monomial_coefficients() == {(2, 0): Rational(1, 2), (1, 0): Rational(1, 2)}
    assert fit.polynomial.evaluate(20) == 210


def test_univariate_eventual_polynomial():
    values = [0, 0, 0, 4, 5, 6, 7, 8, 9]
    fit = fit_univariate(values, 1, start=0)
    assert fit.verdict is FitVerdict.POLYNOMIAL
    assert fit.onset == (3, 0)
    assert fit.polynomial.evaluate(10) == 11


def test_zero_polynomial():
    fit = fit_bivariate(_table(lambda n, m: 0), 2)
    assert fit.verdict is FitVerdict.POLYNOMIAL
    assert fit.polynomial.is_zero()
    assert fit.polynomial.degree == -1


def test_report_serialization_and_text():
    fit = fit_bivariate(_table(lambda n, m: n * m), 2)
    payload = fit.to_dict()
    assert payload["verdict"] == "POLYNOMIAL"
    assert payload["polynomial"]["degree"] == 2
    assert payload["polynomial"]["monomial_basis"] == [{"a": 1, "b": 1, "coefficient": "1"}]
    assert payload["onset"] == [1, 1]
    text = explain(fit)
    assert text.startswith("Fitter verdict: POLYNOMIAL (degree cap 2)")
    assert "polynomial: m*n" in text


def test_explain_region_evidence():
    text = explain(fit_bivariate(_table(lambda n, m: comb(min(n, m) + 1, 2)), 2))
    assert "NO_POLYNOMIAL_FOUND" in text
    assert "region dependence across the line n = 1*m + 0" in text


def test_binomial_and_monomial_views_agree():
    poly = IntegerPolynomial.build({(2, 0): 1, (0, 1): 3, (0, 0): -2}, (2, 1))
    for n, m in itertools.product(range(-3, 6), repeat=2):
        monomial = sum(c * n ** a * m ** b for (a, b), c in poly.monomial_coefficients().items())
        assert monomial == poly.evaluate(n, m)
