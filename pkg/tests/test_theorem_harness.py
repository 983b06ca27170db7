import json

import pytest

from src.algebra.groebner import Ideal
from src.harness.reports import TheoremReport, explain
from src.harness.theorem_harness import (
    check_corollary7,
    check_corollary8,
    check_prop10,
    check_shifting,
    check_theorem6,
    check_theorem9,
    default_max_degree,
    radical_criterion,
    remark_fixtures,
)
from src.models.schema import Conclusion, FitVerdict
from src.sampling.hilbert_sampler import sample_power_grid
from src.sampling.polynomial_fitter import FitReport, IntegerPolynomial, fit_bivariate

SMALL = ((1, 6), (1, 6))
FULL = ((1, 8), (1, 8))


def _forged(coefficients, max_degree=3):
    return FitReport(FitVerdict.POLYNOMIAL, max_degree, IntegerPolynomial.build(coefficients, (1, 1)), (1, 1))


def test_default_max_degree(free, residue_field, line_x, maximal):
    assert default_max_degree(maximal, maximal, free, free) == 2
    assert default_max_degree(maximal, maximal, free, free, diagonal=True) == 3
    assert default_max_degree(maximal, maximal, line_x, line_x) == 0
    # the maximal ideal kills k, so the variable count is used instead
    assert default_max_degree(maximal, maximal, residue_field, residue_field) == 2


def test_radical_criterion(line_x, maximal):
    assert radical_criterion(maximal, line_x, line_x, 0) == {"x": True, "y": False}
    assert radical_criterion(maximal, line_x, line_x, -1) == {"x": True, "y": True}
    assert radical_criterion(maximal, line_x, line_x, 2) == {"x": True, "y": True}


def test_theorem6_min_structure(free, maximal):
    report = check_theorem6(0, maximal, maximal, free, free, SMALL)
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.prediction is False
    assert report.fit.verdict is FitVerdict.NO_POLYNOMIAL_FOUND
    assert report.criteria["radical_membership"]["0"] == {"x": False, "y": False}
    assert report.budgets["max_degree"] == 2
    text = explain(report)
    assert text.startswith("theorem6: CONFIRMED")
    assert "Prediction: not polynomial" in text
    assert "Generators of I outside rad ann Tor_0: x, y" in text


def test_theorem6_residue_field_against_free(free, residue_field, maximal):
    report = check_theorem6(1, maximal, maximal, residue_field, free, ((1, 5), (1, 5)))
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.prediction is True
    assert report.fit.verdict is FitVerdict.POLYNOMIAL
    assert report.fit.polynomial.degree == 1
    assert report.fit.polynomial.evaluate(3, 7) == 8


@pytest.mark.parametrize(
    "i, pair, polynomial",
    [
        (0, ("R", "R"), False),
        (1, ("k", "R"), True),
        (0, ("k", "k"), True),
        (1, ("k", "k"), True),
        (2, ("k", "k"), True),
        (0, ("R/(x)", "R/(y)"), True),
        (1, ("R/(x)", "R/(y)"), True),
        (1, ("R/(x)", "R/(x)"), False),
    ],
)
def test_theorem6_on_full_grid(i, pair, polynomial, named_modules, maximal):
    M, N = (named_modules[name] for name in pair)
    report = check_theorem6(i, maximal, maximal, M, N, FULL)
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.prediction is polynomial
    expected = FitVerdict.POLYNOMIAL if polynomial else FitVerdict.NO_POLYNOMIAL_FOUND
    assert report.fit.verdict is expected


def test_theorem6_hypothesis_failure(R2, free, maximal):
    report = check_theorem6(0, maximal, Ideal(R2, ["x"]), free, free, SMALL)
    assert report.conclusion is Conclusion.INCONCLUSIVE
    assert report.failed_hypotheses == ["ann M + ann N + J is P-primary"]
    assert report.fit is None
    assert "Inconclusive because the hypothesis 'ann M + ann N + J is P-primary' fails." in explain(report)


def test_corollary7_diagonal(free, maximal):
    report = check_corollary7(0, maximal, free, free, (1, 8))
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.criteria["diagonal"] == [1, 3, 6, 10, 15, 21, 28, 36]
    assert report.budgets == {"range": [1, 8], "max_degree": 3}
    poly = report.fit.polynomial
    assert poly.evaluate(12) == 78
    assert poly.monomial_coefficients()[(2, 0)] == poly.monomial_coefficients()[(1, 0)]


def test_corollary8_counterexample_family(line_x, maximal):
    report = check_corollary8(1, maximal, maximal, line_x, line_x, SMALL)
    assert report.conclusion is Conclusion.CONFIRMED
    assert not report.engine_disagreement
    assert report.prediction is False
    assert report.criteria["tor_lengths"] == {"0": "INF", "1": "INF"}


def test_corollary8_finite_lengths(residue_field, maximal):
    report = check_corollary8(1, maximal, maximal, residue_field, residue_field, ((1, 5), (1, 5)))
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.prediction is True
    assert report.criteria["tor_lengths"] == {"0": 1, "1": 2}
    assert report.fit.polynomial.evaluate(4, 4) == 2


def test_theorem9_residue_field(residue_field, maximal):
    report = check_theorem9(1, maximal, maximal, residue_field, residue_field, ((1, 4), (1, 4)))
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.criteria["onset"] == 1
    assert report.criteria["tor_i_length"] == 2
    assert report.budgets["onset_budget"] == 2
    assert all(v == 0 for _, _, v in report.identity_residuals.cells())


def test_theorem9_regular_sequence(line_x, line_y, maximal):
    report = check_theorem9(1, maximal, maximal, line_x, line_y, ((1, 4), (1, 4)))
    assert report.conclusion is Conclusion.CONFIRMED
    assert all(v == 2 for _, _, v in report.table.cells())
    assert report.criteria["tor_i_length"] == 0


@pytest.mark.parametrize(
    "i, pair",
    [
        (1, ("k", "k")),
        (2, ("k", "k")),
        (1, ("R/(x)", "R/(y)")),
        (1, ("R/(x^2,xy,y^3)", "R/(x)")),
    ],
)
def test_theorem9_on_six_by_six(i, pair, named_modules, maximal):
    M, N = (named_modules[name] for name in pair)
    report = check_theorem9(i, maximal, maximal, M, N, SMALL)
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.budgets["onset_budget"] == 4
    onset = report.criteria["onset"]
    assert all(v == 0 for n, m, v in report.identity_residuals.cells() if n >= onset and m >= onset)


def test_theorem9_late_onset(named_modules, maximal):
    report = check_theorem9(1, maximal, maximal, named_modules["R/(x^2,xy,y^3)"], named_modules["R/(x)"], SMALL)
    assert report.criteria["onset"] == 3


def test_theorem9_needs_finite_tensor_product(free, maximal):
    report = check_theorem9(1, maximal, maximal, free, free, ((1, 3), (1, 3)))
    assert report.conclusion is Conclusion.INCONCLUSIVE
    assert report.failed_hypotheses == ["M ⊗ N has finite length"]
    assert report.identity_residuals is None


def test_prop10_power_form(line_x, line_y, maximal):
    table = sample_power_grid(1, line_x, line_y, maximal, maximal, ((1, 5), (1, 5)))
    fit = fit_bivariate(table, default_max_degree(maximal, maximal, line_x, line_y))
    report = check_prop10(fit, maximal, maximal, line_x, line_y, form="power")
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.criteria["bound"] == 0
    assert report.criteria["degree"] == 0
    assert "i" not in report.fixture


def test_prop10_excess_degree_by_form(free, maximal):
    fit = _forged({(3, 0): 1})
    power = check_prop10(fit, maximal, maximal, free, free, form="power")
    assert power.conclusion is Conclusion.REFUTED
    quotient = check_prop10(fit, maximal, maximal, free, free, form="quotient")
    assert quotient.conclusion is Conclusion.INCONCLUSIVE
    assert quotient.criteria["discrepancy"] is True
    diagonal = check_prop10(fit, maximal, maximal, free, free, form="diagonal")
    assert diagonal.conclusion is Conclusion.CONFIRMED
    assert diagonal.criteria["bound"] == 3


def test_prop10_degenerate_cases(free, residue_field, maximal):
    zero = check_prop10(_forged({}), maximal, maximal, free, free, form="power")
    assert zero.conclusion is Conclusion.CONFIRMED
    spread_zero = check_prop10(_forged({(1, 0): 1}), maximal, maximal, residue_field, free, form="power")
    assert spread_zero.conclusion is Conclusion.INCONCLUSIVE
    no_fit = FitReport(FitVerdict.NO_POLYNOMIAL_FOUND, 2)
    assert check_prop10(no_fit, maximal, maximal, free, free).conclusion is Conclusion.INCONCLUSIVE
    with pytest.raises(ValueError):
        check_prop10(no_fit, maximal, maximal, free, free, form="mixed")


def test_shifting_first_shift(maximal):
    report = check_shifting(2, maximal, maximal, ((1, 2), (1, 2)))
    assert report.conclusion is Conclusion.CONFIRMED
    assert "Only the first shift applies at i = 2." in report.notes
    assert "second_shift_residuals" not in report.criteria
    with pytest.raises(ValueError):
        check_shifting(1, maximal, maximal)


def test_shifting_both_shifts(R3):
    maximal = Ideal.maximal(R3)
    report = check_shifting(3, maximal, maximal, ((1, 1), (1, 1)))
    assert report.conclusion is Conclusion.CONFIRMED
    assert report.criteria["second_shift_residuals"]["values"] == [[0]]


def test_remark_fixtures(R2):
    reports = remark_fixtures(R2, ((1, 4), (1, 4)))
    assert [r.fixture["family"] for r in reports] == [1, 1, 2, 2, 2]
    assert [r.fixture["i"] for r in reports] == [1, 2, 0, 1, 2]
    for report in reports:
        assert report.theorem == "remark"
        assert report.conclusion is Conclusion.CONFIRMED
        assert report.prediction is False
        assert not report.engine_disagreement
    family_two = reports[3].table
    assert [family_two.value(n, n) for n in range(1, 5)] == [4, 8, 12, 16]


def test_remark_fixtures_show_region_dependence(R2):
    for report in remark_fixtures(R2, FULL):
        assert report.conclusion is Conclusion.CONFIRMED
        assert report.fit.verdict is FitVerdict.NO_POLYNOMIAL_FOUND
        assert report.fit.region_evidence.line == "n = 1*m + 0"


def test_report_json_round_trip(free, maximal):
    report = check_corollary7(0, maximal, free, free, (1, 8))
    payload = json.loads(report.to_json())
    assert payload["conclusion"] == "CONFIRMED"
    assert explain(payload) == explain(report)
    with pytest.raises(ValueError):
        explain({"unrelated": 1})


def test_explain_flags_engine_disagreement():
    report = TheoremReport("corollary8", Conclusion.INCONCLUSIVE, engine_disagreement=True)
    assert "WARNING: criteria that must agree disagree" in explain(report)
