"""Verifiers that confront algebraic criteria with sampled Hilbert functions.

Each check returns a TheoremReport. REFUTED is reserved for cases where every
hypothesis holds, the prediction and the empirical verdict are both definite,
and they disagree.
"""
import logging
from typing import Dict, Optional, Sequence

from src.algebra.fpmodules import FPModule, annihilator, scale_module
from src.algebra.groebner import (
    Ideal,
    analytic_spread,
    ideal_power,
    ideal_sum,
    is_P_primary,
    radical_membership,
)
from src.algebra.homology import tor
from src.harness.reports import SPREAD_NOTE, TheoremReport
from src.models.schema import INFINITE, Conclusion, FitVerdict, is_finite, length_to_json
from src.sampling.hilbert_sampler import (
    SampleTable,
    as_range,
    sample_diagonal,
    sample_grid,
)
from src.sampling.polynomial_fitter import DEFAULT_ONSETS, FitReport, fit_bivariate, fit_univariate

logger = logging.getLogger(__name__)

DEFAULT_GRID = ((1, 8), (1, 8))


def describe(i, I: Ideal, J: Optional[Ideal], M: FPModule, N: FPModule) -> Dict[str, object]:
    ring = I.ring
    fixture = {
        "i": i,
        "ring": f"F_{ring.p}[{', '.join(ring.variables)}]",
        "I": str(I),
        "M": M.name or repr(M),
        "N": N.name or repr(N),
    }
    if J is not None:
        fixture["J"] = str(J)
    return fixture


def _spreads(I, J, M, N):
    return analytic_spread(I, annihilator(M)), analytic_spread(J, annihilator(N))


def default_max_degree(I: Ideal, J: Ideal, M: FPModule, N: FPModule, diagonal=False) -> int:
    """l_M(I) + l_N(J) - 2, or - 1 on the diagonal; the variable count when a spread is 0."""
    l_m, l_n = _spreads(I, J, M, N)
    if l_m >= 1 and l_n >= 1:
        return l_m + l_n - (1 if diagonal else 2)
    logger.warning(f"Degenerate analytic spread ({l_m}, {l_n}); using {I.ring.nvars} as degree cap")
    return I.ring.nvars


def radical_criterion(I: Ideal, M: FPModule, N: FPModule, j: int) -> Dict[str, bool]:
    """For each generator g of I, whether g ∈ rad ann Tor_j(M, N)."""
    if j < 0:
        return {str(g): True for g in I.generators}
    value = tor(j, M, N).value
    if value.is_zero():
        return {str(g): True for g in I.generators}
    ann = annihilator(value)
    return {str(g): radical_membership(g, ann) for g in I.generators}


def _support_ideal(M, N, extra):
    return ideal_sum(ideal_sum(annihilator(M), annihilator(N)), extra)


def _compare(theorem, prediction, fit: FitReport, report: TheoremReport):
    """Fill in the conclusion from a definite prediction and a fit."""
    report.prediction = prediction
    report.fit = fit
    if fit.verdict is FitVerdict.INFINITE_VALUES:
        report.conclusion = Conclusion.INCONCLUSIVE
        report.notes.append("The sampled region contains infinite lengths.")
        return report
    observed = fit.verdict is FitVerdict.POLYNOMIAL
    if observed == prediction:
        report.conclusion = Conclusion.CONFIRMED
    else:
        report.conclusion = Conclusion.REFUTED
        logger.error(f"{theorem}: prediction {prediction} but fitter says {fit.verdict.value}")
    return report


def check_theorem6(
    i: int,
    I: Ideal,
    J: Ideal,
    M: FPModule,
    N: FPModule,
    grid=DEFAULT_GRID,
    max_degree: Optional[int] = None,
    onsets: Sequence = DEFAULT_ONSETS,
    workers: int = 0,
) -> TheoremReport:
    """H is eventually polynomial iff I ⊆ rad ann Tor_j(M, N) for j = i - 1, i."""
    report = TheoremReport("theorem6", Conclusion.INCONCLUSIVE, fixture=describe(i, I, J, M, N))
    primary = is_P_primary(_support_ideal(M, N, J))
    report.hypotheses.append(("ann M + ann N + J is P-primary", primary))
    if not primary:
        return report
    membership = {j: radical_criterion(I, M, N, j) for j in (i - 1, i)}
    report.criteria["radical_membership"] = {str(j): v for j, v in membership.items()}
    prediction = all(all(v.values()) for v in membership.values())
    if max_degree is None:
        max_degree = default_max_degree(I, J, M, N)
    report.budgets = {"grid": [list(r) for r in grid], "max_degree": max_degree}
    table = sample_grid(i, M, N, I, J, grid, workers=workers)
    report.table = table
    return _compare("theorem6", prediction, fit_bivariate(table, max_degree, onsets), report)


def check_corollary7(
    i: int,
    I: Ideal,
    M: FPModule,
    N: FPModule,
    n_range=(1, 8),
    max_degree: Optional[int] = None,
    onsets: Sequence = tuple(range(1, 6)),
    workers: int = 0,
) -> TheoremReport:
    """Under I + ann M + ann N P-primary, H(n, n) is eventually polynomial."""
    report = TheoremReport("corollary7", Conclusion.INCONCLUSIVE, fixture=describe(i, I, None, M, N))
    primary = is_P_primary(_support_ideal(M, N, I))
    report.hypotheses.append(("I + ann M + ann N is P-primary", primary))
    if not primary:
        return report
    if max_degree is None:
        max_degree = default_max_degree(I, I, M, N, diagonal=True)
    n_values = as_range(n_range)
    values = sample_diagonal(i, M, N, I, n_range, workers=workers)
    report.criteria["diagonal"] = [length_to_json(v) for v in values]
    report.budgets = {"range": [n_values[0], n_values[-1]], "max_degree": max_degree}
    fit = fit_univariate(values, max_degree, onsets, start=n_values[0])
    return _compare("corollary7", True, fit, report)


def check_corollary8(
    i: int,
    I: Ideal,
    J: Ideal,
    M: FPModule,
    N: FPModule,
    grid=DEFAULT_GRID,
    max_degree: Optional[int] = None,
    onsets: Sequence = DEFAULT_ONSETS,
    workers: int = 0,
    theorem="corollary8",
) -> TheoremReport:
    """H is eventually polynomial iff Tor_i(M, N) and Tor_{i-1}(M, N) have finite length.

    The radical-containment criterion is evaluated as well; under these
    hypotheses the two must agree.
    """
    report = TheoremReport(theorem, Conclusion.INCONCLUSIVE, fixture=describe(i, I, J, M, N))
    for label, ideal in (("I + ann M + ann N is P-primary", I), ("J + ann M + ann N is P-primary", J)):
        report.hypotheses.append((label, is_P_primary(_support_ideal(M, N, ideal))))
    if report.failed_hypotheses:
        return report
    lengths = {j: (tor(j, M, N).length if j >= 0 else 0) for j in (i - 1, i)}
    report.criteria["tor_lengths"] = {str(j): length_to_json(v) for j, v in lengths.items()}
    prediction = all(is_finite(v) for v in lengths.values())
    membership = {j: radical_criterion(I, M, N, j) for j in (i - 1, i)}
    report.criteria["radical_membership"] = {str(j): v for j, v in membership.items()}
    radical_prediction = all(all(v.values()) for v in membership.values())
    if radical_prediction != prediction:
        report.engine_disagreement = True
        report.notes.append("Finite-length and radical-containment criteria disagree.")
        logger.error(f"{theorem}: finite-length criterion {prediction}, radical criterion {radical_prediction}")
    if max_degree is None:
        max_degree = default_max_degree(I, J, M, N)
    report.budgets = {"grid": [list(r) for r in grid], "max_degree": max_degree}
    table = sample_grid(i, M, N, I, J, grid, workers=workers)
    report.table = table
    return _compare(theorem, prediction, fit_bivariate(table, max_degree, onsets), report)


def check_theorem9(i: int, I: Ideal, J: Ideal, M: FPModule, N: FPModule, grid=((1, 6), (1, 6))) -> TheoremReport:
    """When M ⊗ N has finite length, eventually

    H(n, m) = λ Tor_i(M, N) + λ Tor_{i-1}(I^n M, N) + λ Tor_{i-1}(M, J^m N) + λ Tor_{i-2}(I^n M, J^m N).
    """
    report = TheoremReport("theorem9", Conclusion.INCONCLUSIVE, fixture=describe(i, I, J, M, N))
    tensor_length = tor(0, M, N).length
    report.hypotheses.append(("M ⊗ N has finite length", is_finite(tensor_length)))
    if not is_finite(tensor_length):
        return report
    n_values, m_values = as_range(grid[0]), as_range(grid[1])
    budget = max(n_values[-1], m_values[-1]) - 2
    report.budgets = {"grid": [list(r) for r in grid], "onset_budget": budget}

    constant = tor(i, M, N).length
    by_n = {n: tor(i - 1, scale_module(I, n, M), N).length for n in n_values}
    by_m = {m: tor(i - 1, M, scale_module(J, m, N)).length for m in m_values}
    hilbert = sample_grid(i, M, N, I, J, grid)
    report.table = hilbert

    def residual(n, m):
        corner = tor(i - 2, scale_module(I, n, M), scale_module(J, m, N)).length
        terms = (hilbert.value(n, m), constant, by_n[n], by_m[m], corner)
        if not all(is_finite(t) for t in terms):
            return INFINITE
        return terms[0] - terms[1] - terms[2] - terms[3] - terms[4]

    residuals = SampleTable.from_function(i, "residual", n_values, m_values, residual, "H - four-term sum")
    report.identity_residuals = residuals

    onset = None
    for s in range(min(n_values[0], m_values[0]), budget + 1):
        region = [v for n, m, v in residuals.cells() if n >= s and m >= s]
        if region and all(v == 0 for v in region):
            onset = s
            break
    report.criteria["onset"] = onset
    report.criteria["tor_i_length"] = length_to_json(constant)
    if onset is None:
        report.conclusion = Conclusion.REFUTED
        report.notes.append(f"Nonzero residuals persist for every onset up to {budget}.")
        logger.error(f"theorem9: identity fails past every onset <= {budget}")
    else:
        report.conclusion = Conclusion.CONFIRMED
        logger.info(f"theorem9: identity holds for n, m >= {onset}")
    return report


def check_prop10(fit: FitReport, I: Ideal, J: Ideal, M: FPModule, N: FPModule, form: str = "quotient") -> TheoremReport:
    """Total degree of a fitted polynomial against l_M(I) + l_N(J) - 2.

    form is 'power' for λ Tor_i(M/I^n M, J^m N), the form the bound is stated
    for, 'quotient' for H(n, m), or 'diagonal' for H(n, n) with J = I (cap
    raised by one). Only the power form can be refuted; an excess in the
    other forms is flagged as a discrepancy.
    """
    if form not in ("quotient", "power", "diagonal"):
        raise ValueError(f"Invalid form '{form}'. Choose from 'quotient', 'power' or 'diagonal'.")
    report = TheoremReport("prop10", Conclusion.INCONCLUSIVE, fit=fit, fixture=describe(None, I, J, M, N))
    report.fixture.pop("i")
    report.notes.append(SPREAD_NOTE + ".")
    report.criteria["form"] = form
    if fit.verdict is not FitVerdict.POLYNOMIAL:
        report.notes.append("No polynomial fit, so there is no degree to bound.")
        return report
    l_m, l_n = _spreads(I, J, M, N)
    bound = l_m + l_n - (1 if form == "diagonal" else 2)
    degree = fit.polynomial.degree
    report.criteria.update({"l_M(I)": l_m, "l_N(J)": l_n, "bound": bound, "degree": degree})
    if fit.polynomial.is_zero():
        report.conclusion = Conclusion.CONFIRMED
        report.notes.append("The fitted polynomial is zero and satisfies every bound.")
        return report
    if l_m == 0 or l_n == 0:
        report.notes.append("An analytic spread is 0 (the ideal kills the module); the bound is degenerate.")
        return report
    report.prediction = True
    if degree <= bound:
        report.conclusion = Conclusion.CONFIRMED
    elif form == "power":
        report.conclusion = Conclusion.REFUTED
        logger.error(f"prop10: degree {degree} exceeds {bound}")
    else:
        report.criteria["discrepancy"] = True
        report.notes.append(f"Degree {degree} exceeds {bound} for the {form} form, which the bound does not cover.")
    return report


def check_shifting(i: int, I: Ideal, J: Ideal, grid=((1, 4), (1, 4))) -> TheoremReport:
    """λ Tor_i(R/I^n, R/J^m) = λ Tor_{i-1}(I^n, R/J^m) for i >= 2, and
    = λ Tor_{i-2}(I^n, J^m) for i >= 3.

    The second shift needs Tor_{i-2}(I^n, R) = 0, so at i = 2 only the first
    identity is checked.
    """
    if i < 2:
        raise ValueError(f"The shift identity needs i >= 2, got {i}")
    ring = I.ring
    R = FPModule.free(ring)
    report = TheoremReport("shifting", Conclusion.CONFIRMED, fixture=describe(i, I, J, R, R))
    n_values, m_values = as_range(grid[0]), as_range(grid[1])

    def difference(left, right):
        if not (is_finite(left) and is_finite(right)):
            return 0 if left == right else INFINITE
        return left - right

    def first_shift(n, m):
        left = tor(i, FPModule.cyclic(ring, ideal_power(I, n)), FPModule.cyclic(ring, ideal_power(J, m))).length
        right = tor(i - 1, scale_module(I, n, R), FPModule.cyclic(ring, ideal_power(J, m))).length
        return difference(left, right)

    def second_shift(n, m):
        left = tor(i - 1, scale_module(I, n, R), FPModule.cyclic(ring, ideal_power(J, m))).length
        right = tor(i - 2, scale_module(I, n, R), scale_module(J, m, R)).length
        return difference(left, right)

    residuals = SampleTable.from_function(i, "residual", n_values, m_values, first_shift, "first shift residual")
    report.identity_residuals = residuals
    report.budgets = {"grid": [list(r) for r in grid]}
    failed = any(v != 0 for _, _, v in residuals.cells())
    if i >= 3:
        second = SampleTable.from_function(i, "residual", n_values, m_values, second_shift, "second shift residual")
        report.criteria["second_shift_residuals"] = second.to_dict()
        failed = failed or any(v != 0 for _, _, v in second.cells())
    else:
        report.notes.append("Only the first shift applies at i = 2.")
    if failed:
        report.conclusion = Conclusion.REFUTED
        logger.error("shifting: nonzero residuals")
    return report


def remark_fixtures(ring, grid=DEFAULT_GRID, onsets: Sequence = DEFAULT_ONSETS, workers: int = 0):
    """The two counterexample families, run through the finite-length criterion.

    (1) M = N = R/(x), I = J = (x, y), i in {1, 2}.
    (2) M = R/(x), N = (R/(x))^2 presented by diag(x, x), i in {0, 1, 2}. Both
        annihilators are the non-maximal prime (x); only the graded
        consequences are checked.
    """
    x = ring.gen(0)
    I = Ideal(ring, ring.gens[:2])
    Q = Ideal(ring, [x])
    M = FPModule.cyclic(ring, Q, name="R/(x)")
    N2 = FPModule.from_matrix(ring, [[x, 0], [0, x]], name="coker diag(x, x)")
    reports = []
    for i in (1, 2):
        report = check_corollary8(i, I, I, M, M, grid, onsets=onsets, workers=workers, theorem="remark")
        report.fixture["family"] = 1
        reports.append(report)
    for i in (0, 1, 2):
        report = check_corollary8(i, I, I, M, N2, grid, onsets=onsets, workers=workers, theorem="remark")
        report.fixture["family"] = 2
        reports.append(report)
    return reports
