"""Exact integer-valued polynomial fitting by forward differences.

Polynomials are carried in the binomial basis C(n - n0, a) * C(m - m0, b), in
which integer-valued polynomials have integer coefficients. No floating
point is used anywhere.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Integer, Matrix, Poly, Rational, binomial, expand, symbols

from src.models.schema import FitVerdict, is_finite
from src.sampling.hilbert_sampler import SampleTable

logger = logging.getLogger(__name__)

DEFAULT_ONSETS = tuple(itertools.product(range(1, 6), repeat=2))

_n, _m = symbols("n m")


def binom_int(x: int, k: int) -> int:
    """C(x, k) for any integer x and k >= 0, via C(x, k) = (-1)^k C(k - x - 1, k)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return 1
    if x < 0:
        return (-1) ** k * binom_int(k - x - 1, k)
    if k > x:
        return 0
    result = 1
    for j in range(1, k + 1):
        result = result * (x - j + 1) // j
    return result


@dataclass(frozen=True)
class IntegerPolynomial:
    """Σ c_ab C(n - n0, a) C(m - m0, b) with integer c_ab.

    A univariate polynomial has variables ("n",) and only b = 0 keys.
    """

    coefficients: Tuple[Tuple[Tuple[int, int], int], ...]
    onset: Tuple[int, int]
    variables: Tuple[str, ...] = ("n", "m")

    @classmethod
    def build(cls, coefficients: Dict[Tuple[int, int], int], onset, variables=("n", "m")):
        items = tuple(sorted((k, int(v)) for k, v in coefficients.items() if v))
        return cls(items, tuple(onset), tuple(variables))

    @property
    def coefficient_map(self) -> Dict[Tuple[int, int], int]:
        return dict(self.coefficients)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((a + b for (a, b), _ in self.coefficients), default=-1)

    def is_zero(self):
        return not self.coefficients

    def __call__(self, n, m=None):
        return self.evaluate(n, m)

    def evaluate(self, n: int, m: Optional[int] = None) -> int:
        n0, m0 = self.onset
        total = 0
        for (a, b), c in self.coefficients:
            term = c * binom_int(n - n0, a)
            if b:
                term *= binom_int(m - m0, b)
            total += term
        return total

    def to_sympy(self):
        n0, m0 = self.onset
        expr = Integer(0)
        for (a, b), c in self.coefficients:
            expr += c * binomial(_n - n0, a).expand(func=True) * binomial(_m - m0, b).expand(func=True)
        return expand(expr)

    def monomial_coefficients(self) -> Dict[Tuple[int, int], Rational]:
        """Coefficients of n^a m^b, as exact rationals."""
        expr = self.to_sympy()
        if expr == 0:
            return {}
        poly = Poly(expr, _n, _m)
        return {(int(a), int(b)): Rational(c) for (a, b), c in poly.terms()}

    def __str__(self):
        expr = self.to_sympy()
        return str(expr)

    def to_dict(self):
        return {
            "variables": list(self.variables),
            "onset": list(self.onset),
            "degree": self.degree,
            "binomial_basis": [
                {"a": a, "b": b, "coefficient": c} for (a, b), c in self.coefficients
            ],
            "monomial_basis": [
                {"a": a, "b": b, "coefficient": str(c)}
                for (a, b), c in sorted(self.monomial_coefficients().items())
            ],
            "expression": str(self),
        }


@dataclass
class RegionEvidence:
    """Two exact fits that disagree on either side of a line."""

    line: str
    corner: int
    above: IntegerPolynomial
    below: IntegerPolynomial

    def to_dict(self):
        return {
            "line": self.line,
            "corner": self.corner,
            "above": self.above.to_dict(),
            "below": self.below.to_dict(),
        }


@dataclass
class FitReport:
    verdict: FitVerdict
    max_degree: int
    polynomial: Optional[IntegerPolynomial] = None
    onset: Optional[Tuple[int, int]] = None
    fit_window: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None
    holdout_cells: int = 0
    residuals: Dict[Tuple[int, int], int] = field(default_factory=dict)
    region_evidence: Optional[RegionEvidence] = None
    onsets_tried: List[Tuple[int, int]] = field(default_factory=list)
    univariate: bool = False

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "max_degree": self.max_degree,
            "univariate": self.univariate,
            "polynomial": self.polynomial.to_dict() if self.polynomial else None,
            "onset": list(self.onset) if self.onset else None,
            "fit_window": [list(r) for r in self.fit_window] if self.fit_window else None,
            "holdout_cells": self.holdout_cells,
            "residuals": [
                {"n": n, "m": m, "residual": r} for (n, m), r in sorted(self.residuals.items())
            ],
            "region_evidence": self.region_evidence.to_dict() if self.region_evidence else None,
            "onsets_tried": [list(o) for o in self.onsets_tried],
        }


def _differences(lookup, n0, m0, width_n, width_m):
    """D[a][b] = Δ_n^a Δ_m^b H at (n0, m0) for a < width_n, b < width_m."""
    table = [[lookup(n0 + p, m0 + q) for q in range(width_m)] for p in range(width_n)]
    # difference along m then along n
    for row in table:
        for b in range(1, width_m):
            for q in range(width_m - 1, b - 1, -1):
                row[q] = row[q] - row[q - 1]
    for b in range(width_m):
        for a in range(1, width_n):
            for p in range(width_n - 1, a - 1, -1):
                table[p][b] = table[p][b] - table[p - 1][b]
    return table


def _check_table(table: SampleTable):
    n_values, m_values = table.n_values, table.m_values
    if n_values != list(range(n_values[0], n_values[-1] + 1)) or m_values != list(
        range(m_values[0], m_values[-1] + 1)
    ):
        raise ValueError("Fitting needs a table over consecutive n and m")


def fit_bivariate(table: SampleTable, max_degree: int, onsets: Sequence[Tuple[int, int]] = DEFAULT_ONSETS) -> FitReport:
    """Find an integer-valued polynomial of total degree <= max_degree matching the table eventually.

    For each onset (n0, m0), differences Δ_n^a Δ_m^b on the (d+2) x (d+2)
    window at the onset must vanish for a + b > d, and the resulting
    polynomial must reproduce every other cell with n >= n0, m >= m0. The
    first onset passing both tests wins.
    """
    if max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree}")
    _check_table(table)
    onsets = sorted({tuple(o) for o in onsets}, key=lambda o: (o[0] + o[1], o[0], o[1]))
    if not onsets:
        raise ValueError("No onset candidates given")
    n_values, m_values = table.n_values, table.m_values
    n_hi, m_hi = n_values[-1], m_values[-1]
    d = max_degree
    width = d + 2

    lowest = (min(o[0] for o in onsets), min(o[1] for o in onsets))
    if table.has_infinite(*lowest):
        logger.warning("Infinite lengths in the fitting region")
        return FitReport(FitVerdict.INFINITE_VALUES, d, onsets_tried=[])

    def lookup(n, m):
        return int(table.value(n, m))

    best = None
    tried = []
    for n0, m0 in onsets:
        if n0 < n_values[0] or m0 < m_values[0] or n0 + width - 1 > n_hi or m0 + width - 1 > m_hi:
            continue
        tried.append((n0, m0))
        diffs = _differences(lookup, n0, m0, width, width)
        coefficients = {(a, b): diffs[a][b] for a in range(width) for b in range(width) if a + b <= d}
        poly = IntegerPolynomial.build(coefficients, (n0, m0))
        high_vanish = all(diffs[a][b] == 0 for a in range(width) for b in range(width) if a + b > d)
        residuals = {}
        holdout = 0
        for n, m, v in table.cells():
            if n < n0 or m < m0:
                continue
            in_window = n < n0 + width and m < m0 + width
            if not in_window:
                holdout += 1
            r = int(v) - poly.evaluate(n, m)
            if r:
                residuals[(n, m)] = r
        if holdout == 0:
            logger.debug(f"Onset {(n0, m0)} leaves no hold-out cells")
            continue
        window = ((n0, n0 + width - 1), (m0, m0 + width - 1))
        if high_vanish and not residuals:
            logger.info(f"Fitted degree {poly.degree} polynomial at onset {(n0, m0)}: {poly}")
            return FitReport(
                FitVerdict.POLYNOMIAL, d, poly, (n0, m0), window, holdout, {}, None, tried
            )
        if best is None or len(residuals) < len(best[1]):
            best = ((n0, m0), residuals, window, holdout)

    evidence = find_region_evidence(table, d)
    if best is None:
        logger.warning(f"No onset among {onsets} fits inside the table with a hold-out region")
        return FitReport(FitVerdict.NO_POLYNOMIAL_FOUND, d, region_evidence=evidence, onsets_tried=tried)
    onset, residuals, window, holdout = best
    logger.info(f"No polynomial of degree <= {d} found; best onset {onset} leaves {len(residuals)} residuals")
    return FitReport(
        FitVerdict.NO_POLYNOMIAL_FOUND, d, None, onset, window, holdout, residuals, evidence, tried
    )


def fit_univariate(values: Sequence, max_degree: int, onsets: Sequence[int] = tuple(range(1, 6)), start: int = 1) -> FitReport:
    """One-variable version of fit_bivariate; values[k] is the value at n = start + k."""
    if max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree}")
    values = list(values)
    if not values:
        raise ValueError("No values to fit")
    onsets = sorted({int(o[0]) if isinstance(o, (tuple, list)) else int(o) for o in onsets})
    d = max_degree
    width = d + 2
    last = start + len(values) - 1
    if any(not is_finite(v) for v in values[max(0, onsets[0] - start):]):
        return FitReport(FitVerdict.INFINITE_VALUES, d, univariate=True)

    def at(n):
        return int(values[n - start])

    best = None
    tried = []
    for n0 in onsets:
        if n0 < start or n0 + width - 1 > last:
            continue
        tried.append((n0, 0))
        diffs = [at(n0 + p) for p in range(width)]
        for a in range(1, width):
            for p in range(width - 1, a - 1, -1):
                diffs[p] = diffs[p] - diffs[p - 1]
        poly = IntegerPolynomial.build({(a, 0): diffs[a] for a in range(d + 1)}, (n0, 0), ("n",))
        residuals = {}
        for n in range(n0, last + 1):
            r = at(n) - poly.evaluate(n)
            if r:
                residuals[(n, 0)] = r
        holdout = last - (n0 + width - 1)
        if holdout == 0:
            continue
        window = ((n0, n0 + width - 1), (0, 0))
        if diffs[d + 1] == 0 and not residuals:
            logger.info(f"Fitted univariate polynomial at onset {n0}: {poly}")
            return FitReport(FitVerdict.POLYNOMIAL, d, poly, (n0, 0), window, holdout, {}, None, tried, True)
        if best is None or len(residuals) < len(best[1]):
            best = ((n0, 0), residuals, window, holdout)
    if best is None:
        return FitReport(FitVerdict.NO_POLYNOMIAL_FOUND, d, onsets_tried=tried, univariate=True)
    onset, residuals, window, holdout = best
    return FitReport(FitVerdict.NO_POLYNOMIAL_FOUND, d, None, onset, window, holdout, residuals, None, tried, True)


# ---------------------------------------------------------------------------
# region-dependence evidence


def _exact_region_fit(cells, cap, corner):
    """Integer-valued polynomial of degree <= cap through all cells, or None.

    The system is solved exactly in the binomial basis anchored at the
    corner; a fit is accepted only when it is unique and integral.
    """
    basis = [(a, b) for a in range(cap + 1) for b in range(cap + 1 - a)]
    if len(cells) <= len(basis):
        return None
    A = Matrix([[binom_int(n - corner, a) * binom_int(m - corner, b) for a, b in basis] for n, m, _ in cells])
    rhs = Matrix([int(v) for _, _, v in cells])
    try:
        solution, params = A.gauss_jordan_solve(rhs)
    except ValueError:
        return None
    if params.shape[0]:
        return None
    coefficients = {}
    for (a, b), c in zip(basis, solution):
        c = Rational(c)
        if c.q != 1:
            return None
        coefficients[(a, b)] = int(c)
    return IntegerPolynomial.build(coefficients, (corner, corner))


def _lines():
    for l in (1, 2, 3):
        for k in (0, 1, -1, 2, -2, 3, -3):
            yield f"n = {l}*m + {k}", (lambda n, m, l=l, k=k: n - (l * m + k))
            yield f"m = {l}*n + {k}", (lambda n, m, l=l, k=k: (l * n + k) - m)


def find_region_evidence(table: SampleTable, max_degree: int) -> Optional[RegionEvidence]:
    """Search lines n = l*m + k and m = l*n + k for disagreeing fits on the two sides.

    Only finite cells are used; `above` is the side where the line's
    defining difference is positive.
    """
    cap = max(max_degree, 2)
    lo = min(table.n_values[0], table.m_values[0])
    for corner in (lo, lo + 1, lo + 2):
        cells = [(n, m, v) for n, m, v in table.cells() if n >= corner and m >= corner]
        if not cells or any(not is_finite(v) for _, _, v in cells):
            continue
        for label, side in _lines():
            above = [c for c in cells if side(c[0], c[1]) > 0]
            below = [c for c in cells if side(c[0], c[1]) < 0]
            fit_above = _exact_region_fit(above, cap, corner)
            if fit_above is None:
                continue
            fit_below = _exact_region_fit(below, cap, corner)
            if fit_below is None or fit_below == fit_above:
                continue
            logger.info(f"Region evidence across {label}: {fit_above} vs {fit_below}")
            return RegionEvidence(label, corner, fit_above, fit_below)
    return None
