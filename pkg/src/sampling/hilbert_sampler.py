import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import pandas as pd

from src.algebra.fpmodules import FPModule, scale_module
from src.algebra.groebner import Ideal
from src.algebra.homology import tor
from src.models.schema import INFINITE, is_finite, length_to_json

logger = logging.getLogger(__name__)

CORNER_LABEL = "n\\m"


def as_range(bounds) -> List[int]:
    """[lo, hi] (inclusive) or an explicit list of consecutive integers."""
    if isinstance(bounds, range):
        values = list(bounds)
    else:
        bounds = list(bounds)
        if len(bounds) != 2:
            raise ValueError(f"A range is given as [lo, hi], got {bounds}")
        lo, hi = int(bounds[0]), int(bounds[1])
        values = list(range(lo, hi + 1))
    if not values:
        raise ValueError(f"Empty range {bounds}")
    if values[0] < 0:
        raise ValueError(f"Power indices must be >= 0, got {values[0]}")
    return values


@dataclass
class SampleTable:
    """Lengths H(n, m) on a rectangular grid.

    values is a DataFrame indexed by n with one column per m; cells hold an
    int or INFINITE.
    """

    i: int
    kind: str
    values: pd.DataFrame
    description: str = ""
    labels: Tuple[str, str] = field(default=("n", "m"))

    @property
    def n_values(self):
        return [int(n) for n in self.values.index]

    @property
    def m_values(self):
        return [int(m) for m in self.values.columns]

    def value(self, n, m):
        return self.values.at[n, m]

    def cells(self):
        for n in self.n_values:
            for m in self.m_values:
                yield n, m, self.values.at[n, m]

    def has_infinite(self, n_min=None, m_min=None):
        for n, m, v in self.cells():
            if (n_min is None or n >= n_min) and (m_min is None or m >= m_min) and not is_finite(v):
                return True
        return False

    def to_frame(self) -> pd.DataFrame:
        """Copy with INFINITE rendered as 'INF'."""
        frame = self.values.map(length_to_json)
        frame.index.name = CORNER_LABEL
        return frame

    def to_csv(self, path=None):
        return self.to_frame().to_csv(path, index_label=CORNER_LABEL, lineterminator="\n")

    def to_dict(self):
        return {
            "i": self.i,
            "kind": self.kind,
            "description": self.description,
            "n": self.n_values,
            "m": self.m_values,
            "values": [[length_to_json(self.values.at[n, m]) for m in self.m_values] for n in self.n_values],
        }

    @classmethod
    def from_function(cls, i, kind, n_values, m_values, func: Callable[[int, int], object], description=""):
        frame = pd.DataFrame(index=list(n_values), columns=list(m_values), dtype=object)
        for n in n_values:
            for m in m_values:
                frame.at[n, m] = func(n, m)
        return cls(i, kind, frame, description)


def _evaluate_grid(i, kind, n_values, m_values, cell, description, workers):
    cells = [(n, m) for n in n_values for m in m_values]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda nm: cell(*nm), cells))
    else:
        results = [cell(n, m) for n, m in cells]
    frame = pd.DataFrame(index=list(n_values), columns=list(m_values), dtype=object)
    for (n, m), value in zip(cells, results):
        frame.at[n, m] = value
    infinite = sum(1 for v in results if v is INFINITE)
    logger.info(f"Sampled {len(cells)} cells for {description or kind} ({infinite} infinite)")
    return SampleTable(i, kind, frame, description)


def sample_grid(i: int, M: FPModule, N: FPModule, I: Ideal, J: Ideal, ranges, workers: int = 0) -> SampleTable:
    """H(n, m) = λ(Tor_i(M / I^n M, N / J^m N)) on the grid ranges = (n range, m range)."""
    n_values, m_values = as_range(ranges[0]), as_range(ranges[1])

    def cell(n, m):
        return tor(i, M.quotient_by_power(I, n), N.quotient_by_power(J, m)).length

    return _evaluate_grid(i, "grid", n_values, m_values, cell, f"Tor_{i}(M/I^nM, N/J^mN)", workers)


def sample_mixed(i: int, M: FPModule, N: FPModule, I: Ideal, J: Ideal, ranges, workers: int = 0) -> SampleTable:
    """λ(Tor_i(I^n M, N / J^m N))."""
    n_values, m_values = as_range(ranges[0]), as_range(ranges[1])

    def cell(n, m):
        return tor(i, scale_module(I, n, M), N.quotient_by_power(J, m)).length

    return _evaluate_grid(i, "mixed", n_values, m_values, cell, f"Tor_{i}(I^nM, N/J^mN)", workers)


def sample_power_grid(i: int, M: FPModule, N: FPModule, I: Ideal, J: Ideal, ranges, workers: int = 0) -> SampleTable:
    """λ(Tor_i(M / I^n M, J^m N)), the form used by the degree bound."""
    n_values, m_values = as_range(ranges[0]), as_range(ranges[1])

    def cell(n, m):
        return tor(i, M.quotient_by_power(I, n), scale_module(J, m, N)).length

    return _evaluate_grid(i, "power", n_values, m_values, cell, f"Tor_{i}(M/I^nM, J^mN)", workers)


def sample_diagonal(i: int, M: FPModule, N: FPModule, I: Ideal, n_range: Sequence[int], workers: int = 0) -> list:
    """H(n, n) with J = I."""
    n_values = as_range(n_range)

    def cell(n):
        return tor(i, M.quotient_by_power(I, n), N.quotient_by_power(I, n)).length

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(cell, n_values))
    else:
        values = [cell(n) for n in n_values]
    logger.info(f"Sampled diagonal of Tor_{i} for n={n_values[0]}..{n_values[-1]}")
    return values


def diagonal_frame(n_values, values) -> pd.DataFrame:
    return pd.DataFrame({"n": list(n_values), "H": [length_to_json(v) for v in values]})
