"""Free resolutions, Tor as a subquotient, and maps induced on Tor.

Tor_i(A, B) is computed by resolving A and tensoring with B = F_B / P_B. For a
resolution F with ranks β_j, the tensored complex in degree i is
(F_B)^{β_i} / P_B^{⊕β_i}; we stay in the free module R^{β_i * rank B}, where
basis vector (a, c) sits at position a * rank(B) + c. Then

    K = cycles  = {z : (d_i ⊗ 1)(z) ∈ P_B^{⊕β_{i-1}}}
    L = boundaries + relations = im(d_{i+1} ⊗ 1) + P_B^{⊕β_i}

and Tor_i(A, B) = K / L.
"""
import logging
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional

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
from src.algebra.groebner import Ideal, ideal_power, radical_membership
from src.models.schema import INFINITE, Length, is_finite
from src.utils.validators import certify

logger = logging.getLogger(__name__)

_resolution_cache: Dict[tuple, "Resolution"] = {}
_image_cache: Dict[tuple, tuple] = {}
_cache_lock = threading.Lock()
CACHE_LIMIT = 256


def clear_caches():
    with _cache_lock:
        _resolution_cache.clear()
        _image_cache.clear()


def _remember(cache, key, value):
    """Insert under _cache_lock, dropping the oldest entries past CACHE_LIMIT."""
    while len(cache) >= CACHE_LIMIT:
        cache.pop(next(iter(cache)))
    cache[key] = value


@dataclass
class Resolution:
    """F_length -> ... -> F_1 -> F_0 -> module -> 0.

    maps[j] goes from modules[j + 1] to modules[j]; maps[0] is the
    presentation of the module.
    """

    module: FPModule
    modules: List[FreeModule]
    maps: List[ModuleMap]

    @property
    def length(self):
        return len(self.maps)

    @property
    def ranks(self):
        return [f.rank for f in self.modules]

    def rank(self, j):
        if j < 0 or j >= len(self.modules):
            return 0
        return self.modules[j].rank

    def differential(self, j):
        """d_j : F_j -> F_{j-1}, for 1 <= j <= length."""
        if not 1 <= j <= self.length:
            raise ValueError(f"Resolution of length {self.length} has no differential d_{j}")
        return self.maps[j - 1]


def _extend(res: Resolution, length: int):
    while res.length < length:
        nxt = syzygies(res.maps[-1])
        res.maps.append(nxt)
        res.modules.append(nxt.source)
    certify(
        lambda: all(res.maps[j].compose(res.maps[j + 1]).is_zero() for j in range(res.length - 1)),
        "Consecutive resolution maps do not compose to zero",
    )
    return res


def free_resolution(M: FPModule, length: int) -> Resolution:
    """Resolution of M by iterated syzygies, with `length` maps.

    Resolutions are cached by the reduced presentation of M and extended on
    demand.
    """
    if length < 1:
        raise ValueError(f"Resolution length must be >= 1, got {length}")
    key = M.key()
    with _cache_lock:
        res = _resolution_cache.get(key)
        if res is None:
            relations = M.basis.vectors
            presentation = ModuleMap(FreeModule(M.ring, len(relations)), M.ambient, relations)
            res = Resolution(M, [M.ambient, presentation.source], [presentation])
            _remember(_resolution_cache, key, res)
        if res.length < length:
            _extend(res, length)
    logger.debug(f"Resolution of {M!r}: ranks {res.ranks[:length + 1]}")
    return res


def _as_module(X) -> FPModule:
    if isinstance(X, Subquotient):
        return X.presentation()
    if isinstance(X, FPModule):
        return X
    raise ValueError(f"Expected an FPModule or a Subquotient, got {type(X).__name__}")


def _block_relations(relations, copies, width):
    rank = copies * width
    return [r.shifted(a * width, rank) for a in range(copies) for r in relations]


def _tensored_cycles(res: Resolution, i: int, B: FPModule):
    """(ambient, K, L) for degree i of res ⊗ B."""
    ring = B.ring
    b = B.rank
    relations = B.basis.vectors
    beta_i, beta_prev = res.rank(i), res.rank(i - 1)
    ambient = FreeModule(ring, beta_i * b)
    if ambient.rank == 0:
        return ambient, [], []
    if i == 0 or beta_prev == 0:
        cycles = ambient.basis_vectors()
    else:
        d = res.differential(i).kronecker(b)
        cols = d.columns + _block_relations(relations, beta_prev, b)
        stacked = ModuleMap(FreeModule(ring, len(cols)), d.target, cols)
        cycles = [c.project(0, ambient.rank) for c in syzygies(stacked).columns]
        cycles = [c for c in cycles if c]
    boundaries = _block_relations(relations, beta_i, b)
    if res.rank(i + 1):
        boundaries += [c for c in res.differential(i + 1).kronecker(b).columns if c]
    return ambient, cycles, boundaries


class TorResult:
    """Tor_i as K / L in free coordinates over the second argument."""

    def __init__(self, i: int, value: Subquotient):
        self.i = i
        self.value = value

    @cached_property
    def length(self) -> Length:
        return module_length(self.value)

    def is_zero(self):
        return self.value.is_zero()

    def __repr__(self):
        return f"TorResult(i={self.i}, length={self.length})"


def _zero_tor(i, ring):
    return TorResult(i, Subquotient(FreeModule(ring, 0), [], []))


def tor(i: int, A, B) -> TorResult:
    """Tor_i(A, B) by resolving A and tensoring with B; zero for i < 0."""
    A, B = _as_module(A), _as_module(B)
    if i < 0:
        return _zero_tor(i, A.ring)
    res = free_resolution(A, i + 1)
    ambient, cycles, boundaries = _tensored_cycles(res, i, B)
    result = TorResult(i, Subquotient(ambient, cycles + boundaries, boundaries))
    logger.debug(f"Tor_{i}({A!r}, {B!r}) computed in R^{ambient.rank}")
    return result


def tor_symmetric_check(i, A, B) -> bool:
    """λ(Tor_i(A, B)) == λ(Tor_i(B, A)); two infinite lengths count as equal."""
    left, right = tor(i, A, B).length, tor(i, B, A).length
    if left != right:
        logger.warning(f"Tor_{i} lengths differ under swapping arguments: {left} vs {right}")
    return left == right


@dataclass
class InducedTorMap:
    """Image of a map induced on Tor, as a subquotient of the target's coordinates."""

    i: int
    power: int
    image: Subquotient
    target: Optional[TorResult] = None
    source: Optional[TorResult] = None
    matches_probe: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    @property
    def image_generators(self):
        return [v for v in self.image.numerator if not self.image.is_trivial_class(v)]

    @cached_property
    def length(self) -> Length:
        return module_length(self.image)

    def is_zero(self):
        return self.image.is_zero()


def _power_span(I: Ideal, n: int, ambient: FreeModule):
    power = ideal_power(I, n)
    return [g.as_vector(ambient.rank, pos) for g in power.generators for pos in range(ambient.rank)]


def _image_A_numerator(i, I, n, M, N):
    """Numerator U_n of im(Tor_i(I^n M, N) -> Tor_i(M, N)), plus (ambient, K, L)."""
    key = ("A", i, I.basis.key(), n, M.key(), N.key())
    with _cache_lock:
        cached = _image_cache.get(key)
    if cached is not None:
        return cached
    res = free_resolution(N, i + 1)
    ambient, cycles, boundaries = _tensored_cycles(res, i, M)
    if n == 0 or not cycles:
        numerator = cycles + boundaries
    else:
        scaled = _power_span(I, n, ambient) + _block_relations(M.basis.vectors, res.rank(i), M.rank)
        numerator = submodule_intersect(cycles, scaled, ambient) + boundaries
    entry = (ambient, cycles, boundaries, numerator)
    with _cache_lock:
        _remember(_image_cache, key, entry)
    return entry


def induced_image_A(i: int, I: Ideal, n: int, k_probe: int, M: FPModule, N: FPModule, include_source=False):
    """Image of Tor_i(I^n M, N) -> Tor_i(M, N) induced by I^n M ⊆ M.

    Both sides are computed against one fixed resolution of N. When
    n >= k_probe the result also records whether the image equals
    I^(n - k_probe) times the image at k_probe.
    """
    if n < 0:
        raise ValueError(f"Power must be >= 0, got {n}")
    M, N = _as_module(M), _as_module(N)
    if i < 0:
        zero = _zero_tor(i, M.ring)
        return InducedTorMap(i, n, zero.value, target=zero)
    ambient, cycles, boundaries, numerator = _image_A_numerator(i, I, n, M, N)
    image = Subquotient(ambient, numerator, boundaries)
    target = TorResult(i, Subquotient(ambient, cycles + boundaries, boundaries))
    result = InducedTorMap(i, n, image, target=target)
    if include_source:
        result.source = tor(i, N, scale_module(I, n, M))
    if k_probe is not None and 0 <= k_probe <= n:
        _, _, _, probe = _image_A_numerator(i, I, k_probe, M, N)
        expected = _scaled_span(I, n - k_probe, probe, ambient) + boundaries
        result.matches_probe = module_groebner(numerator, ambient) == module_groebner(expected, ambient)
    return result


def _scaled_span(I, n, gens, ambient):
    if n == 0:
        return list(gens)
    power = ideal_power(I, n)
    return [v.scale(g) for g in power.generators for v in gens if v]


class Stabilization(NamedTuple):
    k: Optional[int]
    verified: bool
    window: int
    checks: tuple


def image_stabilization(i, I, M, N, budget: int, window: int = 4) -> Stabilization:
    """Smallest k <= budget with im_{n+1} = I * im_n for n = k .. k + window - 1.

    Equality is tested on reduced bases of the numerators (boundaries
    included). Returns verified=False when no such k exists within budget.
    """
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    M, N = _as_module(M), _as_module(N)
    checks = []

    def step_holds(n):
        while len(checks) <= n:
            m = len(checks)
            ambient, _, boundaries, current = _image_A_numerator(i, I, m, M, N)
            _, _, _, nxt = _image_A_numerator(i, I, m + 1, M, N)
            expected = _scaled_span(I, 1, current, ambient) + boundaries
            checks.append(module_groebner(nxt, ambient) == module_groebner(expected, ambient))
        return checks[n]

    for k in range(budget + 1):
        if all(step_holds(n) for n in range(k, k + window)):
            logger.info(f"Image of Tor_{i} stabilizes at k={k} (window {window})")
            return Stabilization(k, True, window, tuple(checks))
    logger.warning(f"No stabilization of Tor_{i} images found with k <= {budget}")
    return Stabilization(None, False, window, tuple(checks))


def induced_image_B(i: int, J: Ideal, m: int, M: FPModule, N: FPModule, include_target=False):
    """Image of Tor_i(M, N) -> Tor_i(M, N / J^m N), against a fixed resolution of M.

    With L_m = L + J^m F the image is (K + L_m) / L_m.
    """
    if m < 0:
        raise ValueError(f"Power must be >= 0, got {m}")
    M, N = _as_module(M), _as_module(N)
    if i < 0:
        zero = _zero_tor(i, M.ring)
        return InducedTorMap(i, m, zero.value, target=zero)
    res = free_resolution(M, i + 1)
    ambient, cycles, boundaries = _tensored_cycles(res, i, N)
    target_boundaries = boundaries + _power_span(J, m, ambient)
    image = Subquotient(ambient, cycles + target_boundaries, target_boundaries)
    result = InducedTorMap(i, m, image)
    result.source = TorResult(i, Subquotient(ambient, cycles + boundaries, boundaries))
    if include_target:
        result.target = tor(i, M, N.quotient_by_power(J, m))
    return result


def _in_radical_of_annihilator(I: Ideal, X) -> bool:
    if isinstance(X, TorResult):
        X = X.value
    if X.is_zero():
        return True
    ann = annihilator(X)
    return all(radical_membership(g, ann) for g in I.generators)


@dataclass
class Prop5Report:
    i: int
    budget: int
    conditions: Dict[str, bool]
    per_power: Dict[str, List[bool]]

    @property
    def agree(self):
        return len(set(self.conditions.values())) == 1

    def to_dict(self):
        return {
            "i": self.i,
            "budget": self.budget,
            "conditions": dict(self.conditions),
            "per_power": {k: list(v) for k, v in self.per_power.items()},
            "agree": self.agree,
        }


def check_prop5(i: int, I: Ideal, M: FPModule, N: FPModule, budget: int = 8) -> Prop5Report:
    """Evaluate the five equivalent conditions on Tor_i(I^n M, N) and their images.

    (a) I ⊆ rad ann Tor_i(M, N)
    (b) the same for Tor_i(I^k M, N) at k = budget
    (c) the same for every n <= budget
    (d) I ⊆ rad ann of im(Tor_i(I^n M, N) -> Tor_i(M, N)) for every n <= budget
    (e) that image vanishes at n = budget - 1 and n = budget
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    M, N = _as_module(M), _as_module(N)
    logger.info(f"Checking the five Tor_{i} conditions up to n={budget}")
    a = _in_radical_of_annihilator(I, tor(i, M, N))
    c_values = []
    d_values = []
    images = {}
    for n in range(budget + 1):
        # Tor_i(I^n M, N) ≅ Tor_i(N, I^n M); resolving N reuses one resolution
        c_values.append(_in_radical_of_annihilator(I, tor(i, N, scale_module(I, n, M))))
        images[n] = induced_image_A(i, I, n, None, M, N)
        d_values.append(_in_radical_of_annihilator(I, images[n].image))
    e = images[budget - 1].is_zero() and images[budget].is_zero()
    conditions = {"a": a, "b": c_values[budget], "c": all(c_values), "d": all(d_values), "e": e}
    report = Prop5Report(i, budget, conditions, {"c": c_values, "d": d_values})
    if not report.agree:
        logger.error(f"Five-way Tor_{i} conditions disagree: {conditions}")
    return report


def long_exact_alternating_sum(I: Ideal, n: int, M: FPModule, N: FPModule, top: Optional[int] = None):
    """Alternating length sum along the Tor strand of 0 -> I^n M -> M -> M/I^n M -> 0.

    Tensored with N, the strand runs from Tor_top down to Tor_0 and must sum to
    zero when every term has finite length. Returns INFINITE otherwise.
    """
    M, N = _as_module(M), _as_module(N)
    top = M.ring.nvars + 1 if top is None else top
    sub = scale_module(I, n, M)
    quotient = M.quotient_by_power(I, n)
    total = 0
    for j in range(top + 1):
        sign = -1 if j % 2 else 1
        for term, weight in ((sub, 1), (M, -1), (quotient, 1)):
            length = tor(j, term, N).length
            if not is_finite(length):
                return INFINITE
            total += sign * weight * length
    return total
