"""Buchberger engine and ideal operations.

A single engine serves ideals and submodules of free modules. Internally an
element is a dict {(position, exponents): residue}; an ideal is the rank-1
case. Module elements are compared position-over-term: a smaller position
wins, ties are broken by the ring's monomial order.
"""
import itertools
import logging
import threading
from typing import Iterable, List, Optional, Sequence

from sympy.polys.monomials import monomial_div, monomial_divides, monomial_lcm, monomial_mul

from src.algebra.polyring import (
    MonomialOrder,
    Polynomial,
    PolynomialRing,
    Vector,
    require_homogeneous,
)
from src.models.schema import INFINITE
from src.utils.validators import (
    CertificateError,
    certification_enabled,
    certify,
    set_certification,
)

logger = logging.getLogger(__name__)

__all__ = [
    "CertificateError",
    "GroebnerBasis",
    "Ideal",
    "analytic_spread",
    "buchberger",
    "compute_basis",
    "ideal_colon",
    "ideal_intersect",
    "ideal_power",
    "ideal_product",
    "ideal_sum",
    "is_P_primary",
    "krull_dimension",
    "normal_form",
    "quotient_length",
    "radical_membership",
    "set_certification",
]


# ---------------------------------------------------------------------------
# vector kernels


def _term_key(okey):
    return lambda t: (-t[0], okey(t[1]))


def _lead(vec, okey):
    return max(vec, key=_term_key(okey))


def _make_monic(vec, lead, p):
    c = vec[lead]
    if c == 1:
        return vec
    inv = pow(c, -1, p)
    return {k: v * inv % p for k, v in vec.items()}


def _sub_multiple(vec, g, shift, c, p):
    """vec -= c * x^shift * g, in place."""
    for (pos, e), gc in g.items():
        k = (pos, monomial_mul(e, shift))
        v = (vec.get(k, 0) - c * gc) % p
        if v:
            vec[k] = v
        else:
            vec.pop(k, None)


def _reduce(vec, divisors, okey, p):
    """Full reduction of vec by monic divisors given as (element, lead) pairs."""
    vec = dict(vec)
    remainder = {}
    key = _term_key(okey)
    while vec:
        lt = max(vec, key=key)
        c = vec[lt]
        pos, e = lt
        for g, (gpos, ge) in divisors:
            if gpos == pos and monomial_divides(ge, e):
                _sub_multiple(vec, g, monomial_div(e, ge), c, p)
                break
        else:
            remainder[lt] = c
            del vec[lt]
    return remainder


def _spoly(f, lf, g, lg, p):
    lcm = monomial_lcm(lf[1], lg[1])
    s = {}
    _sub_multiple(s, f, monomial_div(lcm, lf[1]), -1, p)
    _sub_multiple(s, g, monomial_div(lcm, lg[1]), 1, p)
    return s


def _buchberger_vectors(vectors, okey, p, rank):
    """Reduced Groebner basis of the span of `vectors` (dicts).

    Pair handling follows the Gebauer-Moeller update; pairs are only formed
    between elements sharing a leading position, and the coprime-lead
    criterion is applied to ideals only.
    """
    f = []
    leads = []
    for v in vectors:
        if v:
            lt = _lead(v, okey)
            f.append(_make_monic(v, lt, p))
            leads.append(lt)
    if not f:
        return []

    coprime_ok = rank == 1

    def update(G, B, ih):
        ph, mh = leads[ih]
        C = [ig for ig in G if leads[ig][0] == ph]
        D = []
        for idx, ig in enumerate(C):
            mg = leads[ig][1]
            lcm_hg = monomial_lcm(mh, mg)

            def lcm_divides(ip):
                return monomial_divides(monomial_lcm(mh, leads[ip][1]), lcm_hg)

            coprime = coprime_ok and monomial_mul(mh, mg) == lcm_hg
            rest = C[idx + 1:]
            if coprime or (not any(lcm_divides(ip) for ip in rest) and not any(lcm_divides(pr[1]) for pr in D)):
                D.append((ih, ig))
        E = [
            (ih, ig)
            for ih, ig in D
            if not (coprime_ok and monomial_mul(mh, leads[ig][1]) == monomial_lcm(mh, leads[ig][1]))
        ]
        B_new = []
        for ig1, ig2 in B:
            pos, m1 = leads[ig1]
            m2 = leads[ig2][1]
            if pos != ph:
                B_new.append((ig1, ig2))
                continue
            lcm12 = monomial_lcm(m1, m2)
            if (
                not monomial_divides(mh, lcm12)
                or monomial_lcm(m1, mh) == lcm12
                or monomial_lcm(m2, mh) == lcm12
            ):
                B_new.append((ig1, ig2))
        B_new.extend(E)
        G_new = [ig for ig in G if not (leads[ig][0] == ph and monomial_divides(mh, leads[ig][1]))]
        G_new.append(ih)
        return G_new, B_new

    tkey = _term_key(okey)
    G, B = [], []
    for ih in sorted(range(len(f)), key=lambda i: tkey(leads[i])):
        G, B = update(G, B, ih)

    def pair_key(pair):
        i, j = pair
        lcm = monomial_lcm(leads[i][1], leads[j][1])
        return (sum(lcm), okey(lcm), -leads[i][0], min(i, j), max(i, j))

    zero_reductions = 0
    while B:
        pair = min(B, key=pair_key)
        B.remove(pair)
        i, j = pair
        s = _spoly(f[i], leads[i], f[j], leads[j], p)
        divisors = [(f[g], leads[g]) for g in sorted(G, key=lambda g: tkey(leads[g]))]
        h = _reduce(s, divisors, okey, p)
        if h:
            lt = _lead(h, okey)
            f.append(_make_monic(h, lt, p))
            leads.append(lt)
            G, B = update(G, B, len(f) - 1)
        else:
            zero_reductions += 1
    logger.debug(f"Buchberger: {len(f)} elements generated, {zero_reductions} pairs reduced to zero")

    # minimal then reduced basis
    G = sorted(G, key=lambda g: tkey(leads[g]))
    minimal = []
    for g in G:
        pos, e = leads[g]
        if not any(leads[h][0] == pos and monomial_divides(leads[h][1], e) for h in minimal):
            minimal.append(g)
    reduced = []
    for g in minimal:
        others = [(f[h], leads[h]) for h in minimal if h != g]
        r = _reduce(f[g], others, okey, p)
        reduced.append(_make_monic(r, leads[g], p))
    reduced.sort(key=lambda v: tkey(_lead(v, okey)), reverse=True)
    return reduced


# ---------------------------------------------------------------------------
# public basis type


class GroebnerBasis:
    """Reduced Groebner basis of an ideal (rank 1) or a submodule of R^rank.

    Elements are kept monic and sorted by descending leading term.
    """

    def __init__(self, ring: PolynomialRing, rank: int, vectors: List[dict], reduced=True):
        self.ring = ring
        self.rank = rank
        self.order = ring.order
        self.reduced = reduced
        self._vectors = vectors
        okey = ring.key
        self._leads = [_lead(v, okey) for v in vectors]
        self._divisors = list(zip(vectors, self._leads))

    @property
    def vectors(self):
        return [Vector._raw(self.ring, self.rank, dict(v)) for v in self._vectors]

    @property
    def elements(self):
        if self.rank == 1:
            return [Polynomial._raw(self.ring, {e: c for (_, e), c in v.items()}) for v in self._vectors]
        return self.vectors

    @property
    def leading_terms(self):
        """Leading (position, exponents) of each element."""
        return list(self._leads)

    def __len__(self):
        return len(self._vectors)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        if not isinstance(other, GroebnerBasis):
            return NotImplemented
        return (
            self.rank == other.rank
            and self.ring.variables == other.ring.variables
            and sorted(map(_freeze, self._vectors)) == sorted(map(_freeze, other._vectors))
        )

    def key(self):
        return (self.rank, frozenset(_freeze(v) for v in self._vectors))

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"GroebnerBasis(rank={self.rank}, size={len(self)})"

    def is_zero(self):
        return not self._vectors

    def is_unit(self):
        """True when the basis generates the whole free module."""
        zero = (0,) * self.ring.nvars
        positions = {pos for pos, e in self._leads if e == zero}
        return len(positions) == self.rank

    def _as_dict(self, f):
        if isinstance(f, Vector):
            if f.rank != self.rank:
                raise ValueError(f"Vector of rank {f.rank} tested against a basis of rank {self.rank}")
            return f.coeffs
        if self.rank != 1:
            raise ValueError("Polynomials can only be reduced against an ideal basis")
        f = self.ring.polynomial(f)
        return {(0, e): c for e, c in f.coeffs.items()}

    def reduce_dict(self, vec):
        return _reduce(vec, self._divisors, self.ring.key, self.ring.p)

    def normal_form(self, f):
        r = self.reduce_dict(self._as_dict(f))
        if isinstance(f, Vector):
            return Vector._raw(self.ring, self.rank, r)
        return Polynomial._raw(self.ring, {e: c for (_, e), c in r.items()})

    def contains(self, f):
        return not self.reduce_dict(self._as_dict(f))

    def spair_certificate(self):
        """True iff every S-vector of the basis reduces to zero."""
        p = self.ring.p
        okey = self.ring.key
        for (i, (f, lf)), (j, (g, lg)) in itertools.combinations(enumerate(self._divisors), 2):
            if lf[0] != lg[0]:
                continue
            s = _spoly(f, lf, g, lg, p)
            if _reduce(s, self._divisors, okey, p):
                logger.debug(f"S-vector of elements {i}, {j} does not reduce to zero")
                return False
        return True

    def standard_monomials(self, position=0, max_degree=None):
        """Monomials at `position` outside the leading-term module, by degree.

        Stops at the first degree with no standard monomial, which is exact
        when the position is cofinite, or at max_degree.
        """
        leads = [e for pos, e in self._leads if pos == position]
        out = []
        degree = 0
        while max_degree is None or degree <= max_degree:
            found = [
                e for e in _monomials_of_degree(self.ring.nvars, degree)
                if not any(monomial_divides(lead, e) for lead in leads)
            ]
            if not found:
                break
            out.extend(found)
            degree += 1
        return out


def _freeze(vec):
    return tuple(sorted(vec.items()))


def _monomials_of_degree(nvars, degree):
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for i in combo:
            exps[i] += 1
        yield tuple(exps)


def compute_basis(ring: PolynomialRing, rank: int, vectors: Iterable[dict], order: Optional[MonomialOrder] = None):
    """Reduced Groebner basis of the span of vector dicts in R^rank."""
    if order is not None and order != ring.order:
        ring = ring.with_order(order)
    vectors = [dict(v) for v in vectors if v]
    reduced = _buchberger_vectors(vectors, ring.key, ring.p, rank)
    basis = GroebnerBasis(ring, rank, reduced)
    if certification_enabled():
        certify(basis.spair_certificate, f"Buchberger certificate failed for {basis!r}")
        certify(
            lambda: all(not basis.reduce_dict(v) for v in vectors),
            "Input generator does not reduce to zero against its own basis",
        )
    return basis


def buchberger(gens: Sequence, ring: Optional[PolynomialRing] = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by `gens`."""
    gens = list(gens)
    if ring is None:
        if not gens:
            raise ValueError("buchberger() needs a ring when called with no generators")
        ring = gens[0].ring
    polys = [ring.polynomial(g) for g in gens]
    return compute_basis(ring, 1, [{(0, e): c for e, c in f.coeffs.items()} for f in polys])


def normal_form(f, basis: GroebnerBasis):
    return basis.normal_form(f)


# ---------------------------------------------------------------------------
# ideals


class Ideal:
    """Ideal of a polynomial ring given by generators.

    The reduced Groebner basis is computed on first use and cached; the cache
    is filled under a lock so one ideal can be shared between threads.
    """

    def __init__(self, ring: PolynomialRing, generators: Iterable = (), homogeneous=True):
        gens = [ring.polynomial(g) for g in generators]
        gens = [g for g in gens if g]
        if homogeneous:
            require_homogeneous(gens, "ideal generator")
        self.ring = ring
        self.generators = gens
        self._basis = None
        self._lock = threading.Lock()

    @classmethod
    def unit(cls, ring):
        return cls(ring, [ring.one()])

    @classmethod
    def zero(cls, ring):
        return cls(ring, [])

    @classmethod
    def maximal(cls, ring):
        return cls(ring, ring.gens)

    @property
    def basis(self) -> GroebnerBasis:
        if self._basis is None:
            with self._lock:
                if self._basis is None:
                    self._basis = buchberger(self.generators, self.ring)
        return self._basis

    def is_unit(self):
        return self.basis.is_unit()

    def is_zero(self):
        return not self.generators

    def contains(self, other):
        if isinstance(other, Ideal):
            return all(self.basis.contains(g) for g in other.generators)
        return self.basis.contains(other)

    def __contains__(self, f):
        return self.contains(f)

    def equals(self, other: "Ideal"):
        return self.basis == other.basis

    def normal_form(self, f):
        return self.basis.normal_form(f)

    def __add__(self, other):
        return ideal_sum(self, other)

    def __mul__(self, other):
        return ideal_product(self, other)

    def __pow__(self, n):
        return ideal_power(self, n)

    def __repr__(self):
        return f"Ideal{self}"

    def __str__(self):
        return "(" + ", ".join(str(g) for g in self.generators) + ")"


def _minimal_products(ring, products):
    """Drop duplicate products (up to scalars) and, for monomials, multiples."""
    seen = {}
    for f in products:
        if not f:
            continue
        m = f.monic()
        seen.setdefault(frozenset(m.coeffs.items()), m)
    gens = list(seen.values())
    monomials = [next(iter(g.coeffs)) for g in gens if len(g) == 1]
    keep = []
    for g in gens:
        if len(g) == 1:
            (e,) = g.coeffs
            if any(m != e and monomial_divides(m, e) for m in monomials):
                continue
        keep.append(g)
    keep.sort(key=lambda g: ring.key(g.leading_monomial()), reverse=True)
    return keep


def ideal_power(I: Ideal, n: int) -> Ideal:
    """I^n from all n-fold products of the generators; I^0 = (1)."""
    if n < 0:
        raise ValueError(f"Ideal powers need n >= 0, got {n}")
    if n == 0:
        return Ideal.unit(I.ring)
    gens = _minimal_products(I.ring, I.generators)
    products = []
    for combo in itertools.combinations_with_replacement(range(len(gens)), n):
        f = I.ring.one()
        for k in combo:
            f = f * gens[k]
        products.append(f)
    return Ideal(I.ring, _minimal_products(I.ring, products), homogeneous=False)


def ideal_sum(I: Ideal, J: Ideal) -> Ideal:
    return Ideal(I.ring, list(I.generators) + [I.ring.polynomial(g) for g in J.generators], homogeneous=False)


def ideal_product(I: Ideal, J: Ideal) -> Ideal:
    products = [f * g for f in I.generators for g in J.generators]
    return Ideal(I.ring, _minimal_products(I.ring, products), homogeneous=False)


def _eliminate(ring, polys, eliminated):
    """Generators of (polys) intersected with the ring on the retained variables.

    `polys` live in `ring`, whose first `eliminated` variables are removed.
    """
    order = MonomialOrder.elimination(eliminated, ring.nvars - eliminated)
    basis = compute_basis(ring, 1, [{(0, e): c for e, c in f.coeffs.items()} for f in polys], order=order)
    kept = []
    for f in basis.elements:
        if all(not any(e[:eliminated]) for e in f.coeffs):
            kept.append(f)
    return kept


def ideal_intersect(I: Ideal, J: Ideal) -> Ideal:
    """I ∩ J by eliminating t from t*I + (1 - t)*J."""
    ring = I.ring
    if I.is_unit():
        return J
    if J.is_unit():
        return I
    if I.is_zero() or J.is_zero():
        return Ideal.zero(ring)
    t_name = ring.fresh_name("_t")
    big = ring.extend([t_name], front=True)
    t = big.gen(0)
    polys = [t * f.embed(big, 1) for f in I.generators]
    polys += [(big.one() - t) * g.embed(big, 1) for g in J.generators]
    gens = [f.restrict(ring, 1) for f in _eliminate(big, polys, 1)]
    result = Ideal(ring, gens, homogeneous=False)
    logger.debug(f"Intersection {I} ∩ {J} has {len(gens)} generators")
    return result


def exact_quotient(f: Polynomial, g: Polynomial) -> Polynomial:
    """f / g when g divides f; ValueError otherwise."""
    if not g:
        raise ZeroDivisionError("Division by the zero polynomial")
    ring = f.ring
    lg, cg = g.leading_term()
    inv = ring.field.inv(cg.value)
    rest = f
    quotient = ring.zero()
    while rest:
        lr, cr = rest.leading_term()
        if not monomial_divides(lg, lr):
            raise ValueError(f"{g} does not divide {f}")
        q = ring.monomial(monomial_div(lr, lg), cr.value * inv)
        quotient = quotient + q
        rest = rest - q * g
    return quotient


def _colon_principal(I: Ideal, g: Polynomial) -> Ideal:
    if I.contains(g):
        return Ideal.unit(I.ring)
    meet = ideal_intersect(I, Ideal(I.ring, [g], homogeneous=False))
    return Ideal(I.ring, [exact_quotient(h, g) for h in meet.generators], homogeneous=False)


def ideal_colon(I: Ideal, J: Ideal) -> Ideal:
    """(I : J) = {f : f J ⊆ I}, as the intersection of the principal colons."""
    result = None
    for g in J.generators:
        part = _colon_principal(I, g)
        result = part if result is None else ideal_intersect(result, part)
    return result if result is not None else Ideal.unit(I.ring)


def radical_membership(f, I: Ideal) -> bool:
    """f ∈ rad(I), decided by 1 ∈ I + (1 - t f) in k[x, t]."""
    ring = I.ring
    f = ring.polynomial(f)
    if not f:
        return True
    if I.is_unit():
        return True
    aux = ring.fresh_name("_rabinowitsch")
    big = ring.extend([aux])
    t = big.gen(big.nvars - 1)
    polys = [g.embed(big) for g in I.generators] + [big.one() - t * f.embed(big)]
    basis = buchberger(polys, big)
    member = basis.is_unit()
    logger.debug(f"{f} {'is' if member else 'is not'} in the radical of {I}")
    return member


def monomial_dimension(nvars, leads):
    """Size of a largest variable set containing the support of no lead."""
    supports = [frozenset(i for i, x in enumerate(e) if x) for e in leads]
    for size in range(nvars, -1, -1):
        for subset in itertools.combinations(range(nvars), size):
            chosen = set(subset)
            if not any(s <= chosen for s in supports):
                return size
    return -1


def krull_dimension(I: Ideal) -> int:
    """dim R/I from the leading-term ideal; the unit ideal gives -1."""
    basis = I.basis
    if basis.is_unit():
        return -1
    return monomial_dimension(I.ring.nvars, [e for _, e in basis.leading_terms])


def is_P_primary(I: Ideal) -> bool:
    """rad(I) = (x1, ..., xr), i.e. R/I is zero-dimensional and nonzero."""
    return krull_dimension(I) == 0


def quotient_length(I: Ideal):
    """λ(R/I) as the number of standard monomials, or INFINITE."""
    dim = krull_dimension(I)
    if dim < 0:
        return 0
    if dim > 0:
        return INFINITE
    return len(I.basis.standard_monomials())


def analytic_spread(I: Ideal, ann: Optional[Ideal] = None) -> int:
    """Analytic spread of the image of I in R/ann.

    The Rees ideal ker(k[x, T] -> R/ann[t], T_j -> f_j t) is obtained by
    eliminating t; setting the base variables to zero leaves the fiber cone,
    whose Krull dimension is the spread.
    """
    ring = I.ring
    ann = ann or Ideal.zero(ring)
    gens = [g for g in I.generators if not ann.contains(g)]
    if not gens:
        return 0
    s = len(gens)
    t_name = ring.fresh_name("_t")
    fiber_names = [ring.fresh_name(f"_T{j + 1}") for j in range(s)]
    big = ring.extend([t_name] + fiber_names, front=True)
    offset = 1 + s
    t = big.gen(0)
    polys = [big.gen(1 + j) - t * f.embed(big, offset) for j, f in enumerate(gens)]
    polys += [a.embed(big, offset) for a in ann.generators]
    rees = _eliminate(big, polys, 1)
    fiber_ring = PolynomialRing(fiber_names, ring.field)
    base = range(offset, big.nvars)
    fiber_gens = [f.substitute_zero(base).restrict(fiber_ring, 1) for f in rees]
    spread = krull_dimension(Ideal(fiber_ring, fiber_gens, homogeneous=False))
    logger.debug(f"Analytic spread of {I} modulo {ann}: {spread}")
    return spread
