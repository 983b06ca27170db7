"""Multivariate polynomials over F_p, free-module vectors and monomial orders.

Exponent vectors are plain tuples of non-negative ints; their total degree is
the first component of every order key, which is cached per (order, exponent).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from operator import itemgetter
from typing import Dict, Iterable, Optional, Sequence, Tuple

from sympy import Poly, Symbol, sympify
from sympy.polys.monomials import monomial_mul
from sympy.polys.orderings import ProductOrder, grevlex, grlex
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from src.algebra.field_arith import DEFAULT_CHARACTERISTIC, FieldScalar, PrimeField
from src.utils.validators import NonHomogeneousError

logger = logging.getLogger(__name__)

ExponentVector = Tuple[int, ...]

MAX_EXPONENT = 2**31 - 1

_TRANSFORMATIONS = standard_transformations + (implicit_multiplication_application, convert_xor)


class OrderKind(str, Enum):
    DEGREVLEX = "degrevlex"
    DEGLEX = "deglex"


@dataclass(frozen=True)
class MonomialOrder:
    """A graded monomial order.

    Args:
        kind: degrevlex or deglex.
        priority: permutation of variable indices, largest variable first.
            None means x1 > x2 > ... .
        blocks: block sizes for an elimination (product) order; each block is
            compared by degrevlex and earlier blocks dominate. Empty for a
            plain order.
    """

    kind: OrderKind = OrderKind.DEGREVLEX
    priority: Optional[Tuple[int, ...]] = None
    blocks: Tuple[int, ...] = field(default=())

    @classmethod
    def parse(cls, name, priority=None):
        try:
            kind = OrderKind(str(name).lower())
        except ValueError:
            raise ValueError(f"Unknown monomial order '{name}'. Choose from 'degrevlex' or 'deglex'.")
        return cls(kind=kind, priority=tuple(priority) if priority is not None else None)

    @classmethod
    def elimination(cls, eliminated, retained):
        """Block order with the first `eliminated` variables dominating."""
        return cls(kind=OrderKind.DEGREVLEX, blocks=(eliminated, retained))

    def key(self, exps):
        return _order_key(self, exps)


@lru_cache(maxsize=32)
def _block_order(blocks):
    getters, start = [], 0
    for size in blocks:
        getters.append((grevlex, itemgetter(slice(start, start + size))))
        start += size
    return ProductOrder(*getters)


@lru_cache(maxsize=1 << 18)
def _order_key(order, exps):
    if order.priority is not None:
        exps = tuple(exps[i] for i in order.priority)
    if order.blocks:
        return _block_order(order.blocks)(exps)
    if order.kind is OrderKind.DEGLEX:
        return grlex(exps)
    return grevlex(exps)


class PolynomialRing:
    """R = k[x1, ..., xr] with a fixed monomial order."""

    def __init__(self, variables: Sequence[str], field=None, order: Optional[MonomialOrder] = None):
        if isinstance(variables, str):
            variables = [v.strip() for v in variables.split(",") if v.strip()]
        variables = tuple(variables)
        if not variables:
            raise ValueError("A polynomial ring needs at least one variable")
        if len(set(variables)) != len(variables):
            raise ValueError(f"Duplicate variable names in {variables}")
        if field is None:
            field = PrimeField(DEFAULT_CHARACTERISTIC)
        elif isinstance(field, int):
            field = PrimeField(field)
        order = order or MonomialOrder()
        if order.priority is not None and sorted(order.priority) != list(range(len(variables))):
            raise ValueError(f"Variable priority {order.priority} is not a permutation of {len(variables)} variables")
        self.variables = variables
        self.nvars = len(variables)
        self.field = field
        self.p = field.p
        self.order = order
        self._symbols = tuple(Symbol(v) for v in variables)

    def __repr__(self):
        return f"PolynomialRing({list(self.variables)}, p={self.p}, order={self.order.kind.value})"

    def __eq__(self, other):
        return (
            isinstance(other, PolynomialRing)
            and other.variables == self.variables
            and other.p == self.p
            and other.order == self.order
        )

    def __hash__(self):
        return hash((self.variables, self.p, self.order))

    def key(self, exps):
        return _order_key(self.order, exps)

    def with_order(self, order: MonomialOrder):
        return PolynomialRing(self.variables, self.field, order)

    def extend(self, names, front=False, order=None):
        """Ring with extra variables, used for auxiliary computations."""
        names = tuple(names)
        variables = names + self.variables if front else self.variables + names
        return PolynomialRing(variables, self.field, order or MonomialOrder())

    def fresh_name(self, stem):
        name = stem
        while name in self.variables:
            name = "_" + name
        return name

    def zero(self):
        return Polynomial(self, {})

    def one(self):
        return self.constant(1)

    def constant(self, c):
        return Polynomial(self, {(0,) * self.nvars: c})

    def monomial(self, exps, c=1):
        return Polynomial(self, {tuple(exps): c})

    def gen(self, which):
        index = self.variables.index(which) if isinstance(which, str) else int(which)
        exps = [0] * self.nvars
        exps[index] = 1
        return Polynomial(self, {tuple(exps): 1})

    @property
    def gens(self):
        return [self.gen(i) for i in range(self.nvars)]

    def __call__(self, obj):
        return self.polynomial(obj)

    def polynomial(self, obj):
        """Coerce a Polynomial, int or expression string into this ring."""
        if isinstance(obj, Polynomial):
            return obj if obj.ring == self else obj.change_ring(self)
        if isinstance(obj, str):
            return self.parse(obj)
        if isinstance(obj, (int, FieldScalar)):
            return self.constant(int(obj))
        raise ValueError(f"Cannot interpret {obj!r} as a polynomial")

    def parse(self, text):
        """Parse an expression such as 'x^2*y + 3y^3'.

        Coefficients must be integers (or rationals whose denominator is a
        unit mod p) and are reduced mod p.
        """
        text = str(text).strip()
        if not text:
            raise ValueError("Empty polynomial expression")
        local = {name: sym for name, sym in zip(self.variables, self._symbols)}
        try:
            expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMATIONS, evaluate=True)
        except Exception as e:
            raise ValueError(f"Cannot parse polynomial '{text}': {e}") from e
        expr = sympify(expr)
        unknown = expr.free_symbols - set(self._symbols)
        if unknown:
            names = ", ".join(sorted(str(s) for s in unknown))
            raise ValueError(f"Unknown variable(s) {names} in '{text}'; ring variables are {', '.join(self.variables)}")
        try:
            poly = Poly(expr, *self._symbols)
        except Exception as e:
            raise ValueError(f"'{text}' is not a polynomial: {e}") from e
        terms = {}
        for exps, coeff in poly.terms():
            if not coeff.is_Rational:
                raise ValueError(f"Coefficient {coeff} in '{text}' is not rational")
            value = self.field.reduce(Fraction(int(coeff.p), int(coeff.q)))
            terms[tuple(int(e) for e in exps)] = value
        return Polynomial(self, terms)


class Polynomial:
    """Immutable polynomial; terms are kept as {exponent tuple: residue}."""

    __slots__ = ("ring", "coeffs", "_sorted")

    def __init__(self, ring: PolynomialRing, terms: Dict[ExponentVector, int]):
        p = ring.p
        clean = {}
        for exps, c in terms.items():
            c = int(c) % p
            if c:
                exps = tuple(exps)
                if len(exps) != ring.nvars:
                    raise ValueError(f"Exponent vector {exps} does not match {ring.nvars} variables")
                clean[exps] = (clean.get(exps, 0) + c) % p
                if not clean[exps]:
                    del clean[exps]
        self.ring = ring
        self.coeffs = clean
        self._sorted = None

    @classmethod
    def _raw(cls, ring, coeffs):
        poly = cls.__new__(cls)
        poly.ring = ring
        poly.coeffs = coeffs
        poly._sorted = None
        return poly

    @property
    def terms(self):
        """Terms as (exponent vector, FieldScalar), strictly descending."""
        if self._sorted is None:
            key = self.ring.key
            self._sorted = tuple(sorted(self.coeffs.items(), key=lambda t: key(t[0]), reverse=True))
        p = self.ring.p
        return [(exps, FieldScalar(c, p)) for exps, c in self._sorted]

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.coeffs), default=-1)

    def is_homogeneous(self):
        return len({sum(e) for e in self.coeffs}) <= 1

    def is_constant(self):
        return all(not any(e) for e in self.coeffs)

    def leading_term(self, order: Optional[MonomialOrder] = None):
        if not self.coeffs:
            raise ValueError("The zero polynomial has no leading term")
        order = order or self.ring.order
        exps = max(self.coeffs, key=order.key)
        return exps, FieldScalar(self.coeffs[exps], self.ring.p)

    def leading_monomial(self, order=None):
        return self.leading_term(order)[0]

    def leading_coefficient(self, order=None):
        return self.leading_term(order)[1]

    def monic(self):
        if not self.coeffs:
            return self
        lc_inv = self.ring.field.inv(self.leading_coefficient().value)
        return self._scaled(lc_inv)

    def _scaled(self, c):
        p = self.ring.p
        c %= p
        if not c:
            return self.ring.zero()
        return Polynomial._raw(self.ring, {e: v * c % p for e, v in self.coeffs.items()})

    def mul_term(self, exps, c=1):
        p = self.ring.p
        c %= p
        if not c:
            return self.ring.zero()
        return Polynomial._raw(self.ring, {monomial_mul(e, exps): v * c % p for e, v in self.coeffs.items()})

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise ValueError("Polynomials belong to different rings")
            return other
        return self.ring.polynomial(other)

    def __add__(self, other):
        other = self._coerce(other)
        p = self.ring.p
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            v = (out.get(e, 0) + c) % p
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return self._scaled(-1)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, FieldScalar)):
            return self._scaled(int(other))
        if isinstance(other, Vector):
            return other.scale(self)
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return self.ring.zero()
        if self.degree() + other.degree() > MAX_EXPONENT:
            raise OverflowError(
                f"Product degree {self.degree() + other.degree()} exceeds the exponent bound {MAX_EXPONENT}"
            )
        p = self.ring.p
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = monomial_mul(e1, e2)
                v = (out.get(e, 0) + c1 * c2) % p
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Polynomial._raw(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("Negative powers are not polynomials")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring.variables == other.ring.variables and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def change_ring(self, ring: PolynomialRing):
        """Same polynomial in a ring with the same variables (e.g. another order)."""
        if ring.variables != self.ring.variables or ring.p != self.ring.p:
            raise ValueError("Target ring must have the same variables and characteristic")
        return Polynomial._raw(ring, dict(self.coeffs))

    def embed(self, ring: PolynomialRing, offset=0):
        """Copy into a ring with extra variables; ours occupy positions offset.."""
        width = ring.nvars
        out = {}
        for e, c in self.coeffs.items():
            full = [0] * width
            full[offset:offset + len(e)] = e
            out[tuple(full)] = c
        return Polynomial._raw(ring, out)

    def restrict(self, ring: PolynomialRing, offset=0):
        """Inverse of embed; the dropped variables must not occur."""
        out = {}
        for e, c in self.coeffs.items():
            kept = e[offset:offset + ring.nvars]
            if sum(e) != sum(kept):
                raise ValueError(f"{self} involves variables outside {ring.variables}")
            out[kept] = c
        return Polynomial._raw(ring, out)

    def substitute_zero(self, indices: Iterable[int]):
        """Set the listed variables to zero."""
        indices = list(indices)
        return Polynomial._raw(
            self.ring, {e: c for e, c in self.coeffs.items() if all(e[i] == 0 for i in indices)}
        )

    def as_vector(self, rank=1, pos=0):
        return Vector._raw(self.ring, rank, {(pos, e): c for e, c in self.coeffs.items()})

    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for exps, c in self.terms:
            value = self.ring.field.symmetric(c.value)
            mono = "*".join(
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.ring.variables, exps)
                if e
            )
            if not mono:
                text = str(abs(value))
            elif abs(value) == 1:
                text = mono
            else:
                text = f"{abs(value)}*{mono}"
            if not parts:
                parts.append(text if value > 0 else f"-{text}")
            else:
                parts.append(f"+ {text}" if value > 0 else f"- {text}")
        return " ".join(parts)


class Vector:
    """Element of the free module R^rank.

    Terms are {(position, exponent tuple): residue}; position 0 is the first
    basis vector.
    """

    __slots__ = ("ring", "rank", "coeffs")

    def __init__(self, ring: PolynomialRing, rank: int, terms):
        p = ring.p
        clean = {}
        for (pos, exps), c in terms.items():
            c = int(c) % p
            if not c:
                continue
            if not 0 <= pos < rank:
                raise ValueError(f"Position {pos} outside a free module of rank {rank}")
            k = (pos, tuple(exps))
            v = (clean.get(k, 0) + c) % p
            if v:
                clean[k] = v
            else:
                clean.pop(k, None)
        self.ring = ring
        self.rank = rank
        self.coeffs = clean

    @classmethod
    def _raw(cls, ring, rank, coeffs):
        vec = cls.__new__(cls)
        vec.ring = ring
        vec.rank = rank
        vec.coeffs = coeffs
        return vec

    @classmethod
    def from_components(cls, ring, components):
        components = [ring.polynomial(c) for c in components]
        coeffs = {}
        for pos, poly in enumerate(components):
            for e, c in poly.coeffs.items():
                coeffs[(pos, e)] = c
        return cls._raw(ring, len(components), coeffs)

    @classmethod
    def basis(cls, ring, rank, pos):
        return cls._raw(ring, rank, {(pos, (0,) * ring.nvars): 1})

    @classmethod
    def zero(cls, ring, rank):
        return cls._raw(ring, rank, {})

    def components(self):
        parts = [dict() for _ in range(self.rank)]
        for (pos, e), c in self.coeffs.items():
            parts[pos][e] = c
        return [Polynomial._raw(self.ring, d) for d in parts]

    def component(self, pos):
        return Polynomial._raw(self.ring, {e: c for (q, e), c in self.coeffs.items() if q == pos})

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def _check(self, other):
        if not isinstance(other, Vector) or other.rank != self.rank or other.ring != self.ring:
            raise ValueError("Vectors live in different free modules")
        return other

    def __add__(self, other):
        other = self._check(other)
        p = self.ring.p
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            v = (out.get(k, 0) + c) % p
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return Vector._raw(self.ring, self.rank, out)

    def __neg__(self):
        p = self.ring.p
        return Vector._raw(self.ring, self.rank, {k: -c % p for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def scale(self, poly):
        """poly * self."""
        poly = self.ring.polynomial(poly)
        p = self.ring.p
        out = {}
        for (pos, e1), c1 in self.coeffs.items():
            for e2, c2 in poly.coeffs.items():
                k = (pos, monomial_mul(e1, e2))
                v = (out.get(k, 0) + c1 * c2) % p
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return Vector._raw(self.ring, self.rank, out)

    def __rmul__(self, poly):
        return self.scale(poly)

    def leading_term(self, order: Optional[MonomialOrder] = None):
        """Position-over-term leading term ((pos, exps), FieldScalar)."""
        if not self.coeffs:
            raise ValueError("The zero vector has no leading term")
        order = order or self.ring.order
        k = max(self.coeffs, key=lambda t: (-t[0], order.key(t[1])))
        return k, FieldScalar(self.coeffs[k], self.ring.p)

    def degree(self, shifts=None):
        """Degree of the highest-degree term, counting basis shifts."""
        shifts = shifts or [0] * self.rank
        return max((sum(e) + shifts[pos] for pos, e in self.coeffs), default=-1)

    def is_homogeneous(self, shifts=None):
        shifts = shifts or [0] * self.rank
        return len({sum(e) + shifts[pos] for pos, e in self.coeffs}) <= 1

    def shifted(self, offset, rank):
        """The same entries placed at positions offset.. of R^rank."""
        return Vector._raw(self.ring, rank, {(pos + offset, e): c for (pos, e), c in self.coeffs.items()})

    def project(self, start, stop):
        """Entries at positions start..stop-1, renumbered from 0."""
        return Vector._raw(
            self.ring,
            stop - start,
            {(pos - start, e): c for (pos, e), c in self.coeffs.items() if start <= pos < stop},
        )

    def key(self):
        return (self.rank, frozenset(self.coeffs.items()))

    def __eq__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        return self.rank == other.rank and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Vector({self})"

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components()) + ")"


def poly_add(f: Polynomial, g: Polynomial) -> Polynomial:
    return f + g


def poly_mul(f: Polynomial, g: Polynomial) -> Polynomial:
    return f * g


def leading_term(f: Polynomial, order: Optional[MonomialOrder] = None):
    return f.leading_term(order)


def require_homogeneous(polys, what="generator"):
    for f in polys:
        if not f.is_homogeneous():
            raise NonHomogeneousError(f"Non-homogeneous {what}: {f}")
