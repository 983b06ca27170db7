"""Finitely presented graded modules and submodule arithmetic.

Every module lives inside a free module R^t. An FPModule is the cokernel of a
presentation matrix; a Subquotient is U/V for submodules V ⊆ U of R^t. Kernels,
intersections and presentations all reduce to one primitive: a Groebner basis
in position-over-term order of a stacked matrix, read off below a position
threshold.
"""
import logging
import threading
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from src.algebra.groebner import (
    GroebnerBasis,
    Ideal,
    compute_basis,
    ideal_intersect,
    ideal_power,
    monomial_dimension,
)
from src.algebra.polyring import PolynomialRing, Vector
from src.models.schema import INFINITE
from src.utils.validators import NonHomogeneousError, certify

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreeModule:
    ring: PolynomialRing
    rank: int
    shifts: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError(f"Free module rank must be >= 0, got {self.rank}")
        if not self.shifts:
            object.__setattr__(self, "shifts", (0,) * self.rank)
        elif len(self.shifts) != self.rank:
            raise ValueError(f"{len(self.shifts)} shifts given for a free module of rank {self.rank}")

    def basis_vector(self, pos):
        return Vector.basis(self.ring, self.rank, pos)

    def basis_vectors(self):
        return [self.basis_vector(j) for j in range(self.rank)]

    def zero(self):
        return Vector.zero(self.ring, self.rank)


class ModuleMap:
    """A map of free modules given by the images of the source basis."""

    def __init__(self, source: FreeModule, target: FreeModule, columns: Sequence[Vector]):
        columns = list(columns)
        if len(columns) != source.rank:
            raise ValueError(f"{len(columns)} columns given for a source of rank {source.rank}")
        for col in columns:
            if col.rank != target.rank:
                raise ValueError(f"Column of rank {col.rank} does not fit a target of rank {target.rank}")
        self.source = source
        self.target = target
        self.columns = columns
        self.ring = target.ring

    @classmethod
    def from_columns(cls, ring, target_rank, columns):
        columns = list(columns)
        return cls(FreeModule(ring, len(columns)), FreeModule(ring, target_rank), columns)

    @classmethod
    def from_rows(cls, ring, rows):
        """Matrix given row by row; entries are polynomials or strings."""
        rows = [[ring.polynomial(e) for e in row] for row in rows]
        if not rows:
            raise ValueError("A presentation matrix needs at least one row")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValueError("Presentation matrix rows have different lengths")
        columns = [Vector.from_components(ring, [row[j] for row in rows]) for j in range(width)]
        return cls.from_columns(ring, len(rows), columns)

    def __repr__(self):
        return f"ModuleMap(R^{self.source.rank} -> R^{self.target.rank})"

    def apply(self, vec: Vector) -> Vector:
        result = self.target.zero()
        for pos, col in enumerate(self.columns):
            entry = vec.component(pos)
            if entry:
                result = result + col.scale(entry)
        return result

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self ∘ other."""
        return ModuleMap(other.source, self.target, [self.apply(col) for col in other.columns])

    def is_zero(self):
        return all(not col for col in self.columns)

    def kronecker(self, copies: int) -> "ModuleMap":
        """This map tensored with the identity of R^copies.

        Basis vector (a, c) of the tensor product sits at position a*copies + c.
        """
        ring = self.ring
        columns = []
        for col in self.columns:
            for c in range(copies):
                columns.append(
                    Vector._raw(
                        ring,
                        self.target.rank * copies,
                        {(pos * copies + c, e): v for (pos, e), v in col.coeffs.items()},
                    )
                )
        return ModuleMap(
            FreeModule(ring, self.source.rank * copies),
            FreeModule(ring, self.target.rank * copies),
            columns,
        )


def module_groebner(gens: Sequence[Vector], ambient: FreeModule) -> GroebnerBasis:
    """Reduced position-over-term basis of the span of gens in `ambient`."""
    for g in gens:
        if g.rank != ambient.rank:
            raise ValueError(f"Generator of rank {g.rank} outside R^{ambient.rank}")
    return compute_basis(ambient.ring, ambient.rank, [g.coeffs for g in gens])


def _lower_block(vectors, ring, split, total):
    """Basis elements of span(vectors) in R^total supported on positions >= split.

    Returns them projected to R^(total - split).
    """
    basis = compute_basis(ring, total, vectors)
    out = []
    for vec, (pos, _) in zip(basis.vectors, basis.leading_terms):
        if pos >= split:
            out.append(vec.project(split, total))
    return out


def syzygies(m: ModuleMap) -> ModuleMap:
    """A map whose image is ker(m).

    Computed from the basis of the columns (c_j; e_j) in R^(t+s): elements
    whose leading position lies in the lower block are exactly the kernel.
    """
    ring = m.ring
    t, s = m.target.rank, m.source.rank
    if s == 0:
        return ModuleMap(FreeModule(ring, 0), m.source, [])
    if t == 0 or m.is_zero():
        return ModuleMap(FreeModule(ring, s), m.source, m.source.basis_vectors())
    stacked = []
    for j, col in enumerate(m.columns):
        vec = dict(col.coeffs)
        vec[(t + j, (0,) * ring.nvars)] = 1
        stacked.append(vec)
    kernel = _lower_block(stacked, ring, t, t + s)
    syz = ModuleMap(FreeModule(ring, len(kernel)), m.source, kernel)
    certify(lambda: m.compose(syz).is_zero(), f"Syzygies of {m!r} do not compose to zero")
    logger.debug(f"Kernel of {m!r} has {len(kernel)} generators")
    return syz


def submodule_intersect(Ugens: Sequence[Vector], Wgens: Sequence[Vector], ambient: FreeModule) -> List[Vector]:
    """Generators of span(U) ∩ span(W) from the basis of (u; u), (w; 0)."""
    Ugens = [u for u in Ugens if u]
    Wgens = [w for w in Wgens if w]
    if not Ugens or not Wgens:
        return []
    t = ambient.rank
    stacked = []
    for u in Ugens:
        vec = dict(u.coeffs)
        vec.update({(pos + t, e): c for (pos, e), c in u.coeffs.items()})
        stacked.append(vec)
    stacked.extend(dict(w.coeffs) for w in Wgens)
    return _lower_block(stacked, ambient.ring, t, 2 * t)


class FPModule:
    """coker(R^s -> R^t) for a matrix of relations.

    Args:
        ring: the polynomial ring.
        rank: t, the number of generators.
        relations: column vectors in R^t.
        homogeneous: validate that every relation is homogeneous.
        name: label used in reports.
    """

    def __init__(self, ring: PolynomialRing, rank: int, relations: Sequence[Vector] = (), homogeneous=True, name=None):
        relations = [r for r in relations if r]
        self.ring = ring
        self.ambient = FreeModule(ring, rank)
        if homogeneous:
            for r in relations:
                if not r.is_homogeneous(self.ambient.shifts):
                    raise NonHomogeneousError(f"Non-homogeneous presentation column {r}")
        self.relations = relations
        self.presentation = ModuleMap(FreeModule(ring, len(relations)), self.ambient, relations)
        self.name = name
        self._basis = None
        self._lock = threading.Lock()

    @classmethod
    def free(cls, ring, rank=1, name=None):
        return cls(ring, rank, [], name=name or ("R" if rank == 1 else f"R^{rank}"))

    @classmethod
    def cyclic(cls, ring, ideal: Ideal, name=None):
        """R/I."""
        return cls(ring, 1, [g.as_vector() for g in ideal.generators], homogeneous=False, name=name or f"R/{ideal}")

    @classmethod
    def from_matrix(cls, ring, rows, name=None):
        m = ModuleMap.from_rows(ring, rows)
        return cls(ring, m.target.rank, m.columns, name=name)

    @property
    def rank(self):
        return self.ambient.rank

    @property
    def basis(self) -> GroebnerBasis:
        if self._basis is None:
            with self._lock:
                if self._basis is None:
                    self._basis = module_groebner(self.relations, self.ambient)
        return self._basis

    def key(self):
        """Identifies the module by its reduced presentation."""
        return (self.ring.variables, self.ring.p, self.ring.order, self.basis.key())

    def same_presentation(self, other: "FPModule"):
        return self.rank == other.rank and self.basis == other.basis

    def is_zero(self):
        return self.rank == 0 or self.basis.is_unit()

    def quotient_by_power(self, I: Ideal, n: int) -> "FPModule":
        """M / I^n M."""
        power = ideal_power(I, n)
        extra = [g.as_vector(self.rank, j) for g in power.generators for j in range(self.rank)]
        return FPModule(self.ring, self.rank, self.relations + extra, homogeneous=False, name=self._derived_name(f"/I^{n}"))

    def direct_sum(self, other: "FPModule") -> "FPModule":
        rank = self.rank + other.rank
        relations = [r.shifted(0, rank) for r in self.relations]
        relations += [r.shifted(self.rank, rank) for r in other.relations]
        name = f"{self.name} + {other.name}" if self.name and other.name else None
        return FPModule(self.ring, rank, relations, homogeneous=False, name=name)

    def as_subquotient(self) -> "Subquotient":
        return Subquotient(self.ambient, self.ambient.basis_vectors() + self.relations, self.relations)

    def length(self):
        return _coker_length(self.basis)

    def _derived_name(self, suffix):
        return f"{self.name}{suffix}" if self.name else None

    def __repr__(self):
        return f"FPModule({self.name or f'coker R^{len(self.relations)} -> R^{self.rank}'})"


class Subquotient:
    """U/V with V ⊆ U ⊆ ambient, both given by generators."""

    def __init__(self, ambient: FreeModule, numerator: Sequence[Vector], denominator: Sequence[Vector] = ()):
        self.ambient = ambient
        self.ring = ambient.ring
        self.numerator = [u for u in numerator if u]
        self.denominator = [v for v in denominator if v]
        self._num_basis = None
        self._den_basis = None
        self._presentation = None
        self._lock = threading.RLock()
        certify(
            lambda: all(self.numerator_basis.contains(v) for v in self.denominator),
            "Subquotient denominator is not contained in its numerator",
        )

    @property
    def numerator_basis(self) -> GroebnerBasis:
        if self._num_basis is None:
            with self._lock:
                if self._num_basis is None:
                    self._num_basis = module_groebner(self.numerator, self.ambient)
        return self._num_basis

    @property
    def denominator_basis(self) -> GroebnerBasis:
        if self._den_basis is None:
            with self._lock:
                if self._den_basis is None:
                    self._den_basis = module_groebner(self.denominator, self.ambient)
        return self._den_basis

    def is_zero(self):
        return all(self.denominator_basis.contains(u) for u in self.numerator)

    def contains(self, vec: Vector):
        """Membership in the numerator U."""
        return self.numerator_basis.contains(vec)

    def is_trivial_class(self, vec: Vector):
        """True when vec lies in the denominator V."""
        return self.denominator_basis.contains(vec)

    def same_as(self, other: "Subquotient"):
        """Equal numerators and denominators as submodules."""
        return (
            self.ambient.rank == other.ambient.rank
            and self.numerator_basis == other.numerator_basis
            and self.denominator_basis == other.denominator_basis
        )

    def presentation(self) -> FPModule:
        """U/V as coker of the relations among the generators of U modulo V."""
        if self._presentation is None:
            with self._lock:
                if self._presentation is None:
                    self._presentation = self._build_presentation()
        return self._presentation

    def _build_presentation(self):
        ring = self.ring
        gens = self.numerator_basis.vectors
        if not gens:
            return FPModule(ring, 0, [], homogeneous=False)
        u = len(gens)
        cover = ModuleMap(FreeModule(ring, u + len(self.denominator)), self.ambient, gens + self.denominator)
        syz = syzygies(cover)
        relations = [col.project(0, u) for col in syz.columns]
        return FPModule(ring, u, relations, homogeneous=False)

    def length(self):
        return module_length(self)

    def __repr__(self):
        return f"Subquotient({len(self.numerator)} / {len(self.denominator)} in R^{self.ambient.rank})"


def scale_module(I: Ideal, n: int, M: FPModule) -> Subquotient:
    """I^n M inside M, i.e. (I^n F + P) / P for M = F / P."""
    if n < 0:
        raise ValueError(f"Power must be >= 0, got {n}")
    power = ideal_power(I, n)
    gens = [g.as_vector(M.rank, j) for g in power.generators for j in range(M.rank)]
    return Subquotient(M.ambient, gens + M.relations, M.relations)


def annihilator(M) -> Ideal:
    """ann(M) = ∩_j (im P : e_j), read off from im P ∩ R e_j."""
    if isinstance(M, Subquotient):
        M = M.presentation()
    ring = M.ring
    if M.is_zero():
        return Ideal.unit(ring)
    if not M.relations:
        return Ideal.zero(ring)
    result = None
    for j in range(M.rank):
        meet = submodule_intersect(M.relations, [M.ambient.basis_vector(j)], M.ambient)
        colon = Ideal(ring, [v.component(j) for v in meet], homogeneous=False)
        result = colon if result is None else ideal_intersect(result, colon)
        if result.is_zero():
            break
    certify(
        lambda: all(
            M.basis.contains(M.ambient.basis_vector(j).scale(f)) for f in result.generators for j in range(M.rank)
        ),
        f"Annihilator of {M!r} does not kill its generators",
    )
    return result


def _coker_length(basis: GroebnerBasis):
    """Number of standard module monomials, or INFINITE."""
    nvars = basis.ring.nvars
    total = 0
    for pos in range(basis.rank):
        leads = [e for q, e in basis.leading_terms if q == pos]
        dim = monomial_dimension(nvars, leads)
        if dim > 0:
            return INFINITE
        if dim < 0:
            continue
        total += len(basis.standard_monomials(pos))
    return total


def module_length(S):
    """λ(S) for an FPModule or a Subquotient."""
    if isinstance(S, FPModule):
        return S.length()
    if S.is_zero():
        return 0
    return S.presentation().length()
