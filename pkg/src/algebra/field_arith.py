import logging
from dataclasses import dataclass

from sympy import isprime

logger = logging.getLogger(__name__)

DEFAULT_CHARACTERISTIC = 32003


class PrimeField:
    """The prime field F_p used as coefficient field k.

    Kernels work on plain integer residues through the methods below;
    FieldScalar wraps a residue for the public API.
    """

    def __init__(self, p=DEFAULT_CHARACTERISTIC):
        """Validate the characteristic.

        Args:
            p (int): A prime. Small primes are accepted with a warning.
        """
        if not isinstance(p, int) or p < 2 or not isprime(p):
            raise ValueError(f"Characteristic must be a prime integer, got {p!r}")
        if p < DEFAULT_CHARACTERISTIC:
            logger.warning(
                f"Working over F_{p}: lengths may depend on the characteristic for small primes"
            )
        self.p = p

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __call__(self, value):
        return FieldScalar(self.reduce(value), self.p)

    def reduce(self, value):
        """Reduce an integer (or a rational with numerator/denominator) mod p."""
        if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, int):
            num, den = int(value.numerator), int(value.denominator)
            if den % self.p == 0:
                raise ZeroDivisionError(f"Denominator {den} vanishes mod {self.p}")
            return num * pow(den, -1, self.p) % self.p
        return int(value) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return -a % self.p

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(a, -1, self.p)

    def symmetric(self, a):
        """Representative in (-p/2, p/2], used for printing."""
        return a - self.p if a > self.p // 2 else a


@dataclass(frozen=True)
class FieldScalar:
    """An element of F_p, always fully reduced."""

    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise ValueError(f"{self.value} is not reduced mod {self.p}")

    def _check(self, other):
        if not isinstance(other, FieldScalar):
            other = FieldScalar(int(other) % self.p, self.p)
        if other.p != self.p:
            raise ValueError(f"Cannot combine elements of F_{self.p} and F_{other.p}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FieldScalar((self.value + other.value) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return FieldScalar((self.value - other.value) % self.p, self.p)

    def __neg__(self):
        return FieldScalar(-self.value % self.p, self.p)

    def __mul__(self, other):
        other = self._check(other)
        return FieldScalar(self.value * other.value % self.p, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * inv(self._check(other))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def add(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    return a + b


def mul(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    return a * b


def inv(a: FieldScalar) -> FieldScalar:
    if a.value == 0:
        raise ZeroDivisionError(f"0 has no inverse in F_{a.p}")
    return FieldScalar(pow(a.value, -1, a.p), a.p)
