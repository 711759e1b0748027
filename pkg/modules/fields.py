"""
Exact field arithmetic behind one scalar interface.

Three kinds of field are supported:

    Q           arbitrary-precision rationals, elements are ``fractions.Fraction``
    GF(p)       prime fields, elements are ``PrimeFieldElement``
    Q(sqrt d)   real quadratic extensions, elements are ``QuadraticElement``

Matrix code only talks to the ``Field`` object carried next to a matrix
(``field.zero``, ``field.inverse(x)``, ``field.is_zero(x)`` ...) and to the
ordinary Python operators, so one elimination routine serves all three.
Mixing elements of two different fields raises ``FieldMismatchError``.
Plain ``int`` operands are accepted everywhere (the image of Z).

Scalar text syntax (used by every file format):

    Q           "a/b" or "a"
    GF(p)       "k mod p"
    Q(sqrt d)   "a+b*sqrt(d)" (short forms "a", "b*sqrt(d)" are accepted on input)
"""

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional, Union

import numpy as np
from sympy import factorint, isprime, nextprime, primefactors
from sympy.ntheory.residue_ntheory import sqrt_mod

from modules.errors import (
    ExpressionParseError,
    FieldArithmeticError,
    FieldMismatchError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
_PRIME_RE = re.compile(r"^\s*([+-]?\d+)\s+mod\s+(\d+)\s*$")
_QUADRATIC_RE = re.compile(
    r"^\s*(?:(?P<a>[+-]?\d+(?:/\d+)?)\s*(?P<sign>[+-])\s*)?"
    r"(?P<b>[+-]?\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(?P<d>\d+)\s*\)\s*$"
)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_rational(text: str) -> Fraction:
    match = _RATIONAL_RE.match(text)
    if not match:
        raise ExpressionParseError(f"Not a rational scalar: '{text}'")
    numerator, denominator = match.groups()
    if denominator is not None and int(denominator) == 0:
        raise ExpressionParseError(f"Zero denominator in '{text}'")
    return Fraction(int(numerator), int(denominator or 1))


def _format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _rational_sqrt(value: Fraction) -> Optional[Fraction]:
    """Return the non-negative rational square root of ``value``, or None."""
    value = Fraction(value)
    if value < 0:
        return None
    num_root = isqrt(value.numerator)
    den_root = isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


# ─────────────────────────────────────────────────────────
# Element types
# ─────────────────────────────────────────────────────────
@dataclass(frozen=True)
class PrimeFieldElement:
    """An element of GF(p), stored as its representative in [0, p)."""

    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"{self.value} is not reduced modulo {self.modulus}")

    def _coerce(self, other):
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.modulus:
                raise FieldMismatchError(
                    f"Cannot combine GF({self.modulus}) with GF({other.modulus})"
                )
            return other.value
        if _is_int(other):
            return other % self.modulus
        if isinstance(other, np.ndarray):
            return NotImplemented
        raise FieldMismatchError(
            f"Cannot combine GF({self.modulus}) with {type(other).__name__}"
        )

    def _make(self, value: int) -> "PrimeFieldElement":
        return PrimeFieldElement(value % self.modulus, self.modulus)

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self._make(self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self._make(self.value - v)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self._make(v - self.value)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self._make(self.value * v)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self * self._make(v).inverse()

    def __rtruediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self._make(v) * self.inverse()

    def __neg__(self):
        return self._make(-self.value)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return self._make(pow(self.value, exponent, self.modulus))

    def inverse(self) -> "PrimeFieldElement":
        if self.value == 0:
            raise FieldArithmeticError(f"0 has no inverse in GF({self.modulus})")
        return self._make(pow(self.value, -1, self.modulus))

    def is_zero(self) -> bool:
        return self.value == 0

    def __eq__(self, other):
        if isinstance(other, PrimeFieldElement):
            return self.value == other.value and self.modulus == other.modulus
        if _is_int(other):
            return self.value == other % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __repr__(self):
        return f"{self.value} mod {self.modulus}"


@dataclass(frozen=True)
class QuadraticElement:
    """An element a + b*sqrt(d) of Q(sqrt d); d is squarefree and greater than 1."""

    a: Fraction
    b: Fraction
    d: int

    def _coerce(self, other):
        if isinstance(other, QuadraticElement):
            if other.d != self.d:
                raise FieldMismatchError(
                    f"Cannot combine Q(sqrt {self.d}) with Q(sqrt {other.d})"
                )
            return other.a, other.b
        if _is_int(other) or isinstance(other, Fraction):
            return Fraction(other), Fraction(0)
        if isinstance(other, np.ndarray):
            return NotImplemented
        raise FieldMismatchError(
            f"Cannot combine Q(sqrt {self.d}) with {type(other).__name__}"
        )

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return QuadraticElement(self.a + v[0], self.b + v[1], self.d)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return QuadraticElement(self.a - v[0], self.b - v[1], self.d)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return QuadraticElement(v[0] - self.a, v[1] - self.b, self.d)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        c, e = v
        return QuadraticElement(
            self.a * c + self.b * e * self.d,
            self.a * e + self.b * c,
            self.d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self * QuadraticElement(v[0], v[1], self.d).inverse()

    def __rtruediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return QuadraticElement(v[0], v[1], self.d) * self.inverse()

    def __neg__(self):
        return QuadraticElement(-self.a, -self.b, self.d)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = QuadraticElement(Fraction(1), Fraction(0), self.d)
        for _ in range(exponent):
            result = result * self
        return result

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "QuadraticElement":
        norm = self.norm()
        # d is not a square, so the norm vanishes only at zero
        if norm == 0:
            raise FieldArithmeticError(f"0 has no inverse in Q(sqrt {self.d})")
        return QuadraticElement(self.a / norm, -self.b / norm, self.d)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __eq__(self, other):
        if isinstance(other, QuadraticElement):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if _is_int(other) or isinstance(other, Fraction):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __repr__(self):
        return QuadraticField(self.d).format(self)


FieldElement = Union[Fraction, PrimeFieldElement, QuadraticElement]


# ─────────────────────────────────────────────────────────
# Field instances
# ─────────────────────────────────────────────────────────
class Field(ABC):
    """Common interface of the three supported field kinds."""

    descriptor: str
    characteristic: int

    @property
    @abstractmethod
    def zero(self) -> FieldElement: ...

    @property
    @abstractmethod
    def one(self) -> FieldElement: ...

    @abstractmethod
    def __call__(self, value) -> FieldElement:
        """Convert an int, Fraction, scalar string or own element into this field."""

    @abstractmethod
    def contains(self, value) -> bool: ...

    @abstractmethod
    def parse(self, text: str) -> FieldElement: ...

    @abstractmethod
    def format(self, value: FieldElement) -> str: ...

    @abstractmethod
    def sqrt(self, value: FieldElement) -> Optional[FieldElement]:
        """Return a square root of ``value`` in this field, or None if there is none."""

    @abstractmethod
    def random_element(self, rng: np.random.Generator, nonzero: bool = False) -> FieldElement: ...

    # -- checked arithmetic --------------------------------------------------
    def check(self, *values) -> None:
        """Raise FieldMismatchError unless every value belongs to this field."""
        for value in values:
            if not self.contains(value):
                raise FieldMismatchError(
                    f"{value!r} ({type(value).__name__}) is not an element of {self.descriptor}"
                )

    def is_zero(self, value: FieldElement) -> bool:
        return value == 0

    def add(self, x, y):
        self.check(x, y)
        return x + y

    def sub(self, x, y):
        self.check(x, y)
        return x - y

    def mul(self, x, y):
        self.check(x, y)
        return x * y

    def neg(self, x):
        self.check(x)
        return -x

    def inverse(self, x):
        self.check(x)
        if self.is_zero(x):
            raise FieldArithmeticError(f"0 has no inverse in {self.descriptor}")
        return self.one / x

    def div(self, x, y):
        self.check(x, y)
        return x * self.inverse(y)

    def equal(self, x, y) -> bool:
        self.check(x, y)
        return self.is_zero(x - y)

    # -- matrices --------------------------------------------------------------
    def zeros(self, rows: int, cols: int) -> np.ndarray:
        matrix = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                matrix[i, j] = self.zero
        return matrix

    def identity(self, n: int) -> np.ndarray:
        matrix = self.zeros(n, n)
        for i in range(n):
            matrix[i, i] = self.one
        return matrix

    def matrix(self, rows) -> np.ndarray:
        """Build an object-dtype matrix from nested lists of convertible values."""
        rows = [list(row) for row in rows]
        n_cols = len(rows[0]) if rows else 0
        matrix = np.empty((len(rows), n_cols), dtype=object)
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise PreconditionError("Ragged matrix rows")
            for j, value in enumerate(row):
                matrix[i, j] = self(value)
        return matrix

    def check_matrix(self, matrix: np.ndarray) -> None:
        """Reject a matrix holding any entry from a different field."""
        for value in matrix.flat:
            self.check(value)

    def is_zero_matrix(self, matrix: np.ndarray) -> bool:
        return all(self.is_zero(value) for value in matrix.flat)

    def __str__(self):
        return self.descriptor


@dataclass(frozen=True, eq=True)
class RationalField(Field):
    descriptor: str = "Q"
    characteristic: int = 0

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def __call__(self, value) -> Fraction:
        if isinstance(value, str):
            return self.parse(value)
        if _is_int(value) or isinstance(value, Fraction):
            return Fraction(value)
        raise FieldMismatchError(f"Cannot convert {type(value).__name__} into Q")

    def contains(self, value) -> bool:
        return _is_int(value) or isinstance(value, Fraction)

    def parse(self, text: str) -> Fraction:
        return _parse_rational(text)

    def format(self, value) -> str:
        self.check(value)
        return _format_rational(value)

    def sqrt(self, value) -> Optional[Fraction]:
        self.check(value)
        return _rational_sqrt(value)

    def random_element(self, rng, nonzero=False) -> Fraction:
        while True:
            value = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10)))
            if not (nonzero and value == 0):
                return value


@dataclass(frozen=True, eq=True)
class PrimeField(Field):
    p: int

    def __post_init__(self):
        if not isprime(self.p):
            raise PreconditionError(f"GF(p) needs a prime modulus, got {self.p}")

    @property
    def descriptor(self) -> str:
        return f"GFp:{self.p}"

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def zero(self) -> PrimeFieldElement:
        return PrimeFieldElement(0, self.p)

    @property
    def one(self) -> PrimeFieldElement:
        return PrimeFieldElement(1 % self.p, self.p)

    def __call__(self, value) -> PrimeFieldElement:
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, PrimeFieldElement):
            self.check(value)
            return value
        if _is_int(value):
            return PrimeFieldElement(value % self.p, self.p)
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise FieldArithmeticError(
                    f"{_format_rational(value)} is not representable in GF({self.p})"
                )
            return self(value.numerator) * self(value.denominator).inverse()
        raise FieldMismatchError(f"Cannot convert {type(value).__name__} into GF({self.p})")

    def contains(self, value) -> bool:
        return _is_int(value) or (
            isinstance(value, PrimeFieldElement) and value.modulus == self.p
        )

    def is_zero(self, value) -> bool:
        if isinstance(value, PrimeFieldElement):
            return value.value == 0
        return value % self.p == 0

    def parse(self, text: str) -> PrimeFieldElement:
        match = _PRIME_RE.match(text)
        if match:
            value, modulus = int(match.group(1)), int(match.group(2))
            if modulus != self.p:
                raise FieldMismatchError(f"'{text}' is not an element of GF({self.p})")
            return self(value)
        match = _RATIONAL_RE.match(text)
        if match and match.group(2) is None:
            return self(int(match.group(1)))
        raise ExpressionParseError(f"Not a GF({self.p}) scalar: '{text}'")

    def format(self, value) -> str:
        return repr(self(value))

    def sqrt(self, value) -> Optional[PrimeFieldElement]:
        return square_root_mod_p(self(value))

    def random_element(self, rng, nonzero=False) -> PrimeFieldElement:
        low = 1 if nonzero else 0
        return PrimeFieldElement(int(rng.integers(low, self.p)), self.p)


@dataclass(frozen=True, eq=True)
class QuadraticField(Field):
    d: int

    def __post_init__(self):
        if self.d <= 1 or any(exp > 1 for exp in factorint(self.d).values()):
            raise PreconditionError(f"Q(sqrt d) needs a squarefree d > 1, got {self.d}")

    @property
    def descriptor(self) -> str:
        return f"Qsqrt:{self.d}"

    @property
    def characteristic(self) -> int:
        return 0

    @property
    def zero(self) -> QuadraticElement:
        return QuadraticElement(Fraction(0), Fraction(0), self.d)

    @property
    def one(self) -> QuadraticElement:
        return QuadraticElement(Fraction(1), Fraction(0), self.d)

    @property
    def root(self) -> QuadraticElement:
        """The element sqrt(d)."""
        return QuadraticElement(Fraction(0), Fraction(1), self.d)

    def __call__(self, value) -> QuadraticElement:
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, QuadraticElement):
            self.check(value)
            return value
        if _is_int(value) or isinstance(value, Fraction):
            return QuadraticElement(Fraction(value), Fraction(0), self.d)
        raise FieldMismatchError(
            f"Cannot convert {type(value).__name__} into Q(sqrt {self.d})"
        )

    def contains(self, value) -> bool:
        if isinstance(value, QuadraticElement):
            return value.d == self.d
        return _is_int(value) or isinstance(value, Fraction)

    def is_zero(self, value) -> bool:
        if isinstance(value, QuadraticElement):
            return value.is_zero()
        return value == 0

    def parse(self, text: str) -> QuadraticElement:
        match = _QUADRATIC_RE.match(text)
        if match:
            if int(match.group("d")) != self.d:
                raise FieldMismatchError(f"'{text}' is not an element of Q(sqrt {self.d})")
            a = _parse_rational(match.group("a")) if match.group("a") else Fraction(0)
            b = _parse_rational(match.group("b"))
            if match.group("sign") == "-":
                b = -b
            return QuadraticElement(a, b, self.d)
        if _RATIONAL_RE.match(text):
            return self(_parse_rational(text))
        raise ExpressionParseError(f"Not a Q(sqrt {self.d}) scalar: '{text}'")

    def format(self, value) -> str:
        value = self(value)
        sign = "-" if value.b < 0 else "+"
        return f"{_format_rational(value.a)}{sign}{_format_rational(abs(value.b))}*sqrt({self.d})"

    def sqrt(self, value) -> Optional[QuadraticElement]:
        value = self(value)
        if value.b == 0:
            root = _rational_sqrt(value.a)
            if root is not None:
                return self(root)
            # (s*sqrt d)^2 = s^2 d
            root = _rational_sqrt(value.a / self.d)
            if root is not None:
                return QuadraticElement(Fraction(0), root, self.d)
            return None
        # (u + v sqrt d)^2 = a + b sqrt d  =>  u^2 + d v^2 = a, 2uv = b
        t = _rational_sqrt(value.norm())
        if t is None:
            return None
        for candidate in ((value.a + t) / 2, (value.a - t) / 2):
            u = _rational_sqrt(candidate)
            if u is not None and not self.is_zero(u):
                return QuadraticElement(u, value.b / (2 * u), self.d)
        return None

    def random_element(self, rng, nonzero=False) -> QuadraticElement:
        rationals = RationalField()
        while True:
            value = QuadraticElement(
                rationals.random_element(rng), rationals.random_element(rng), self.d
            )
            if not (nonzero and value.is_zero()):
                return value


# ─────────────────────────────────────────────────────────
# Field lookup and number theory helpers
# ─────────────────────────────────────────────────────────
@lru_cache(maxsize=None)
def get_field(descriptor: str) -> Field:
    """Return the field named by a descriptor: "Q", "GFp:<p>" or "Qsqrt:<d>".

    Args:
        descriptor: Field descriptor as used by the ``--field`` flag and file formats.

    Returns:
        Field: A cached field instance.

    Raises:
        ExpressionParseError: If the descriptor is malformed.
        PreconditionError: If p is not prime or d is not squarefree.
    """
    text = descriptor.strip()
    if text == "Q":
        return RationalField()
    match = re.fullmatch(r"GFp:(\d+)", text)
    if match:
        return PrimeField(int(match.group(1)))
    match = re.fullmatch(r"Qsqrt:(\d+)", text)
    if match:
        return QuadraticField(int(match.group(1)))
    raise ExpressionParseError(f"Unknown field descriptor '{descriptor}'")


def element_of_order(n: int, p: int) -> PrimeFieldElement:
    """Return the smallest element of GF(p) whose multiplicative order is exactly n.

    Candidates g = 2, 3, ... are raised to (p-1)/n; the first power of exact
    order n generates the cyclic subgroup of order n, and the smallest of its
    generators is returned so the choice is canonical.

    Candidates are scanned in increasing order rather than drawn from a seeded
    generator, so the same (n, p) always gives the same Fourier root.

    Raises:
        PreconditionError: If p is not prime or p is not 1 modulo n.
    """
    if n < 1:
        raise PreconditionError(f"Order must be positive, got {n}")
    if not isprime(p):
        raise PreconditionError(f"{p} is not prime")
    if (p - 1) % n != 0:
        raise PreconditionError(
            f"GF({p}) has no element of order {n}: {p} is not 1 modulo {n}"
        )
    field = PrimeField(p)
    if n == 1:
        return field.one

    order_primes = primefactors(n)
    cofactor = (p - 1) // n
    for g in range(2, p):
        h = pow(g, cofactor, p)
        if all(pow(h, n // q, p) != 1 for q in order_primes):
            generators = [pow(h, j, p) for j in range(1, n + 1) if gcd(j, n) == 1]
            return field(min(generators))
    # unreachable for prime p: GF(p)* is cyclic
    raise PreconditionError(f"No element of order {n} found in GF({p})")


def square_root_mod_p(a: PrimeFieldElement) -> Optional[PrimeFieldElement]:
    """Return the smallest s with s*s = a in GF(p), or None for a non-residue."""
    roots = sqrt_mod(a.value, a.modulus, all_roots=True)
    if not roots:
        return None
    return PrimeFieldElement(min(int(r) for r in roots), a.modulus)


def smallest_fourier_prime(n: int, minimum: int = 3) -> int:
    """Smallest odd prime p >= minimum with p = 1 (mod n)."""
    p = nextprime(minimum - 1)
    while (p - 1) % n != 0 or p == 2:
        p = nextprime(p)
    return int(p)


def scalar_for_norm(field: Field, norm) -> FieldElement:
    """Return s with s*s*norm = 1, raising PreconditionError when the field has none."""
    norm = field(norm)
    if field.is_zero(norm):
        raise PreconditionError(f"Cannot normalize by zero in {field.descriptor}")
    root = field.sqrt(field.one / norm)
    if root is None:
        raise PreconditionError(
            f"{field.descriptor} has no s with s^2 * {field.format(norm)} = 1"
        )
    return root
