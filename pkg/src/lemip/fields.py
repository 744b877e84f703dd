"""Finite-field arithmetic for the protocol stack.

Two field families are supported behind one interface:

* prime fields F_p for p < 2^61 (sumcheck algebra, field-mode commitments),
* binary extension fields GF(2^k) for k <= 32 (bit-mode commitments,
  carry-less multiplication).

Also provides dense univariate polynomials, 3-CNF formulas, their
clause-term arithmetization, and multilinear extension of Boolean tables.
All values are canonical Python ints; elements are immutable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence


class FieldError(ValueError):
    """Raised on malformed field parameters or mixed-field arithmetic."""


# Low-weight irreducible polynomials for GF(2^k), k = 1..32, given as the
# exponents of the middle terms (the polynomial is x^k + ... + 1).  Standard
# published table of trinomials/pentanomials; every entry is re-verified by
# exhaustive divisor check at construction time.
_REDUCTION_EXPONENTS = {
    1: (),
    2: (1,),
    3: (1,),
    4: (1,),
    5: (2,),
    6: (1,),
    7: (1,),
    8: (4, 3, 1),
    9: (1,),
    10: (3,),
    11: (2,),
    12: (3,),
    13: (4, 3, 1),
    14: (5,),
    15: (1,),
    16: (5, 3, 1),
    17: (3,),
    18: (3,),
    19: (5, 2, 1),
    20: (3,),
    21: (2,),
    22: (1,),
    23: (5,),
    24: (4, 3, 1),
    25: (3,),
    26: (4, 3, 1),
    27: (5, 2, 1),
    28: (1,),
    29: (2,),
    30: (1,),
    31: (3,),
    32: (7, 3, 2),
}

MAX_PRIME_MODULUS = 1 << 61
MAX_BINARY_K = 32

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond 2^61."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    c = n + 1
    while not is_prime(c):
        c += 1
    return c


def default_reduction_poly(k: int) -> int:
    """Reduction polynomial for GF(2^k) as an int with bit k set."""
    if k not in _REDUCTION_EXPONENTS:
        raise FieldError(f"no reduction polynomial tabulated for k={k}")
    poly = (1 << k) | 1
    for e in _REDUCTION_EXPONENTS[k]:
        poly |= 1 << e
    return poly


def _poly_deg(p: int) -> int:
    return p.bit_length() - 1


def _poly_mod(a: int, m: int) -> int:
    dm = _poly_deg(m)
    while a.bit_length() - 1 >= dm and a:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _clmul(a: int, b: int) -> int:
    """Carry-less (GF(2)[x]) product of two bit-polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


_irreducible_cache: dict[int, bool] = {}


def gf2_poly_irreducible(poly: int) -> bool:
    """Exhaustive divisor check over GF(2)[x]; intended for degree <= 32."""
    cached = _irreducible_cache.get(poly)
    if cached is not None:
        return cached
    k = _poly_deg(poly)
    ok = k >= 1 and bool(poly & 1)  # constant or divisible by x otherwise
    if ok:
        # trial-divide by every polynomial of degree 1..k//2
        for d in range(2, 1 << (k // 2 + 1)):
            if _poly_mod(poly, d) == 0:
                ok = False
                break
    _irreducible_cache[poly] = ok
    return ok


class FieldSpec:
    """Parameters of a prime field F_p or a binary field GF(2^k).

    Prime moduli are primality-checked; binary reduction polynomials are
    verified irreducible by exhaustive divisor check (k <= 32).  Element
    values are canonical: 0 <= v < p, or v has fewer than 2^k bits.
    """

    __slots__ = ("kind", "modulus", "k", "order", "_hash")

    def __init__(self, kind: str, modulus: int, k: int | None = None):
        if kind == "prime":
            if not (2 <= modulus < MAX_PRIME_MODULUS):
                raise FieldError(f"prime modulus out of range: {modulus}")
            if not is_prime(modulus):
                raise FieldError(f"modulus {modulus} is not prime")
            self.kind = "prime"
            self.modulus = modulus
            self.k = modulus.bit_length()
            self.order = modulus
        elif kind == "binary":
            if k is None:
                k = _poly_deg(modulus)
            if not (1 <= k <= MAX_BINARY_K):
                raise FieldError(f"binary field degree out of range: {k}")
            if _poly_deg(modulus) != k:
                raise FieldError("reduction polynomial degree != k")
            if not gf2_poly_irreducible(modulus):
                raise FieldError(f"reduction polynomial {modulus:#x} is reducible")
            self.kind = "binary"
            self.modulus = modulus
            self.k = k
            self.order = 1 << k
        else:
            raise FieldError(f"unknown field kind: {kind}")
        self._hash = hash((self.kind, self.modulus))

    # -- constructors ------------------------------------------------------

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("prime", p)

    @classmethod
    def binary(cls, k: int, reduction_poly: int | None = None) -> "FieldSpec":
        if reduction_poly is None:
            reduction_poly = default_reduction_poly(k)
        return cls("binary", reduction_poly, k)

    @classmethod
    def for_security(cls, k: int, kind: str = "prime") -> "FieldSpec":
        """Field with ~2^k elements: next_prime(2^k), or GF(2^k)."""
        if kind == "prime":
            return cls.prime(next_prime(1 << k))
        return cls.binary(k)

    # -- raw-int arithmetic (hot paths) ------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a + b) % self.modulus
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a - b) % self.modulus
        return a ^ b

    def neg(self, a: int) -> int:
        if self.kind == "prime":
            return -a % self.modulus
        return a

    def mul(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return a * b % self.modulus
        return _poly_mod(_clmul(a, b), self.modulus)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.kind == "prime":
            return pow(a, self.modulus - 2, self.modulus)
        r, e = 1, self.order - 2
        base = a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.kind == "prime":
            return pow(a, e, self.modulus)
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def canonical(self, v: int) -> int:
        if self.kind == "prime":
            return v % self.modulus
        if v < 0 or v >= self.order:
            raise FieldError(f"{v} not canonical in GF(2^{self.k})")
        return v

    # -- element helpers ----------------------------------------------------

    def elem(self, v: int) -> "FieldElement":
        return FieldElement(self, self.canonical(v))

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def random_elem(self, rng: random.Random) -> "FieldElement":
        return FieldElement(self, rng.randrange(self.order))

    def elem_bytes(self) -> int:
        """Width of the canonical little-endian serialization."""
        return ((self.order - 1).bit_length() + 7) // 8

    def encode(self, v: int) -> bytes:
        return v.to_bytes(self.elem_bytes(), "little")

    def decode(self, raw: bytes) -> int:
        return self.canonical(int.from_bytes(raw, "little"))

    # -- plumbing ------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FieldSpec)
            and self.kind == other.kind
            and self.modulus == other.modulus
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.kind == "prime":
            return f"FieldSpec(F_{self.modulus})"
        return f"FieldSpec(GF(2^{self.k}), poly={self.modulus:#x})"


class FieldElement:
    """Immutable element of a FieldSpec; operators require matching specs."""

    __slots__ = ("spec", "value")

    def __init__(self, spec: FieldSpec, value: int):
        self.spec = spec
        self.value = value

    def _check(self, other: "FieldElement") -> None:
        if self.spec != other.spec:
            raise FieldError(f"mixed fields: {self.spec} vs {other.spec}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.spec, self.spec.add(self.value, other.value))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.spec, self.spec.sub(self.value, other.value))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.spec, self.spec.mul(self.value, other.value))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.neg(self.value))

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.spec, self.spec.mul(self.value, self.spec.inv(other.value)))

    def __pow__(self, e: int) -> "FieldElement":
        return FieldElement(self.spec, self.spec.pow(self.value, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.inv(self.value))

    def is_zero(self) -> bool:
        return self.value == 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.spec == other.spec and self.value == other.value
        if isinstance(other, int):
            return self.value == self.spec.canonical(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.spec, self.value))

    def __repr__(self) -> str:
        return f"{self.value}"

    def to_bytes(self) -> bytes:
        return self.spec.encode(self.value)


def ff_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    """Canonical field product; errors on mismatched specs."""
    return a * b


class UnivariatePoly:
    """Dense univariate polynomial, coefficients low-to-high degree."""

    __slots__ = ("spec", "coeffs")

    def __init__(self, spec: FieldSpec, coeffs: Sequence[int]):
        cs = [spec.canonical(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.spec = spec
        self.coeffs = cs

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def eval(self, x: int) -> int:
        """Horner evaluation at a raw field value."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = self.spec.add(self.spec.mul(acc, x), c)
        return acc

    def __add__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [0] * (n - len(self.coeffs))
        b = other.coeffs + [0] * (n - len(other.coeffs))
        return UnivariatePoly(self.spec, [self.spec.add(x, y) for x, y in zip(a, b)])

    def scale(self, s: int) -> "UnivariatePoly":
        return UnivariatePoly(self.spec, [self.spec.mul(c, s) for c in self.coeffs])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, UnivariatePoly)
            and self.spec == other.spec
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return f"UnivariatePoly({self.coeffs})"


def poly_eval(p: UnivariatePoly, x: FieldElement) -> FieldElement:
    if p.spec != x.spec:
        raise FieldError("polynomial and point live in different fields")
    return FieldElement(p.spec, p.eval(x.value))


def lagrange_interpolate(
    spec: FieldSpec, points: Sequence[tuple[int, int]]
) -> UnivariatePoly:
    """Unique polynomial of degree < len(points) through the given points.

    Independent of Horner evaluation; used as the fit/oracle route in tests
    and by the honest sumcheck prover to recover coefficients from samples.
    """
    xs = [x for x, _ in points]
    if len(set(xs)) != len(xs):
        raise FieldError("interpolation points must have distinct x")
    result = UnivariatePoly(spec, [])
    for i, (xi, yi) in enumerate(points):
        basis = UnivariatePoly(spec, [1])
        denom = 1
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            # basis *= (x - xj)
            shifted = [0] + basis.coeffs
            scaled = [spec.mul(c, spec.neg(xj)) for c in basis.coeffs] + [0]
            basis = UnivariatePoly(
                spec, [spec.add(a, b) for a, b in zip(shifted, scaled)]
            )
            denom = spec.mul(denom, spec.sub(xi, xj))
        result = result + basis.scale(spec.mul(yi, spec.inv(denom)))
    return result


@dataclass(frozen=True)
class Cnf3:
    """3-CNF over variables 1..m; clauses are tuples of signed indices.

    Negative index = negated variable.  Duplicate literals within a clause
    are normalized away (padding by repetition); opposite polarities of one
    variable may coexist in a clause.
    """

    m: int
    clauses: tuple[tuple[int, ...], ...]

    def __init__(self, m: int, clauses: Iterable[Iterable[int]]):
        normalized = []
        for clause in clauses:
            lits = tuple(dict.fromkeys(clause))
            if not lits:
                raise ValueError("empty clause")
            if len(lits) > 3:
                raise ValueError(f"clause with more than 3 literals: {lits}")
            for lit in lits:
                if lit == 0 or abs(lit) > m:
                    raise ValueError(f"literal {lit} out of range [1, {m}]")
            normalized.append(lits)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "clauses", tuple(normalized))

    def eval(self, assignment: Sequence[int]) -> int:
        """1 if every clause is satisfied by the 0/1 assignment (1-indexed)."""
        for clause in self.clauses:
            if not any(
                (assignment[abs(l) - 1] == 1) == (l > 0) for l in clause
            ):
                return 0
        return 1


class ArithPoly:
    """Clause-term arithmetization of a 3-CNF.

    f = sum over clauses of prod over literals (1 - val(lit)) with
    val(x) = x and val(not x) = 1 - x, so f(z) = 0 iff every clause holds
    at a Boolean z.  Kept in clause-term form and never expanded.
    """

    __slots__ = ("phi", "cnt", "degree")

    def __init__(self, phi: Cnf3):
        self.phi = phi
        self.cnt = len(phi.clauses)
        self.degree = max((len(c) for c in phi.clauses), default=0)

    def var_degree(self, var: int) -> int:
        """Degree of f in variable `var` (max occurrences in one clause)."""
        return max(
            (sum(1 for l in c if abs(l) == var) for c in self.phi.clauses),
            default=0,
        )

    def eval(self, spec: FieldSpec, point: Sequence[int]) -> int:
        """Evaluate at a raw field point (1-indexed variables)."""
        total = 0
        for clause in self.phi.clauses:
            term = 1
            for lit in clause:
                v = point[abs(lit) - 1]
                factor = spec.sub(1, v) if lit > 0 else v
                if factor == 0:
                    term = 0
                    break
                term = spec.mul(term, factor)
            total = spec.add(total, term)
        return total


def arithmetize(phi: Cnf3) -> ArithPoly:
    return ArithPoly(phi)


def multilinear_extension(
    table: Sequence[int], point: Sequence[FieldElement]
) -> FieldElement:
    """Evaluate the multilinear extension of a Boolean table at a point.

    table[b] is the value at the cube point whose j-th coordinate is bit j
    of b (LSB first); len(table) must be 2^len(point).
    """
    s = len(point)
    if len(table) != (1 << s):
        raise FieldError(f"table size {len(table)} != 2^{s}")
    spec = point[0].spec
    coords = [q.value for q in point]
    return FieldElement(spec, mle_eval_raw(spec, table, coords))


def mle_eval_raw(spec: FieldSpec, table: Sequence[int], coords: Sequence[int]) -> int:
    """Raw-int multilinear extension used in protocol hot paths."""
    total = 0
    one = 1
    for b, a_b in enumerate(table):
        if a_b == 0:
            continue
        w = a_b
        for j, q in enumerate(coords):
            w = spec.mul(w, q if (b >> j) & 1 else spec.sub(one, q))
            if w == 0:
                break
        total = spec.add(total, w)
    return total


def boolean_cube(n: int) -> Iterable[tuple[int, ...]]:
    """All 0/1 assignments of n variables, LSB-first index order."""
    for b in range(1 << n):
        yield tuple((b >> j) & 1 for j in range(n))
