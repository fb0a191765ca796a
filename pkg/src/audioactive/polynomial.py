"""Dense integer polynomials and the prime-field helpers built on them.

``IntPolynomial`` stores exact Python ints in ascending-degree order.  The
``*_mod`` helpers work on numpy ``int64`` coefficient vectors over a prime
field; primes are kept below ``2**26`` so that a dot product of up to 2048
reduced terms cannot overflow.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import NotAFactorError

MAX_MOD_PRIME = 1 << 26


class IntPolynomial:
    """Immutable polynomial with arbitrary-precision integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()):
        c = [int(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[int, ...] = tuple(c)

    @classmethod
    def x(cls) -> "IntPolynomial":
        return cls([0, 1])

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> "IntPolynomial":
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.lead == 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __eq__(self, other):
        if isinstance(other, IntPolynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == IntPolynomial([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self), len(other))
        return IntPolynomial(self[k] + other[k] for k in range(n))

    def __neg__(self):
        return IntPolynomial(-c for c in self.coeffs)

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return IntPolynomial()
        out = [0] * (len(self) + len(other) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "IntPolynomial":
        result, base = IntPolynomial([1]), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)})"

    def __str__(self):
        return self.to_string()

    def to_string(self, var: str = "x") -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if k == 0:
                body = str(a)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if a == 1 else f"{a}*{mono}"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        return out + "".join(f" {s} {b}" for s, b in terms[1:])

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(k * c for k, c in enumerate(self.coeffs) if k)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPolynomial":
        """Divide out the content and make the leading coefficient positive."""
        if self.is_zero():
            return self
        g = self.content() * (1 if self.lead > 0 else -1)
        return IntPolynomial(c // g for c in self.coeffs)

    def __call__(self, x):
        """Horner evaluation; works for ints, Fractions and mpmath numbers."""
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mp(self, x, prec: int = 256):
        with mpmath.workprec(prec):
            xm = mpmath.mpf(x)
            acc = mpmath.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * xm + c
            return acc

    def reduce_mod(self, p: int) -> np.ndarray:
        return np.array([c % p for c in self.coeffs], dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps([str(c) for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> "IntPolynomial":
        return cls(int(c) for c in json.loads(text))


def divmod_poly(p: IntPolynomial, q: IntPolynomial) -> tuple[IntPolynomial, IntPolynomial]:
    """Division with remainder when the leading coefficient of ``q`` divides exactly.

    Raises :class:`NotAFactorError` if a quotient coefficient is not an integer.
    """
    if q.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p.coeffs)
    dq, lq = q.degree, q.lead
    if p.degree < dq:
        return IntPolynomial(), p
    quot = [0] * (p.degree - dq + 1)
    for k in range(p.degree - dq, -1, -1):
        c = rem[k + dq]
        if c == 0:
            continue
        t, r = divmod(c, lq)
        if r:
            raise NotAFactorError("quotient is not integral")
        quot[k] = t
        for i, b in enumerate(q.coeffs):
            rem[k + i] -= t * b
    return IntPolynomial(quot), IntPolynomial(rem)


def divide_exact(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """``p / q``, raising :class:`NotAFactorError` unless the remainder is zero."""
    quot, rem = divmod_poly(p, q)
    if not rem.is_zero():
        raise NotAFactorError(f"{q} does not divide the polynomial")
    return quot


def pseudo_remainder(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    rem = list(p.coeffs)
    dq, lq = q.degree, q.lead
    for k in range(len(rem) - 1, dq - 1, -1):
        c = rem[k]
        rem = [lq * v for v in rem]
        for i, b in enumerate(q.coeffs):
            rem[k - dq + i] -= c * b
        rem.pop()
    return IntPolynomial(rem)


def gcd(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """Primitive gcd over the integers (primitive remainder sequence)."""
    a, b = p.primitive(), q.primitive()
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        a, b = b, pseudo_remainder(a, b).primitive()
    if a.degree == 0:
        return IntPolynomial([1])
    return a.primitive()


@lru_cache(maxsize=None)
def cyclotomic(m: int) -> IntPolynomial:
    """The ``m``-th cyclotomic polynomial, built from ``x^m - 1`` by division."""
    poly = IntPolynomial([-1] + [0] * (m - 1) + [1])
    for d in range(1, m):
        if m % d == 0:
            poly = divide_exact(poly, cyclotomic(d))
    return poly


# --- prime-field vectors (ascending coefficients, int64, trimmed) ---------


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
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


def primes_from(start: int, count: int | None = None, below: int | None = None):
    """Primes ``>= start`` in increasing order."""
    n, found = max(start, 2), 0
    while count is None or found < count:
        if below is not None and n >= below:
            return
        if is_prime(n):
            yield n
            found += 1
        n += 1


def primes_below(stop: int, count: int | None = None):
    """Primes ``< stop`` in decreasing order."""
    n, found = stop - 1, 0
    while n >= 2 and (count is None or found < count):
        if is_prime(n):
            yield n
            found += 1
        n -= 1


def trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    return a[: nz[-1] + 1] if nz.size else a[:0]


def monic_mod(a: np.ndarray, p: int) -> np.ndarray:
    inv = pow(int(a[-1]), -1, p)
    return a * inv % p


def mul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if not len(a) or not len(b):
        return a[:0]
    if min(len(a), len(b)) > 2048:
        raise ValueError("operands too long for overflow-free convolution")
    return trim(np.convolve(a, b) % p)


def rem_mod(a: np.ndarray, m: np.ndarray, p: int) -> np.ndarray:
    """Remainder of ``a`` modulo ``m`` over GF(p)."""
    a = a.copy()
    dm = len(m) - 1
    if len(a) - 1 < dm:
        return trim(a)
    inv = pow(int(m[-1]), -1, p)
    for k in range(len(a) - 1, dm - 1, -1):
        c = int(a[k]) * inv % p
        if c:
            a[k - dm : k + 1] = (a[k - dm : k + 1] - c * m) % p
    return trim(a[:dm])


def divmod_mod(a: np.ndarray, m: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    a = a.copy()
    dm = len(m) - 1
    if len(a) - 1 < dm:
        return a[:0], trim(a)
    inv = pow(int(m[-1]), -1, p)
    q = np.zeros(len(a) - dm, dtype=np.int64)
    for k in range(len(a) - 1, dm - 1, -1):
        c = int(a[k]) * inv % p
        if c:
            q[k - dm] = c
            a[k - dm : k + 1] = (a[k - dm : k + 1] - c * m) % p
    return trim(q), trim(a[:dm])


def gcd_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Monic gcd over GF(p)."""
    a, b = trim(a % p), trim(b % p)
    while len(b):
        a, b = b, rem_mod(a, b, p)
    return monic_mod(a, p) if len(a) else a


def derivative_mod(a: np.ndarray, p: int) -> np.ndarray:
    if len(a) <= 1:
        return a[:0]
    return trim(a[1:] * np.arange(1, len(a), dtype=np.int64) % p)


def crt_lift(residue_vectors: Sequence[np.ndarray], primes: Sequence[int]) -> list[int]:
    """Combine coefficient vectors mod several primes; symmetric lift to Z."""
    n = max(len(v) for v in residue_vectors)
    coeffs = [0] * n
    modulus = 1
    for vec, p in zip(residue_vectors, primes):
        vals = [int(vec[k]) if k < len(vec) else 0 for k in range(n)]
        inv = pow(modulus % p, -1, p)
        for k in range(n):
            t = (vals[k] - coeffs[k]) * inv % p
            coeffs[k] += modulus * t
        modulus *= p
    half = modulus // 2
    return [c - modulus if c > half else c for c in coeffs]
