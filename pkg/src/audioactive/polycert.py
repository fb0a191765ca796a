"""Factor stripping and irreducibility certificates from mod-p degree patterns.

A polynomial that factors over the integers factors compatibly modulo every
good prime, so the degree of any integer factor is a subset sum of each
prime's factor-degree pattern.  If the subset sums shared by all tried primes
are only ``0`` and the full degree, the polynomial is irreducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import mpmath
import numpy as np

from .polynomial import (
    IntPolynomial,
    cyclotomic,
    derivative_mod,
    divide_exact,
    divmod_mod,
    divmod_poly,
    gcd,
    gcd_mod,
    monic_mod,
    primes_from,
    trim,
)

log = logging.getLogger(__name__)

FIRST_PATTERN_PRIME = 1009


@dataclass(frozen=True)
class Factor:
    label: str
    poly: IntPolynomial
    multiplicity: int

    @property
    def degree(self) -> int:
        return self.poly.degree * self.multiplicity


def squarefree_mod(poly: IntPolynomial, p: int) -> bool:
    if poly.lead % p == 0:
        return False
    f = trim(poly.reduce_mod(p))
    return len(gcd_mod(f, derivative_mod(f, p), p)) == 1


def squarefree_part(poly: IntPolynomial, probe_primes: int = 3) -> IntPolynomial:
    """``poly / gcd(poly, poly')`` made primitive.

    A prime modulo which ``poly`` keeps its degree and is square-free
    certifies square-freeness over the integers, which skips the exact gcd in
    the common case.
    """
    if poly.is_zero():
        raise ValueError("zero polynomial")
    if poly.degree < 1:
        return poly.primitive()
    for p in primes_from(FIRST_PATTERN_PRIME, probe_primes):
        if squarefree_mod(poly, p):
            return poly.primitive()
    g = gcd(poly, poly.derivative())
    if g.degree == 0:
        return poly.primitive()
    # g is primitive, so the quotient is integral (Gauss's lemma)
    return divide_exact(poly.primitive(), g).primitive()


def strip_trivial_factors(poly: IntPolynomial, max_cyc_order: int = 128) -> tuple[IntPolynomial, list[Factor]]:
    """Divide out powers of ``x`` and of cyclotomic polynomials ``Phi_m``.

    ``m`` runs upward through ``1..max_cyc_order``; each factor is removed as
    often as it divides exactly.  Returns the residual and the stripped factors.
    """
    if poly.is_zero():
        raise ValueError("zero polynomial")
    factors: list[Factor] = []
    k = next(i for i, c in enumerate(poly.coeffs) if c)
    if k:
        factors.append(Factor("x", IntPolynomial.x(), k))
        poly = IntPolynomial(poly.coeffs[k:])
    for m in range(1, max_cyc_order + 1):
        phi = cyclotomic(m)
        if phi.degree > poly.degree:
            continue
        mult = 0
        while poly.degree >= phi.degree:
            q, r = divmod_poly(poly, phi)
            if not r.is_zero():
                break
            poly, mult = q, mult + 1
        if mult:
            factors.append(Factor(f"Phi_{m}", phi, mult))
    assert poly(1) != 0, "residual still vanishes at 1"
    return poly, factors


def expand_factors(residual: IntPolynomial, factors: Sequence[Factor]) -> IntPolynomial:
    out = residual
    for f in factors:
        out = out * f.poly**f.multiplicity
    return out


# --- distinct-degree factorisation over GF(p) ------------------------------


class _ModRing:
    """Arithmetic in GF(p)[x] / (f) with a precomputed reduction table."""

    def __init__(self, f: np.ndarray, p: int):
        self.p = p
        self.f = monic_mod(f, p)
        n = self.n = len(self.f) - 1
        # rows: x^(n+k) mod f for k = 0..n-2
        table = np.zeros((max(n - 1, 0), n), dtype=np.int64)
        cur = (-self.f[:n]) % p
        for k in range(n - 1):
            table[k] = cur
            top = cur[-1]
            cur = np.concatenate(([0], cur[:-1]))
            cur = (cur - top * self.f[:n]) % p
        self.table = table

    def reduce(self, c: np.ndarray) -> np.ndarray:
        n, p = self.n, self.p
        if len(c) <= n:
            out = np.zeros(n, dtype=np.int64)
            out[: len(c)] = c
            return out
        low = np.zeros(n, dtype=np.int64)
        low[:n] = c[:n]
        return (low + (c[n:] % p) @ self.table[: len(c) - n]) % p

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(np.convolve(a, b) % self.p)

    def power_of_x(self, e: int) -> np.ndarray:
        result = self.reduce(np.array([1], dtype=np.int64))
        base = self.reduce(np.array([0, 1], dtype=np.int64))
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def frobenius_matrix(self) -> np.ndarray:
        """Row ``i`` holds ``x^(p*i) mod f``, so ``h(x)^p = h @ Q``."""
        n = self.n
        q = np.zeros((n, n), dtype=np.int64)
        q[0, 0] = 1
        xp = self.power_of_x(self.p)
        for i in range(1, n):
            q[i] = self.mul(q[i - 1], xp)
        return q


def factor_degrees_mod_p(poly: IntPolynomial, p: int) -> list[int]:
    """Degrees of the irreducible factors of ``poly`` over GF(p), ascending.

    Requires ``p`` not dividing the leading coefficient and ``poly mod p``
    square-free (``ValueError`` otherwise).
    """
    if not squarefree_mod(poly, p):
        raise ValueError(f"polynomial is not square-free modulo {p} (or p divides the leading coefficient)")
    f = monic_mod(trim(poly.reduce_mod(p)), p)
    n = len(f) - 1
    if n <= 1:
        return [n] if n else []
    ring = _ModRing(f, p)
    frob = ring.frobenius_matrix()
    x = np.zeros(n, dtype=np.int64)
    x[1] = 1
    h = x.copy()
    rest, pattern, d = f, [], 0
    while len(rest) - 1 >= 2 * (d + 1):
        d += 1
        h = (h @ frob) % p
        g = gcd_mod(rest, trim((h - x) % p), p)
        k = len(g) - 1
        if k > 0:
            pattern += [d] * (k // d)
            rest, r = divmod_mod(rest, g, p)
            assert not len(r)
    if len(rest) - 1 > 0:
        pattern.append(len(rest) - 1)
    return sorted(pattern)


def subset_sums(pattern: Sequence[int]) -> int:
    """Achievable subset sums as a bitmask (bit ``k`` set iff ``k`` is a sum)."""
    sums = 1
    for d in pattern:
        sums |= sums << d
    return sums


class Status(str, Enum):
    IRREDUCIBLE = "Irreducible"
    REDUCIBLE = "Reducible"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class Certification:
    status: Status
    degree: int
    primes: list[int] = field(default_factory=list)
    patterns: dict[int, list[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "status": self.status.value,
            "primes": self.primes,
            "patterns": {str(p): pat for p, pat in self.patterns.items()},
        }


def certify_irreducible(
    poly: IntPolynomial, prime_budget: int = 25, first_prime: int = FIRST_PATTERN_PRIME
) -> Certification:
    """Try to prove ``poly`` irreducible over the rationals.

    Never reports ``Reducible``: without an explicit factor the method can only
    certify or give up.
    """
    n = poly.degree
    if n < 1:
        raise ValueError("constant polynomial")
    cert = Certification(Status.INCONCLUSIVE, n)
    if n == 1:
        cert.status = Status.IRREDUCIBLE
        return cert
    target = 1 | (1 << n)
    common = subset_sums([1] * n)
    for p in primes_from(first_prime):
        if len(cert.primes) >= prime_budget:
            break
        if not squarefree_mod(poly, p):
            continue
        pattern = factor_degrees_mod_p(poly, p)
        cert.primes.append(p)
        cert.patterns[p] = pattern
        common &= subset_sums(pattern)
        if common == target:
            cert.status = Status.IRREDUCIBLE
            break
    log.info("certify degree %d: %s after %d primes", n, cert.status.value, len(cert.primes))
    return cert


@dataclass
class GrowthDegree:
    degree: int | None
    status: Status
    factor: IntPolynomial | None
    certification: Certification | None
    stripped: list[Factor]
    note: str = ""


def growth_degree(char_poly: IntPolynomial, lam: float, prime_budget: int = 25) -> GrowthDegree:
    """Degree of the algebraic integer ``lam``, a root of ``char_poly``.

    Trivial factors are stripped, the residual made square-free, checked to
    vanish at ``lam`` and certified irreducible.  ``degree`` is ``None`` when
    the certificate is inconclusive.
    """
    residual, stripped = strip_trivial_factors(char_poly)
    for f in stripped:
        if f.poly.degree == 1 and abs(lam - (-f.poly[0])) < 1e-9:
            return GrowthDegree(1, Status.IRREDUCIBLE, f.poly, None, stripped, "root of a linear factor")
    if residual.degree < 1:
        return GrowthDegree(None, Status.INCONCLUSIVE, None, None, stripped, "no residual factor")
    residual = squarefree_part(residual)
    value = residual.eval_mp(lam, 256)
    scale = sum(abs(c) * mpmath.mpf(lam) ** k for k, c in enumerate(residual.coeffs))
    if abs(value) > 1e-6 * scale:
        return GrowthDegree(None, Status.INCONCLUSIVE, residual, None, stripped, "lambda is not a root of the residual")
    cert = certify_irreducible(residual, prime_budget)
    if cert.status is Status.IRREDUCIBLE:
        return GrowthDegree(residual.degree, cert.status, residual, cert, stripped)
    return GrowthDegree(None, cert.status, residual, cert, stripped, "residual not certified irreducible")


__all__ = [
    "Certification",
    "Factor",
    "GrowthDegree",
    "Status",
    "certify_irreducible",
    "divide_exact",
    "expand_factors",
    "factor_degrees_mod_p",
    "growth_degree",
    "squarefree_part",
    "strip_trivial_factors",
    "subset_sums",
]
