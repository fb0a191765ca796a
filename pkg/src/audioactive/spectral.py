"""Sparse integer matrices, Perron eigenpairs and exact characteristic polynomials."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, VerificationError
from .polynomial import MAX_MOD_PRIME, IntPolynomial, crt_lift, primes_below

log = logging.getLogger(__name__)

WORKERS_ENV = "AUDIOACTIVE_WORKERS"


class SparseMatrix:
    """Square matrix of nonnegative ints stored column by column.

    Indices are 0-based; ``cols[j]`` maps row index to a nonzero entry.
    """

    def __init__(self, n: int, cols: Sequence[dict[int, int]] | None = None):
        self.n = n
        self.cols: list[dict[int, int]] = [dict() for _ in range(n)] if cols is None else [
            {i: v for i, v in c.items() if v} for c in cols
        ]
        if len(self.cols) != n:
            raise ValueError("column count does not match dimension")

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]]) -> "SparseMatrix":
        n = len(rows)
        cols = [dict() for _ in range(n)]
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError("matrix must be square")
            for j, v in enumerate(row):
                if v:
                    cols[j][i] = int(v)
        return cls(n, cols)

    @classmethod
    def from_triplets(cls, n: int, triplets: Iterable[tuple[int, int, int]]) -> "SparseMatrix":
        m = cls(n)
        for i, j, v in triplets:
            if v:
                m.cols[j][i] = m.cols[j].get(i, 0) + int(v)
        return m

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.cols[j].get(i, 0)

    def __eq__(self, other):
        return isinstance(other, SparseMatrix) and self.n == other.n and self.cols == other.cols

    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    def triplets(self):
        for j, col in enumerate(self.cols):
            for i in sorted(col):
                yield i, j, col[i]

    def column_sums(self) -> list[int]:
        return [sum(c.values()) for c in self.cols]

    def max_entry(self) -> int:
        return max((v for c in self.cols for v in c.values()), default=0)

    def matvec(self, v: Sequence[int]) -> list[int]:
        """Exact product with an integer vector."""
        out = [0] * self.n
        for j, col in enumerate(self.cols):
            vj = v[j]
            if vj:
                for i, a in col.items():
                    out[i] += a * vj
        return out

    def to_scipy(self, dtype=float) -> sp.csc_matrix:
        rows, cols, vals = [], [], []
        for i, j, v in self.triplets():
            rows.append(i)
            cols.append(j)
            vals.append(v)
        return sp.csc_matrix((np.array(vals, dtype=dtype), (rows, cols)), shape=(self.n, self.n))

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.n for _ in range(self.n)]
        for i, j, v in self.triplets():
            out[i][j] = v
        return out

    def dense_mod(self, p: int) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j, v in self.triplets():
            a[i, j] = v % p
        return a

    def submatrix(self, idx: Sequence[int]) -> "SparseMatrix":
        pos = {k: t for t, k in enumerate(idx)}
        cols = [{pos[i]: v for i, v in self.cols[j].items() if i in pos} for j in idx]
        return SparseMatrix(len(idx), cols)

    def to_triplet_text(self) -> str:
        """``row col value`` lines, 1-based, preceded by a size header."""
        lines = [f"{self.n} {self.n} {self.nnz()}"]
        lines += [f"{i + 1} {j + 1} {v}" for i, j, v in self.triplets()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_triplet_text(cls, text: str) -> "SparseMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("%")]
        n = int(lines[0].split()[0])
        trips = []
        for ln in lines[1:]:
            i, j, v = ln.split()
            trips.append((int(i) - 1, int(j) - 1, int(v)))
        return cls.from_triplets(n, trips)


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int
    shifted: bool = False


def _power_iterate(A, n: int, tol: float, max_iter: int, shift: float):
    v = np.full(n, 1.0 / n)
    lam_prev = math.inf
    for it in range(1, max_iter + 1):
        w = A @ v
        if shift:
            w = w + shift * v
        s = w.sum()
        if s == 0:
            raise ConvergenceError("iteration collapsed to the zero vector")
        lam = s / v.sum() - shift
        w /= s
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            resid = np.abs(A @ w - lam * w).max() / np.abs(w).max()
            if resid <= tol:
                return lam, w, resid, it
        v, lam_prev = w, lam
    return None


def dominant_eigen(D: SparseMatrix, tol: float = 1e-13, max_iter: int = 100_000) -> EigenResult:
    """Perron eigenvalue and eigenvector (unit 1-norm) by power iteration.

    Estimates are ratios of 1-norms, which is the natural Rayleigh-type
    quotient for nonnegative vectors.  If the plain iteration does not settle
    (e.g. an imprimitive matrix whose peripheral eigenvalues rotate the
    iterate), it is rerun once on ``D + I``.
    """
    if D.n < 1:
        raise ValueError("empty matrix")
    A = D.to_scipy()
    for shift in (0.0, 1.0):
        found = _power_iterate(A, D.n, tol, max_iter, shift)
        if found is not None:
            lam, v, resid, its = found
            return EigenResult(float(lam), v, float(resid), its, shifted=bool(shift))
        log.info("power iteration did not converge; retrying with D + I")
    raise ConvergenceError(f"no convergence within {max_iter} iterations, even for D + I")


def abundances(vector: Sequence[float]) -> np.ndarray:
    """Scale a nonnegative vector to percentages summing to 100."""
    v = np.asarray(vector, dtype=float)
    if (v < -1e-15).any():
        raise ValueError("abundance vector has negative components")
    v = np.clip(v, 0.0, None)
    return 100.0 * v / v.sum()


# --- characteristic polynomial -------------------------------------------


def hessenberg_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Reduce ``a`` (int64, entries in [0, p)) to upper Hessenberg form by
    similarity transforms over GF(p).  Works in place and returns ``a``.

    Only rows with a nonzero multiplier are touched, which keeps sparse
    inputs cheap for most of the sweep.
    """
    n = a.shape[0]
    for k in range(n - 2):
        col = a[k + 1 :, k]
        nz = np.flatnonzero(col)
        if not nz.size:
            continue
        r = k + 1 + int(nz[0])
        if r != k + 1:
            a[[r, k + 1], :] = a[[k + 1, r], :]
            a[:, [r, k + 1]] = a[:, [k + 1, r]]
        inv = pow(int(a[k + 1, k]), -1, p)
        rows = k + 2 + np.flatnonzero(a[k + 2 :, k])
        if not rows.size:
            continue
        u = a[rows, k] * inv % p
        # row_i -= u_i * row_{k+1}
        a[np.ix_(rows, np.arange(k, n))] = (a[np.ix_(rows, np.arange(k, n))] - np.outer(u, a[k + 1, k:]) % p) % p
        # col_{k+1} += sum_i u_i * col_i
        a[:, k + 1] = (a[:, k + 1] + a[:, rows] @ u) % p
    return a


def hessenberg_charpoly_mod(h: np.ndarray, p: int) -> np.ndarray:
    """Characteristic polynomial of an upper Hessenberg matrix over GF(p).

    Uses the standard recurrence over leading principal submatrices.
    Returns ascending coefficients (length n + 1, monic).
    """
    n = h.shape[0]
    P = np.zeros((n + 1, n + 1), dtype=np.int64)
    P[0, 0] = 1
    sub = [int(h[m, m - 1]) for m in range(1, n)]
    for m in range(1, n + 1):
        # (x - h[m-1, m-1]) * P[m-1]
        prev = P[m - 1]
        row = np.zeros(n + 1, dtype=np.int64)
        row[1:] = prev[:-1]
        row = (row - int(h[m - 1, m - 1]) * prev) % p
        # subtract sum_i h[i-1, m-1] * prod(sub[i..m-2]) * P[i-1]
        coef = np.zeros(m - 1, dtype=np.int64)
        prod = 1
        for i in range(m - 1, 0, -1):
            prod = prod * sub[i - 1] % p
            if not prod:
                break
            hv = int(h[i - 1, m - 1])
            if hv:
                coef[i - 1] = hv * prod % p
        if coef.any():
            row = (row - (coef @ P[: m - 1]) % p) % p
        P[m] = row
    return P[n]


def charpoly_mod(D: SparseMatrix, p: int) -> np.ndarray:
    if p >= MAX_MOD_PRIME:
        raise ValueError("prime too large for overflow-free int64 arithmetic")
    return hessenberg_charpoly_mod(hessenberg_mod(D.dense_mod(p), p), p)


def coefficient_bound(D: SparseMatrix) -> int:
    """Upper bound on |coefficients| of det(xI - D).

    The coefficient of x^(n-k) is a signed sum of k x k principal minors; by
    Hadamard each minor is at most the product of its column norms, so the
    elementary symmetric functions of the (rounded up) column norms bound
    every coefficient.
    """
    norms = [math.isqrt(sum(v * v for v in c.values()) - 1) + 1 if c else 0 for c in D.cols]
    e = [1]
    for c in norms:
        if c:
            e = [a + c * b for a, b in zip(e + [0], [0] + e)]
    return max(e)


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _map_primes(D: SparseMatrix, primes: Sequence[int], workers: int):
    if workers > 1 and len(primes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(charpoly_mod, [D] * len(primes), primes))
    return [charpoly_mod(D, p) for p in primes]


def char_poly(
    D: SparseMatrix, workers: int | None = None, verify_primes: int = 2, prime_limit: int = MAX_MOD_PRIME
) -> IntPolynomial:
    """Exact ``det(xI - D)`` by multi-modular Hessenberg reduction and CRT.

    Enough primes are used for their product to exceed twice
    :func:`coefficient_bound`; ``verify_primes`` further primes must agree
    with the reconstruction or :class:`VerificationError` is raised.
    """
    n = D.n
    if n == 0:
        return IntPolynomial([1])
    bound = 2 * coefficient_bound(D) + 1
    primes, modulus = [], 1
    source = primes_below(prime_limit)
    while modulus <= bound:
        p = next(source)
        primes.append(p)
        modulus *= p
    checks = [next(source) for _ in range(verify_primes)]
    log.info("char_poly: n=%d, %d primes (+%d verification)", n, len(primes), len(checks))
    residues = _map_primes(D, primes + checks, _worker_count(workers))
    coeffs = crt_lift(residues[: len(primes)], primes)
    poly = IntPolynomial(coeffs)
    if poly.degree != n or poly.lead != 1:
        raise VerificationError("reconstructed characteristic polynomial is not monic of degree n")
    for p, res in zip(checks, residues[len(primes) :]):
        if not np.array_equal(poly.reduce_mod(p), res):
            raise VerificationError(f"CRT reconstruction disagrees with the residue mod {p}")
    return poly


def newton_refine(
    poly: IntPolynomial, x0: float, tol: float = 1e-30, prec: int = 256, max_iter: int = 200, agree: float = 1e-9
) -> mpmath.mpf:
    """Root of ``poly`` near ``x0`` by Newton's method at ``prec`` bits.

    Raises :class:`VerificationError` if the root lands farther than ``agree``
    from ``x0``.
    """
    dpoly = poly.derivative()
    with mpmath.workprec(prec):
        x = mpmath.mpf(x0)
        for _ in range(max_iter):
            fx, dfx = poly.eval_mp(x, prec), dpoly.eval_mp(x, prec)
            if dfx == 0:
                raise ConvergenceError("zero derivative during Newton iteration")
            step = fx / dfx
            x -= step
            if abs(step) <= tol * max(1, abs(x)):
                break
        else:
            raise ConvergenceError("Newton iteration did not converge")
        if abs(x - x0) > agree:
            raise VerificationError(f"refined root {mpmath.nstr(x, 15)} disagrees with estimate {x0}")
        return +x
