import random

import mpmath
import numpy as np
import pytest
import sympy

from audioactive import spectral
from audioactive.chemistry import build_decay_matrix, discover_elements
from audioactive.errors import ConvergenceError, VerificationError
from audioactive.polynomial import IntPolynomial, is_prime, primes_from
from audioactive.rewrite import RuleSpec
from audioactive.spectral import (
    SparseMatrix,
    abundances,
    char_poly,
    charpoly_mod,
    coefficient_bound,
    dominant_eigen,
    newton_refine,
)


def random_matrix(rng, n, density=0.4, top=5):
    return [[rng.randint(0, top) if rng.random() < density else 0 for _ in range(n)] for _ in range(n)]


def sympy_charpoly(rows):
    x = sympy.symbols("x")
    coeffs = sympy.Matrix(rows).charpoly(x).all_coeffs()
    return IntPolynomial(int(c) for c in reversed(coeffs))


def charpoly_by_interpolation(rows, p):
    """det(xI - A) mod p from n+1 point evaluations; independent of Hessenberg."""
    n = len(rows)
    values = []
    for x in range(n + 1):
        m = [[((x if i == j else 0) - rows[i][j]) % p for j in range(n)] for i in range(n)]
        values.append(det_mod(m, p))
    # Lagrange interpolation in ascending coefficients
    coeffs = [0] * (n + 1)
    for i, yi in enumerate(values):
        basis, denom = [1], 1
        for j in range(n + 1):
            if j != i:
                basis = [(a - j * b) % p for a, b in zip([0] + basis, basis + [0])]
                denom = denom * (i - j) % p
        scale = yi * pow(denom, -1, p) % p
        coeffs = [(c + scale * b) % p for c, b in zip(coeffs, basis)]
    return coeffs


def det_mod(m, p):
    m = [row[:] for row in m]
    n, det = len(m), 1
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c]), None)
        if pivot is None:
            return 0
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det = det * m[c][c] % p
        inv = pow(m[c][c], -1, p)
        for r in range(c + 1, n):
            f = m[r][c] * inv % p
            if f:
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[c])]
    return det % p


class TestSparseMatrix:
    def test_dense_round_trip(self):
        rows = [[0, 2, 0], [1, 0, 3], [0, 0, 4]]
        D = SparseMatrix.from_dense(rows)
        assert D.to_dense() == rows
        assert D[1, 2] == 3 and D[0, 0] == 0
        assert D.nnz() == 4
        assert D.column_sums() == [1, 2, 7]
        assert D.max_entry() == 4

    def test_triplet_text(self):
        D = SparseMatrix.from_dense([[0, 2], [5, 0]])
        text = D.to_triplet_text()
        assert text.splitlines()[0] == "2 2 2"
        assert "1 2 2" in text.splitlines()
        assert SparseMatrix.from_triplet_text(text) == D

    def test_matvec_exact(self):
        D = SparseMatrix.from_dense([[10**20, 1], [0, 1]])
        assert D.matvec([3, 4]) == [3 * 10**20 + 4, 4]

    def test_submatrix(self):
        D = SparseMatrix.from_dense([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        assert D.submatrix([0, 2]).to_dense() == [[1, 3], [7, 9]]


class TestDominantEigen:
    def test_golden_ratio(self):
        r = dominant_eigen(SparseMatrix.from_dense([[1, 1], [1, 0]]))
        assert r.value == pytest.approx((1 + 5**0.5) / 2, abs=1e-12)
        assert r.residual <= 1e-12

    def test_imprimitive_matrix_uses_shift(self):
        r = dominant_eigen(SparseMatrix.from_dense([[0, 2], [2, 0]]), max_iter=50)
        assert r.value == pytest.approx(2.0, abs=1e-12)

    def test_nilpotent_fails(self):
        with pytest.raises(ConvergenceError):
            dominant_eigen(SparseMatrix.from_dense([[0, 1], [0, 0]]))

    def test_base10(self, stutter10):
        e = stutter10.eigen
        assert abs(e.value - 1.4453300117) < 1e-9
        assert e.residual <= 1e-12
        assert (e.vector > 0).all()

    def test_abundances(self, stutter10):
        ab = stutter10.abundance
        assert abs(sum(ab) - 100) < 1e-9
        assert abs(ab[0] - 27.81585668) < 1e-6
        assert abs(ab[1] - 19.24533252) < 1e-6
        assert abs(ab[2] - 13.31552819) < 1e-6
        assert abs(ab[713] - 0.00000004) < 1e-7

    def test_abundances_reject_negative(self):
        with pytest.raises(ValueError):
            abundances([1.0, -0.5])

    @pytest.mark.parametrize("base,lam", [(2, 2.8923039932), (3, 2.0062263631), (4, 1.8785595146)])
    def test_small_bases(self, base, lam):
        D = build_decay_matrix(discover_elements("0", RuleSpec.stutter(base)))
        assert abs(dominant_eigen(D).value - lam) < 1e-9


class TestCharPoly:
    def test_against_sympy(self):
        rng = random.Random(7)
        for _ in range(20):
            rows = random_matrix(rng, rng.randint(1, 9))
            assert char_poly(SparseMatrix.from_dense(rows)) == sympy_charpoly(rows)

    def test_large_entries(self):
        rows = [[10**6, 3, 0], [7, 0, 10**5], [1, 1, 999_999]]
        assert char_poly(SparseMatrix.from_dense(rows)) == sympy_charpoly(rows)

    def test_mod_p_against_interpolation(self):
        rng = random.Random(8)
        for p in (1009, 65_537, 1_000_003):
            rows = random_matrix(rng, 7, density=0.6, top=9)
            got = charpoly_mod(SparseMatrix.from_dense(rows), p)
            assert [int(c) for c in got] == charpoly_by_interpolation(rows, p)

    def test_workers_agree(self):
        rows = random_matrix(random.Random(9), 12)
        D = SparseMatrix.from_dense(rows)
        assert char_poly(D, workers=2) == char_poly(D, workers=1)

    def test_bound_is_sound(self):
        rng = random.Random(10)
        for _ in range(20):
            D = SparseMatrix.from_dense(random_matrix(rng, rng.randint(2, 8), top=9))
            assert max(abs(c) for c in char_poly(D).coeffs) <= coefficient_bound(D)

    def test_verification_failure(self, monkeypatch):
        rows = random_matrix(random.Random(12), 8, density=0.9, top=9)
        monkeypatch.setattr(spectral, "coefficient_bound", lambda D: 1)
        with pytest.raises(VerificationError):
            char_poly(SparseMatrix.from_dense(rows), prime_limit=200)

    def test_base10_fresh_primes(self, stutter10, charpoly10):
        poly = charpoly10
        assert poly.degree == 714 and poly.is_monic()
        for p in primes_from(10**6 + 1, 3):
            assert np.array_equal(poly.reduce_mod(p), charpoly_mod(stutter10.matrix, p))

    def test_base10_vanishes_at_lambda(self, stutter10, charpoly10):
        lam = stutter10.eigen.value
        value = charpoly10.eval_mp(lam, 512)
        scale = sum(abs(c) * mpmath.mpf(lam) ** k for k, c in enumerate(charpoly10.coeffs))
        assert abs(value) / scale < 1e-12


class TestNewton:
    def test_sqrt2(self):
        root = newton_refine(IntPolynomial([-2, 0, 1]), 1.41421356237)
        with mpmath.workprec(256):
            assert abs(root - mpmath.sqrt(2)) < mpmath.mpf(10) ** -30

    def test_disagreement(self):
        with pytest.raises(VerificationError):
            newton_refine(IntPolynomial([-2, 0, 1]), 1.4)

    def test_base10_root(self, stutter10, charpoly10):
        root = newton_refine(charpoly10, stutter10.eigen.value)
        assert abs(root - stutter10.eigen.value) < 1e-9
        assert mpmath.nstr(root, 11) == "1.4453300117"


def test_prime_helpers():
    assert [p for p in range(50) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    assert list(primes_from(1000, 3)) == [1009, 1013, 1019]
    assert list(spectral.primes_below(20, 3)) == [19, 17, 13]
