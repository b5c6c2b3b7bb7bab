"""Tests for the Walsh-Hadamard transform, dyadic convolution, and shuffle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otsmlink.transforms import (
    dyadic_convolve,
    fwht,
    hadamard_matrix,
    perfect_shuffle,
    perfect_unshuffle,
    shuffle_indices,
    shuffle_matrix,
)

RNG_SEED = 2024


class TestFwht:
    def test_two_point_impulse(self):
        out = fwht(np.array([1.0, 0.0]))
        np.testing.assert_allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_all_ones_maps_to_zero_sequency(self):
        out = fwht(np.array([1.0, 1.0, 1.0, 1.0]))
        np.testing.assert_allclose(out, [2.0, 0.0, 0.0, 0.0], atol=1e-14)

    def test_involution(self):
        rng = np.random.default_rng(RNG_SEED)
        v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        np.testing.assert_allclose(fwht(fwht(v)), v, atol=1e-12)

    def test_length_one_is_identity(self):
        np.testing.assert_allclose(fwht(np.array([3.5 + 1j])), [3.5 + 1j])

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError, match="power of two"):
            fwht(np.zeros(6))

    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
    def test_matches_dense_matrix_on_basis_vectors(self, n):
        w = hadamard_matrix(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            np.testing.assert_allclose(fwht(e), w[:, j], atol=1e-12)

    def test_unitary_norm_preservation(self):
        rng = np.random.default_rng(RNG_SEED + 1)
        for n in (2, 8, 64, 256):
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            assert abs(np.linalg.norm(fwht(v)) - np.linalg.norm(v)) < 1e-12

    def test_axis_argument(self):
        rng = np.random.default_rng(RNG_SEED + 2)
        mat = rng.standard_normal((3, 8))
        rows = fwht(mat, axis=1)
        for i in range(3):
            np.testing.assert_allclose(rows[i], fwht(mat[i]), atol=1e-13)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_involution_property(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        np.testing.assert_allclose(fwht(fwht(v)), v, atol=1e-12)


class TestShuffle:
    def test_two_by_two_definition(self):
        v = np.array([1, 2, 3, 4])  # vec(C^T) for C = [[1, 2], [3, 4]]
        np.testing.assert_array_equal(perfect_shuffle(v, 2, 2), [1, 3, 2, 4])

    @pytest.mark.parametrize("m,n", [(1, 6), (6, 1)])
    def test_degenerate_dimension_is_identity(self, m, n):
        v = np.arange(6)
        np.testing.assert_array_equal(perfect_shuffle(v, m, n), v)

    def test_roundtrip_and_kron_identity(self):
        m, n = 4, 8
        rng = np.random.default_rng(RNG_SEED + 3)
        v = rng.standard_normal(m * n)
        np.testing.assert_allclose(perfect_unshuffle(perfect_shuffle(v, m, n), m, n), v)
        # with P defined by P vec(C^T) = vec(C), the Kronecker conjugation
        # identity reads P^T (W_N kron I_M) P == I_M kron W_N
        p = shuffle_matrix(m, n)
        w = hadamard_matrix(n)
        lhs = p.T @ np.kron(w, np.eye(m)) @ p
        rhs = np.kron(np.eye(m), w)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        # equivalent form used by the modulator: P (I_M kron W_N) == (W_N kron I_M) P
        np.testing.assert_allclose(
            p @ np.kron(np.eye(m), w), np.kron(w, np.eye(m)) @ p, atol=1e-12
        )

    def test_shuffle_matches_matrix_vectorisation(self):
        m, n = 3, 4
        rng = np.random.default_rng(RNG_SEED + 4)
        c = rng.standard_normal((m, n))
        vec_ct = c.ravel()            # row-major listing = vec(C^T)
        vec_c = c.T.ravel()           # column-major listing = vec(C)
        np.testing.assert_array_equal(perfect_shuffle(vec_ct, m, n), vec_c)

    def test_index_map_is_a_permutation(self):
        idx = shuffle_indices(5, 7)
        np.testing.assert_array_equal(np.sort(idx), np.arange(35))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            perfect_shuffle(np.zeros(5), 2, 3)


class TestDyadicConvolve:
    def test_identity_element(self):
        rng = np.random.default_rng(RNG_SEED + 5)
        n = 8
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        e = fwht(np.ones(n))  # [sqrt(N), 0, ..., 0]
        np.testing.assert_allclose(dyadic_convolve(a, e), a, atol=1e-12)

    def test_two_point_direct_evaluation(self):
        out = dyadic_convolve(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        np.testing.assert_allclose(out, [11 / np.sqrt(2), 10 / np.sqrt(2)])

    def test_multiplication_property(self):
        rng = np.random.default_rng(RNG_SEED + 6)
        x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        lhs = fwht(x * y)
        rhs = dyadic_convolve(fwht(x), fwht(y))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_commutative_and_associative(self):
        rng = np.random.default_rng(RNG_SEED + 7)
        a, b, c = (rng.standard_normal(8) + 1j * rng.standard_normal(8) for _ in range(3))
        np.testing.assert_allclose(dyadic_convolve(a, b), dyadic_convolve(b, a), atol=1e-12)
        np.testing.assert_allclose(
            dyadic_convolve(dyadic_convolve(a, b), c),
            dyadic_convolve(a, dyadic_convolve(b, c)),
            atol=1e-12,
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            dyadic_convolve(np.zeros(4), np.zeros(8))

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            dyadic_convolve(np.zeros(6), np.zeros(6))
