"""Walsh-Hadamard transform, dyadic convolution, and perfect-shuffle helpers.

The transform is orthonormal (1/sqrt(N) scaling) in natural Sylvester
ordering, so it is its own inverse and the XOR-convolution identity
``fwht(a*b) == dyadic_convolve(fwht(a), fwht(b))`` holds exactly.
"""

from __future__ import annotations

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def fwht(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform along `axis`.

    Butterfly passes use additions/subtractions only; a single 1/sqrt(N)
    scale is applied at the end.  Length must be a power of two (N = 1 is
    the identity).  Self-inverse and energy preserving.
    """
    x = np.asarray(x)
    n = x.shape[axis]
    if not is_power_of_two(n):
        raise ValueError(f"fwht length must be a power of two, got {n}")
    y = np.moveaxis(x, axis, -1).astype(np.result_type(x.dtype, np.float64), copy=True)
    orig_shape = y.shape
    y = y.reshape(-1, n)
    h = 1
    while h < n:
        y = y.reshape(-1, n // (2 * h), 2, h)
        a = y[:, :, 0, :].copy()
        b = y[:, :, 1, :].copy()
        y[:, :, 0, :] = a + b
        y[:, :, 1, :] = a - b
        y = y.reshape(-1, n)
        h *= 2
    y *= 1.0 / np.sqrt(n)
    y = y.reshape(orig_shape)
    return np.moveaxis(y, -1, axis)


def hadamard_matrix(n: int) -> np.ndarray:
    """Dense orthonormal Hadamard matrix in natural ordering (oracle use)."""
    if not is_power_of_two(n):
        raise ValueError(f"Hadamard size must be a power of two, got {n}")
    h = np.array([[1.0]])
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h / np.sqrt(n)


def dyadic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolution under index XOR: c[k] = (1/sqrt(N)) * sum_n a[n] b[k^n].

    This is the sequency-domain image of elementwise multiplication.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dyadic_convolve needs equal-length 1-d inputs, got {a.shape} and {b.shape}")
    n = a.size
    if not is_power_of_two(n):
        raise ValueError(f"dyadic_convolve length must be a power of two, got {n}")
    idx = np.arange(n)
    # b[k ^ n] as an N x N gather; fine at the block sizes used here
    return (a[None, :] * b[idx[:, None] ^ idx[None, :]]).sum(axis=1) / np.sqrt(n)


def shuffle_indices(n_rows: int, n_cols: int) -> np.ndarray:
    """Index map of the perfect shuffle: out = in[map] sends the row-major
    listing vec(C^T) of an (n_rows x n_cols) matrix C to vec(C)."""
    return np.arange(n_rows * n_cols).reshape(n_rows, n_cols).T.ravel()


def perfect_shuffle(v: np.ndarray, n_rows: int, n_cols: int) -> np.ndarray:
    """Apply the (n_rows, n_cols) perfect shuffle: vec(C^T) -> vec(C)."""
    v = np.asarray(v)
    if v.shape != (n_rows * n_cols,):
        raise ValueError(f"shuffle expects length {n_rows * n_cols}, got {v.shape}")
    return v[shuffle_indices(n_rows, n_cols)]


def perfect_unshuffle(v: np.ndarray, n_rows: int, n_cols: int) -> np.ndarray:
    """Inverse shuffle: vec(C) -> vec(C^T)."""
    v = np.asarray(v)
    if v.shape != (n_rows * n_cols,):
        raise ValueError(f"unshuffle expects length {n_rows * n_cols}, got {v.shape}")
    return v[shuffle_indices(n_cols, n_rows)]


def shuffle_matrix(n_rows: int, n_cols: int) -> np.ndarray:
    """Dense permutation matrix P with P @ vec(C^T) = vec(C) (oracle use)."""
    return np.eye(n_rows * n_cols)[shuffle_indices(n_rows, n_cols)]
