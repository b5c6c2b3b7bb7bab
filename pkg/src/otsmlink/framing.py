"""Frame geometry, QAM mapping, and the ideal modulate/demodulate chain.

A frame is an M x N grid X (rows = delay bins, columns = sequency bins)
whose last 2*l_max+1 rows are zero padding.  Modulation applies the WHT
along each row, interleaves the columns into the time domain, and prepends
a cyclic prefix of length l_max copied from the tail (all zeros thanks to
the ZP rows, but the copy is performed regardless so the append/removal
algebra is exercised).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .transforms import fwht, is_power_of_two, perfect_shuffle, perfect_unshuffle

SUPPORTED_QAM_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class FrameGeometry:
    """Static dimensions of one transmission frame."""

    m_delay: int                 # M, delay bins
    n_seq: int                   # N, sequency bins (power of two)
    l_max: int                   # maximum discrete delay spread
    delta_f: float = 156250.0    # sampling frequency interval [Hz] (B = M*delta_f)
    qam_order: int = 4

    def __post_init__(self):
        if self.n_seq < 1 or not is_power_of_two(self.n_seq):
            raise ValueError(f"n_seq must be a power of two, got {self.n_seq}")
        if self.l_max < 0:
            raise ValueError(f"l_max must be non-negative, got {self.l_max}")
        if self.m_delay <= 2 * self.l_max + 1:
            raise ValueError(
                f"m_delay must exceed 2*l_max+1 = {2 * self.l_max + 1}, got {self.m_delay}"
            )
        if self.delta_f <= 0:
            raise ValueError(f"delta_f must be positive, got {self.delta_f}")
        if self.qam_order not in SUPPORTED_QAM_ORDERS:
            raise ValueError(f"qam_order must be one of {SUPPORTED_QAM_ORDERS}, got {self.qam_order}")

    @property
    def nm(self) -> int:
        return self.m_delay * self.n_seq

    @property
    def frame_len(self) -> int:
        """Time samples per frame including the cyclic prefix."""
        return self.nm + self.l_max

    @property
    def zp_rows(self) -> int:
        return 2 * self.l_max + 1

    @property
    def data_rows(self) -> int:
        return self.m_delay - self.zp_rows

    @property
    def data_symbols(self) -> int:
        return self.data_rows * self.n_seq

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.qam_order))

    @property
    def bits_per_frame(self) -> int:
        return self.data_symbols * self.bits_per_symbol

    @property
    def bandwidth_hz(self) -> float:
        return self.m_delay * self.delta_f

    @property
    def sample_rate(self) -> float:
        return self.bandwidth_hz

    def data_mask(self) -> np.ndarray:
        """Boolean mask over the length-NM delay-sequency vector marking data bins."""
        mask = np.zeros((self.m_delay, self.n_seq), dtype=bool)
        mask[: self.data_rows, :] = True
        return mask.ravel()


@lru_cache(maxsize=None)
def qam_constellation(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gray-coded square QAM with unit average symbol energy.

    Returns (points, bit_table): points[v] is the symbol whose bit pattern is
    the binary expansion of v (MSB first, first half I then Q); bit_table is
    the (order, bits) 0/1 matrix in the same indexing.
    """
    if order not in SUPPORTED_QAM_ORDERS:
        raise ValueError(f"unsupported QAM order {order}")
    bits = int(np.log2(order))
    side = 1 << (bits // 2)
    # gray_rank[codeword] = position along the amplitude axis
    gray_seq = np.array([g ^ (g >> 1) for g in range(side)])
    gray_rank = np.empty(side, dtype=int)
    gray_rank[gray_seq] = np.arange(side)
    levels = np.arange(side - 1, -side, -2, dtype=float)  # most positive first
    scale = np.sqrt(2.0 * (side * side - 1) / 3.0)
    axis = levels / scale
    v = np.arange(order)
    vi = v >> (bits // 2)
    vq = v & (side - 1)
    points = axis[gray_rank[vi]] + 1j * axis[gray_rank[vq]]
    bit_table = ((v[:, None] >> np.arange(bits - 1, -1, -1)[None, :]) & 1).astype(np.uint8)
    return points, bit_table


def map_qam(bits: np.ndarray, order: int) -> np.ndarray:
    """Map a 0/1 bit sequence to Gray-coded square QAM symbols."""
    points, _ = qam_constellation(order)
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    nbits = int(np.log2(order))
    if bits.size % nbits:
        raise ValueError(f"bit count {bits.size} not divisible by log2(Q) = {nbits}")
    groups = bits.reshape(-1, nbits)
    values = groups @ (1 << np.arange(nbits - 1, -1, -1))
    return points[values]


def demap_qam(symbols: np.ndarray, order: int) -> np.ndarray:
    """Hard-decision inverse of map_qam (exact on noiseless symbols)."""
    symbols = np.asarray(symbols).ravel()
    points, bit_table = qam_constellation(order)
    dist = np.abs(symbols[:, None] - points[None, :])
    return bit_table[np.argmin(dist, axis=1)].ravel()


def build_frame(symbols: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """Fill data symbols delay-major into the grid; ZP rows stay zero."""
    symbols = np.asarray(symbols).ravel()
    if symbols.size != geometry.data_symbols:
        raise ValueError(
            f"expected {geometry.data_symbols} symbols for this geometry, got {symbols.size}"
        )
    grid = np.zeros((geometry.m_delay, geometry.n_seq), dtype=complex)
    grid[: geometry.data_rows, :] = symbols.reshape(geometry.data_rows, geometry.n_seq)
    return grid


def grid_to_vector(grid: np.ndarray) -> np.ndarray:
    """Row-major stacking x = vec(X^T): x[m*N + n] = X[m, n]."""
    return np.asarray(grid).ravel()


def vector_to_grid(x: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    return np.asarray(x).reshape(geometry.m_delay, geometry.n_seq)


def time_from_ds(x: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """CP-free time samples from a delay-sequency vector: P (I_M x W_N) x."""
    m, n = geometry.m_delay, geometry.n_seq
    x = np.asarray(x)
    if x.shape != (m * n,):
        raise ValueError(f"expected length {m * n}, got {x.shape}")
    dt = fwht(x.reshape(m, n), axis=1).ravel()
    return perfect_shuffle(dt, m, n)


def ds_from_time(s: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """Inverse of time_from_ds: (I_M x W_N) P^T s."""
    m, n = geometry.m_delay, geometry.n_seq
    s = np.asarray(s)
    if s.shape != (m * n,):
        raise ValueError(f"expected length {m * n}, got {s.shape}")
    dt = perfect_unshuffle(s, m, n)
    return fwht(dt.reshape(m, n), axis=1).ravel()


def append_cp(s_body: np.ndarray, l_max: int) -> np.ndarray:
    """Prefix the last l_max samples as a cyclic prefix."""
    if l_max == 0:
        return np.asarray(s_body).copy()
    return np.concatenate([s_body[-l_max:], s_body])


def remove_cp(r: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    if r.shape != (geometry.frame_len,):
        raise ValueError(f"expected length {geometry.frame_len}, got {r.shape}")
    return np.asarray(r)[geometry.l_max :]


def otsm_modulate(grid: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """Grid -> CP-prefixed time signal of length NM + l_max."""
    grid = np.asarray(grid)
    if grid.shape != (geometry.m_delay, geometry.n_seq):
        raise ValueError(
            f"grid shape {grid.shape} does not match geometry "
            f"({geometry.m_delay}, {geometry.n_seq})"
        )
    return append_cp(time_from_ds(grid.ravel(), geometry), geometry.l_max)


def otsm_demodulate(r: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """CP-prefixed time signal -> delay-sequency vector of length NM."""
    return ds_from_time(remove_cp(np.asarray(r), geometry), geometry)
