"""Impairment-aware input/output relations of the full linear chain.

Three equivalent views of the same map are provided: composite per-sample
coefficients (g1/g2/g3) feeding a sequency-domain vector relation built on
dyadic convolution, dense delay-sequency operator matrices, and the
sample-domain pipeline itself.  The relations cover the linear impairments
(IQI, DCO, PN, CFO); the amplifier and timing resampler are nonlinear /
out-of-band and exist only in the sample pipeline.

All dense builders are oracle/analysis tools guarded to NM <= 4096.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelTaps, build_H, cir_band
from .framing import FrameGeometry, ds_from_time, time_from_ds
from .impairments import HwiScenario, ImpairmentRealization
from .transforms import dyadic_convolve, fwht, shuffle_indices

DENSE_GUARD = 4096


def _check_dense_size(geometry: FrameGeometry) -> None:
    if geometry.nm > DENSE_GUARD:
        raise ValueError(
            f"dense operator construction is capped at NM <= {DENSE_GUARD}; "
            f"got NM = {geometry.nm}"
        )


# ---------------------------------------------------------------------------
# dense operator helpers: left/right application of the structural matrices
# ---------------------------------------------------------------------------


def _iw_left(a: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """(I_M x W_N) @ a for a of shape (NM, ...)."""
    m, n = geometry.m_delay, geometry.n_seq
    cols = a.reshape(m, n, -1)
    return fwht(cols, axis=1).reshape(a.shape)


def _iw_right(a: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """a @ (I_M x W_N) for a of shape (..., NM)."""
    m, n = geometry.m_delay, geometry.n_seq
    rows = a.reshape(-1, m, n)
    return fwht(rows, axis=2).reshape(a.shape)


def _p_left(a, geometry):
    return a[shuffle_indices(geometry.m_delay, geometry.n_seq)]


def _pt_left(a, geometry):
    return a[shuffle_indices(geometry.n_seq, geometry.m_delay)]


def _p_right(a, geometry):
    return a[:, shuffle_indices(geometry.n_seq, geometry.m_delay)]


def _pt_right(a, geometry):
    return a[:, shuffle_indices(geometry.m_delay, geometry.n_seq)]


def _acp_right(a: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """a @ A_cp: fold the CP columns back onto the tail."""
    l = geometry.l_max
    out = a[:, l:].copy()
    if l:
        out[:, -l:] += a[:, :l]
    return out


def _rcp_left(a: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    return a[geometry.l_max :]


def demodulate_body(v: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """(I_M x W_N) P^T R_cp applied to a CP-length vector."""
    return ds_from_time(v[geometry.l_max :], geometry)


def _tx_time(x: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    """A_cp P (I_M x W_N) x as a CP-length vector."""
    body = time_from_ds(x, geometry)
    l = geometry.l_max
    return np.concatenate([body[-l:], body]) if l else body.copy()


# ---------------------------------------------------------------------------
# composite coefficients
# ---------------------------------------------------------------------------


def gi_coeff_bands(
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite coefficients g1/g2/g3 as (l_max+1, NM) bands.

    Index q = m + n*M runs over the CP-stripped frame; every ingredient is
    sampled at the matching absolute instant q + l_max of the CP-extended
    chain, and the Tx phase noise at the delayed instant q + l_max - l (its
    diagonal sits between the channel and the CP matrix in the operator
    composition, so the channel delay shifts its sample index).
    """
    band = cir_band(taps, geometry)  # g[l, c] on the absolute axis
    s = geometry.frame_len
    l_max = geometry.l_max
    phi = realization.rx_phase
    a_tx, b_tx = scenario.tx_iqi.alpha, scenario.tx_iqi.beta
    a_rx, b_rx = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
    tx_pn = realization.tx_pn
    g1 = np.empty((l_max + 1, geometry.nm), dtype=complex)
    g2 = np.empty_like(g1)
    g3 = np.empty_like(g1)
    c = np.arange(l_max, s)  # absolute indices of the retained samples
    for l in range(l_max + 1):
        direct = a_rx * phi[c] * band[l, c]
        image = b_rx * np.conj(phi[c] * band[l, c])
        s_tx = tx_pn[c - l]
        g1[l] = s_tx * (a_tx * direct + np.conj(b_tx) * image)
        g2[l] = np.conj(s_tx) * (b_tx * direct + np.conj(a_tx) * image)
        g3[l] = direct + image
    return g1, g2, g3


def gi_coeffs(
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
    l: int,
    m: int,
    n: int,
) -> tuple[complex, complex, complex]:
    """Scalar (g1, g2, g3) at delay tap l and frame position (m, n)."""
    if not 0 <= l <= geometry.l_max:
        raise IndexError(f"delay index out of range 0..{geometry.l_max}")
    if not (0 <= m < geometry.m_delay and 0 <= n < geometry.n_seq):
        raise IndexError("frame position out of range")
    g1, g2, g3 = gi_coeff_bands(taps, scenario, realization, geometry)
    q = m + n * geometry.m_delay
    return g1[l, q], g2[l, q], g3[l, q]


def sequency_spread(
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
    m: int,
    l: int,
):
    """Sequency spread vectors u_i (length N) and matrices U_i = W diag(g_i) W
    for one (delay row, tap) pair."""
    g1, g2, g3 = gi_coeff_bands(taps, scenario, realization, geometry)
    n, m_delay = geometry.n_seq, geometry.m_delay
    w = fwht(np.eye(n), axis=0)
    out_vecs, out_mats = [], []
    for g in (g1, g2, g3):
        gt = g[l].reshape(n, m_delay)[:, m]  # coefficient against the block index
        out_vecs.append(fwht(gt))
        out_mats.append(w @ np.diag(gt) @ w)
    return tuple(out_vecs), tuple(out_mats)


# ---------------------------------------------------------------------------
# vector-form I/O relation (dyadic convolution per delay row)
# ---------------------------------------------------------------------------


def ds_io_vector(
    x: np.ndarray,
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    noise: np.ndarray,
    geometry: FrameGeometry,
) -> np.ndarray:
    """Sequency-domain output built row by row from the g1/g2/g3 bands.

    Covers the linear impairments only; `noise` is the channel-level noise
    vector of length NM+l_max (pass zeros for the noiseless relation).
    Requires the ZP rows of x to be zero (guaranteed by build_frame).
    """
    m_delay, n = geometry.m_delay, geometry.n_seq
    x = np.asarray(x, dtype=complex)
    if x.shape != (geometry.nm,):
        raise ValueError(f"expected delay-sequency vector of length {geometry.nm}")
    grid = x.reshape(m_delay, n)
    if np.max(np.abs(grid[geometry.data_rows :, :])) > 1e-12:
        raise ValueError("ds_io_vector requires zero ZP rows in x")
    noise = np.asarray(noise, dtype=complex)
    if noise.shape != (geometry.frame_len,):
        raise ValueError(f"expected noise vector of length {geometry.frame_len}")

    g1, g2, g3 = gi_coeff_bands(taps, scenario, realization, geometry)
    x_seq = grid  # row m is already the sequency vector of delay bin m
    a_rx, b_rx = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
    phi = realization.rx_phase
    d_tx, d_rx = scenario.tx_dco, scenario.rx_dco

    y = np.zeros((m_delay, n), dtype=complex)
    for m in range(m_delay):
        row = np.zeros(n, dtype=complex)
        for l in range(geometry.l_max + 1):
            gt1 = g1[l].reshape(n, m_delay)[:, m]
            gt2 = g2[l].reshape(n, m_delay)[:, m]
            if m - l >= 0:
                u1 = fwht(gt1)
                u2 = fwht(gt2)
                row += dyadic_convolve(u1, x_seq[m - l])
                row += dyadic_convolve(u2, np.conj(x_seq[m - l]))
            if d_tx:
                gt3 = g3[l].reshape(n, m_delay)[:, m]
                row += d_tx * fwht(gt3)
        if d_rx:
            row[0] += np.sqrt(n) * d_rx
        c = m + np.arange(n) * m_delay + geometry.l_max
        w_rot = a_rx * phi[c] * noise[c] + b_rx * np.conj(phi[c] * noise[c])
        row += fwht(w_rot)
        y[m] = row
    return y.ravel()


# ---------------------------------------------------------------------------
# dense matrix-form operators
# ---------------------------------------------------------------------------


@dataclass
class EffectiveOperators:
    """Dense delay-sequency operators of the linear impaired chain."""

    geometry: FrameGeometry
    scenario: HwiScenario
    realization: ImpairmentRealization
    h_time: np.ndarray   # (NM+l_max)^2 channel matrix
    h_ds: np.ndarray     # signal term
    h_conj: np.ndarray   # conjugate-signal term
    dc_tx: np.ndarray    # received image of the Tx DC offset
    dc_rx: np.ndarray    # received image of the Rx DC offset
    g: np.ndarray        # time-domain effective matrix R_cp H A_cp
    g_dt: np.ndarray     # delay-time effective matrix P^T G P

    def noise_term(self, noise: np.ndarray) -> np.ndarray:
        """Sequency-domain image of a channel-level noise vector."""
        phi = self.realization.rx_phase
        a_rx, b_rx = self.scenario.rx_iqi.alpha, self.scenario.rx_iqi.beta
        rotated = a_rx * phi * noise + b_rx * np.conj(phi * noise)
        return demodulate_body(rotated, self.geometry)

    def apply(self, x: np.ndarray, noise: np.ndarray) -> np.ndarray:
        return (
            self.h_ds @ x
            + self.h_conj @ np.conj(x)
            + self.dc_tx
            + self.dc_rx
            + self.noise_term(noise)
        )


def build_ds_matrices(
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
    channel_form: str = "band",
) -> EffectiveOperators:
    """Materialise every term of the matrix-form I/O relation by composing
    the CP, shuffle, WHT, phase, and channel operators exactly."""
    _check_dense_size(geometry)
    h = build_H(taps, geometry, form=channel_form)
    s = geometry.frame_len
    theta_t = realization.tx_pn
    phi = realization.rx_phase
    a_tx, b_tx = scenario.tx_iqi.alpha, scenario.tx_iqi.beta
    a_rx, b_rx = scenario.rx_iqi.alpha, scenario.rx_iqi.beta

    def sandwich(left_phase: np.ndarray, core: np.ndarray, tx_phase: np.ndarray) -> np.ndarray:
        """R_cp diag(left_phase) core diag(tx_phase) A_cp."""
        mat = left_phase[:, None] * core * tx_phase[None, :]
        return _acp_right(_rcp_left(mat, geometry), geometry)

    def to_ds(mat: np.ndarray) -> np.ndarray:
        """(I_M x W_N) P^T mat P (I_M x W_N)."""
        mat = _iw_left(_pt_left(mat, geometry), geometry)
        return _iw_right(_p_right(mat, geometry), geometry)

    t_sig = a_tx * a_rx * sandwich(phi, h, theta_t) + np.conj(b_tx) * b_rx * sandwich(
        np.conj(phi), np.conj(h), theta_t
    )
    t_conj = b_tx * a_rx * sandwich(phi, h, np.conj(theta_t)) + np.conj(
        a_tx
    ) * b_rx * sandwich(np.conj(phi), np.conj(h), np.conj(theta_t))

    h_ds = to_ds(t_sig)
    h_conj = to_ds(t_conj)

    ones = np.ones(s)
    dc_time = scenario.tx_dco * (
        a_rx * phi * (h @ ones) + b_rx * np.conj(phi) * (np.conj(h) @ ones)
    )
    dc_tx = demodulate_body(dc_time, geometry)
    dc_rx = ds_from_time(scenario.rx_dco * np.ones(geometry.nm), geometry)

    g = _acp_right(_rcp_left(h, geometry), geometry)
    g_dt = _pt_left(_p_right(g, geometry), geometry)

    return EffectiveOperators(
        geometry=geometry,
        scenario=scenario,
        realization=realization,
        h_time=h,
        h_ds=h_ds,
        h_conj=h_conj,
        dc_tx=dc_tx,
        dc_rx=dc_rx,
        g=g,
        g_dt=g_dt,
    )


# ---------------------------------------------------------------------------
# special-case reductions
# ---------------------------------------------------------------------------

SPECIAL_CASE_MODES = ("ideal-35", "rxiqi-36", "txrxiqi-37", "rxiqi-cfo-38")


def special_case_output(
    mode: str,
    x: np.ndarray,
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    noise: np.ndarray,
    geometry: FrameGeometry,
) -> np.ndarray:
    """Dedicated implementation of each reduced I/O relation (oracle)."""
    h = build_H(taps, geometry, form="band")
    g = _acp_right(_rcp_left(h, geometry), geometry)
    s_body = time_from_ds(x, geometry)
    w_body = noise[geometry.l_max :]

    if mode == "ideal-35":
        return ds_from_time(g @ s_body + w_body, geometry)

    if mode == "rxiqi-36":
        a, b = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
        sig = g @ s_body
        return ds_from_time(
            a * sig + b * np.conj(sig) + a * w_body + b * np.conj(w_body), geometry
        )

    if mode == "txrxiqi-37":
        # sequency-spread form with unit phase vectors
        return ds_io_vector(x, taps, scenario, realization, noise, geometry)

    if mode == "rxiqi-cfo-38":
        # delay-time evaluation: per-sample coefficients against the block index
        m_delay, n = geometry.m_delay, geometry.n_seq
        g1, g2, _ = gi_coeff_bands(taps, scenario, realization, geometry)
        xt = fwht(np.asarray(x).reshape(m_delay, n), axis=1)  # delay-time rows
        a, b = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
        phi = realization.rx_phase
        yt = np.zeros((m_delay, n), dtype=complex)
        for m in range(m_delay):
            for l in range(geometry.l_max + 1):
                if m - l < 0:
                    continue
                yt[m] += g1[l].reshape(n, m_delay)[:, m] * xt[m - l]
                yt[m] += g2[l].reshape(n, m_delay)[:, m] * np.conj(xt[m - l])
            c = m + np.arange(n) * m_delay + geometry.l_max
            yt[m] += a * phi[c] * noise[c] + b * np.conj(phi[c] * noise[c])
        return fwht(yt, axis=1).ravel()

    raise ValueError(f"unknown special-case mode {mode!r}; valid: {SPECIAL_CASE_MODES}")


def special_case_residual(
    mode: str,
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
    rng: np.random.Generator,
) -> float:
    """Max |general matrix path - dedicated reduced path| on one random frame."""
    from .framing import build_frame, map_qam

    bits = rng.integers(0, 2, geometry.bits_per_frame)
    x = build_frame(map_qam(bits, geometry.qam_order), geometry).ravel()
    noise = (
        rng.standard_normal(geometry.frame_len) + 1j * rng.standard_normal(geometry.frame_len)
    ) * 0.1
    ops = build_ds_matrices(taps, scenario, realization, geometry)
    general = ops.apply(x, noise)
    reduced = special_case_output(mode, x, taps, scenario, realization, noise, geometry)
    return float(np.max(np.abs(general - reduced)))


# ---------------------------------------------------------------------------
# binary dumps
# ---------------------------------------------------------------------------


def dump_operator(path, array: np.ndarray) -> None:
    """Write a complex matrix/vector as row-major interleaved re/im float64
    plus a one-line-per-field text header."""
    path = Path(path)
    arr = np.atleast_2d(np.asarray(array, dtype=complex))
    flat = np.empty(arr.size * 2, dtype=np.float64)
    flat[0::2] = arr.real.ravel()
    flat[1::2] = arr.imag.ravel()
    path.with_suffix(".bin").write_bytes(flat.tobytes())
    header = (
        f"rows {arr.shape[0]}\n"
        f"cols {arr.shape[1]}\n"
        "dtype float64-interleaved-complex\n"
        "layout row-major\n"
    )
    path.with_suffix(".hdr").write_text(header)


def load_operator(path) -> np.ndarray:
    """Inverse of dump_operator."""
    path = Path(path)
    fields = dict(
        line.split(maxsplit=1) for line in path.with_suffix(".hdr").read_text().splitlines()
    )
    rows, cols = int(fields["rows"]), int(fields["cols"])
    flat = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype=np.float64)
    return (flat[0::2] + 1j * flat[1::2]).reshape(rows, cols)
