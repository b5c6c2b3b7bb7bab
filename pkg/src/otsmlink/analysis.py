"""Error-performance analysis: received-noise statistics, per-codeword
equivalent matrices, conditional and unconditional pairwise error bounds,
and the union-bound average bit error probability."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .channel import ChannelTaps, UnsupportedConfigurationError, build_H
from .effective import demodulate_body
from .framing import (
    FrameGeometry,
    build_frame,
    ds_from_time,
    map_qam,
    qam_constellation,
    time_from_ds,
)
from .impairments import HwiScenario, ImpairmentRealization


def q_func(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


# ---------------------------------------------------------------------------
# noise statistics
# ---------------------------------------------------------------------------


@dataclass
class NoiseProfile:
    """Per-sample received-noise variance model.

    per_sample_var follows the analytical formula
    (1 + cos 2w + g^2 (1 - cos(2w + phi))) sigma0^2 / 2 evaluated at each
    retained sample; circular_var is the variance actually attained by
    circularly-symmetric channel noise, (|alpha|^2 + |beta|^2) sigma0^2,
    which is constant.  The two coincide when the formula's cross terms
    vanish (no Rx gain/phase imbalance).
    """

    per_sample_var: np.ndarray
    sigma0_sq: float
    omega: np.ndarray
    circular_var: float


def noise_profile(
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    sigma0_sq: float,
    geometry: FrameGeometry,
) -> NoiseProfile:
    """Evaluate the analytical per-sample noise variance over the frame."""
    c = np.arange(geometry.l_max, geometry.frame_len)
    omega = realization.rx_pn_angle[c] + realization.cfo_angle[c]
    g = scenario.rx_iqi.gain_lin
    phi = scenario.rx_iqi.phase_rad
    per_sample = (
        (1.0 + np.cos(2 * omega) + g * g * (1.0 - np.cos(2 * omega + phi)))
        * sigma0_sq
        / 2.0
    )
    alpha, beta = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
    circ = (abs(alpha) ** 2 + abs(beta) ** 2) * sigma0_sq
    return NoiseProfile(per_sample, float(sigma0_sq), omega, float(circ))


def sigma_wbar(scenario: HwiScenario, sigma0_sq: float, omega: float) -> float:
    """Effective residual-noise variance at a single phase value: the
    analytical front-end noise variance plus the Rx DC power."""
    g = scenario.rx_iqi.gain_lin
    phi = scenario.rx_iqi.phase_rad
    front = (
        (1.0 + np.cos(2 * omega) + g * g * (1.0 - np.cos(2 * omega + phi)))
        * sigma0_sq
        / 2.0
    )
    return float(front + scenario.rx_dco**2)


def sigma_wbar_mean(
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    sigma0_sq: float,
    geometry: FrameGeometry,
) -> float:
    """Frame-averaged effective noise variance (scalar used by the bounds)."""
    prof = noise_profile(scenario, realization, sigma0_sq, geometry)
    return float(np.mean(prof.per_sample_var) + scenario.rx_dco**2)


# ---------------------------------------------------------------------------
# per-codeword equivalent matrices
# ---------------------------------------------------------------------------


@dataclass
class OmegaPair:
    """Columns of the per-path signal images for one codeword: the received
    vector is omega1 @ h + omega2 @ conj(h) + residual."""

    omega1: np.ndarray  # (NM, P)
    omega2: np.ndarray  # (NM, P)

    @property
    def omega(self) -> np.ndarray:
        return self.omega1 + self.omega2

    @property
    def p_count(self) -> int:
        return self.omega1.shape[1]


def build_omega(
    x: np.ndarray,
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
) -> OmegaPair:
    """Assemble the per-path codeword columns under the cyclic channel
    decomposition (integer delays only; gains are not used)."""
    if not taps.has_integer_delays:
        raise UnsupportedConfigurationError(
            "codeword matrices require integer path delays (cyclic shift form)"
        )
    x = np.asarray(x, dtype=complex)
    l = geometry.l_max
    body = time_from_ds(x, geometry)
    s_cp = np.concatenate([body[-l:], body]) if l else body.copy()
    theta_t = realization.tx_pn
    phi = realization.rx_phase
    a_tx, b_tx = scenario.tx_iqi.alpha, scenario.tx_iqi.beta
    a_rx, b_rx = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
    d_tx = scenario.tx_dco
    ones = np.ones(geometry.frame_len)

    s_bar = a_tx * theta_t * s_cp + b_tx * np.conj(theta_t * s_cp) + d_tx * ones
    s_bar_conj = np.conj(s_bar)

    p = taps.p_count
    omega1 = np.empty((geometry.nm, p), dtype=complex)
    omega2 = np.empty_like(omega1)
    for i in range(p):
        single = ChannelTaps([1.0], [taps.delays[i]], [taps.dopplers[i]])
        c_i = build_H(single, geometry, form="cyclic")
        omega1[:, i] = demodulate_body(a_rx * phi * (c_i @ s_bar), geometry)
        omega2[:, i] = demodulate_body(
            b_rx * np.conj(phi) * (np.conj(c_i) @ s_bar_conj), geometry
        )
    return OmegaPair(omega1, omega2)


def omega_residual_mean(
    scenario: HwiScenario, geometry: FrameGeometry
) -> np.ndarray:
    """Mean of the residual left over by the codeword decomposition: the
    sequency image of the Rx DC offset."""
    return ds_from_time(scenario.rx_dco * np.ones(geometry.nm), geometry)


# ---------------------------------------------------------------------------
# pairwise error probability
# ---------------------------------------------------------------------------


@dataclass
class PepReport:
    conditional_bound: float | None
    chiani_bound: float
    high_snr: float
    kappa: int
    eigenvalues: np.ndarray
    rho1: float
    rho2: float


def cond_pep(
    pair_i: OmegaPair,
    pair_j: OmegaPair,
    h_bar: np.ndarray,
    b: float,
    sigma_sq: float,
) -> float:
    """Conditional pairwise error bound Q(sqrt(d^2 / (2 b^2 |O_i|^2 + 2 s^2)))
    with d the combined-codeword distance seen through the CSI vector and
    |O_i| the Frobenius norm of the transmit-codeword matrix."""
    diff = (pair_i.omega - pair_j.omega) @ np.asarray(h_bar, dtype=complex)
    num = float(np.linalg.norm(diff) ** 2)
    den = 2.0 * b * b * float(np.linalg.norm(pair_i.omega) ** 2) + 2.0 * sigma_sq
    return float(q_func(np.sqrt(num / den)))


def pep_bound(
    pair_i: OmegaPair,
    pair_j: OmegaPair,
    b: float,
    sigma_sq: float,
    y_p: np.ndarray | None = None,
    rank_tol: float = 1e-10,
) -> PepReport:
    """Unconditional pairwise error bound via the exponential tail
    approximation and the spectral form of the CSI average."""
    p = pair_i.p_count
    if y_p is None:
        y_p = np.eye(p) / p
    y_p = np.asarray(y_p, dtype=complex)
    eig_y = np.linalg.eigvalsh((y_p + y_p.conj().T) / 2)
    if np.any(eig_y < -1e-12):
        raise ValueError("CSI covariance must be positive semi-definite")

    omega_i_sq = float(np.linalg.norm(pair_i.omega) ** 2)
    rho1 = 1.0 / (4.0 * b * b * omega_i_sq + 4.0 * sigma_sq)
    rho2 = 1.0 / (3.0 * b * b * omega_i_sq + 3.0 * sigma_sq)

    delta = pair_i.omega - pair_j.omega
    phi_mat = delta.conj().T @ delta
    lam = np.linalg.eigvalsh(phi_mat)
    lam = lam[lam > rank_tol * max(lam.max(), 1e-300)]
    kappa = lam.size

    # determinant form supports arbitrary PSD CSI covariance
    chiani = (1.0 / 12.0) / abs(np.linalg.det(np.eye(p) + rho1 * y_p @ phi_mat)) + (
        1.0 / 4.0
    ) / abs(np.linalg.det(np.eye(p) + rho2 * y_p @ phi_mat))

    if kappa:
        prod = np.prod(lam)
        high = 1.0 / (12.0 * (rho1 / p) ** kappa * prod) + 1.0 / (
            4.0 * (rho2 / p) ** kappa * prod
        )
    else:
        high = 1.0 / 12.0 + 1.0 / 4.0
    return PepReport(
        conditional_bound=None,
        chiani_bound=float(chiani),
        high_snr=float(high),
        kappa=int(kappa),
        eigenvalues=lam,
        rho1=float(rho1),
        rho2=float(rho2),
    )


# ---------------------------------------------------------------------------
# union-bound average bit error probability
# ---------------------------------------------------------------------------


def _substitution_classes(geometry: FrameGeometry):
    """All (data position, sent symbol, detected symbol) classes."""
    points, bit_table = qam_constellation(geometry.qam_order)
    order = geometry.qam_order
    for pos in range(geometry.data_symbols):
        for a in range(order):
            for b_sym in range(order):
                if a != b_sym:
                    n_be = int(np.sum(bit_table[a] != bit_table[b_sym]))
                    yield pos, a, b_sym, n_be


def abep_union_bound(
    taps: ChannelTaps,
    scenario: HwiScenario,
    realization: ImpairmentRealization,
    geometry: FrameGeometry,
    sigma_sq: float,
    b: float,
    policy: str = "single_sub",
    y_p: np.ndarray | None = None,
    n_pairs: int | None = None,
    rng: np.random.Generator | None = None,
    reference_bits: np.ndarray | None = None,
) -> float:
    """Union-bound bit error probability over codeword pairs.

    policy="single_sub" enumerates every single-symbol-substitution class
    exactly (the dominant error events); "exhaustive" sums over all ordered
    frame pairs and is guarded to frames of at most 8 bits; "sampled" draws
    n_pairs substitution classes uniformly and rescales.
    """
    points, _ = qam_constellation(geometry.qam_order)
    n_b = geometry.bits_per_frame

    def pep_between(bits_i, bits_j):
        xi = build_frame(map_qam(bits_i, geometry.qam_order), geometry).ravel()
        xj = build_frame(map_qam(bits_j, geometry.qam_order), geometry).ravel()
        pi = build_omega(xi, taps, scenario, realization, geometry)
        pj = build_omega(xj, taps, scenario, realization, geometry)
        return pep_bound(pi, pj, b, sigma_sq, y_p=y_p).chiani_bound

    if policy == "exhaustive":
        if n_b > 8:
            raise ValueError(
                f"exhaustive pair enumeration is guarded to 8 bits per frame, got {n_b}"
            )
        total = 0.0
        frames = 1 << n_b
        for vi in range(frames):
            bits_i = np.array([(vi >> k) & 1 for k in range(n_b)][::-1], dtype=np.uint8)
            for vj in range(frames):
                if vi == vj:
                    continue
                bits_j = np.array(
                    [(vj >> k) & 1 for k in range(n_b)][::-1], dtype=np.uint8
                )
                n_be = int(np.sum(bits_i != bits_j))
                total += pep_between(bits_i, bits_j) * n_be
        return total / (n_b * frames)

    if policy == "single_sub":
        # average over the sent frame enters only through the substituted
        # position; a reference frame supplies the other symbols
        if reference_bits is None:
            reference_bits = np.zeros(n_b, dtype=np.uint8)
        bps = geometry.bits_per_symbol
        _, bit_table = qam_constellation(geometry.qam_order)
        total = 0.0
        order = geometry.qam_order
        for pos, a, b_sym, n_be in _substitution_classes(geometry):
            bits_i = reference_bits.copy()
            bits_i[pos * bps : (pos + 1) * bps] = bit_table[a]
            bits_j = bits_i.copy()
            bits_j[pos * bps : (pos + 1) * bps] = bit_table[b_sym]
            total += pep_between(bits_i, bits_j) * n_be
        # each class occurs for the 1/Q fraction of frames carrying symbol a
        return total / (n_b * order)

    if policy == "sampled":
        if rng is None or n_pairs is None:
            raise ValueError("sampled policy needs rng and n_pairs")
        bps = geometry.bits_per_symbol
        _, bit_table = qam_constellation(geometry.qam_order)
        order = geometry.qam_order
        total = 0.0
        for _ in range(n_pairs):
            bits_i = rng.integers(0, 2, n_b).astype(np.uint8)
            pos = int(rng.integers(0, geometry.data_symbols))
            group = bits_i[pos * bps : (pos + 1) * bps]
            a = int(group @ (1 << np.arange(bps - 1, -1, -1)))
            b_sym = int((a + 1 + rng.integers(0, order - 1)) % order)
            bits_j = bits_i.copy()
            bits_j[pos * bps : (pos + 1) * bps] = bit_table[b_sym]
            n_be = int(np.sum(bits_i != bits_j))
            total += pep_between(bits_i, bits_j) * n_be
        # inclusion probability: uniform over frames, positions, and the
        # Q-1 alternative symbols
        scale = geometry.data_symbols * (order - 1) / n_pairs
        return total * scale / n_b

    raise ValueError(f"unknown pair policy {policy!r}")
