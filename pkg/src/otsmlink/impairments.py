"""Transmitter and receiver hardware impairment chains.

Tx side: IQ imbalance, DC offset, and oscillator phase noise followed by a
memory-polynomial power amplifier.  Rx side: IQ imbalance, DC offset, phase
noise, and carrier frequency offset, followed by fractional-delay resampling
that models a residual timing offset.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .framing import FrameGeometry


@dataclass(frozen=True)
class IqiParams:
    """Asymmetric IQ-imbalance model with half-angle coefficients.

    alpha = (1 + g e^{-j phi/2})/2 and beta = (1 - g e^{+j phi/2})/2 with
    g the linear gain mismatch; (0 dB, 0 deg) gives alpha=1, beta=0.
    """

    gain_db: float = 0.0
    phase_deg: float = 0.0

    @property
    def gain_lin(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)

    @property
    def phase_rad(self) -> float:
        return np.deg2rad(self.phase_deg)

    @property
    def alpha(self) -> complex:
        return (1.0 + self.gain_lin * np.exp(-0.5j * self.phase_rad)) / 2.0

    @property
    def beta(self) -> complex:
        return (1.0 - self.gain_lin * np.exp(+0.5j * self.phase_rad)) / 2.0

    @property
    def is_ideal(self) -> bool:
        return self.gain_db == 0.0 and self.phase_deg == 0.0


@dataclass(frozen=True)
class PaModel:
    """Memory-polynomial amplifier: y[q] = sum_ij rho_ij x[q-i] |x[q-i]|^j.

    The double sum runs over the full rectangle i in [0, depth], j in
    [0, order] by default; triangular=True restricts to j <= order - i.
    """

    memory_depth: int = 0
    order: int = 0
    coeffs: tuple = ((1.0,),)  # coeffs[i][j]
    triangular: bool = False

    @classmethod
    def identity(cls) -> "PaModel":
        return cls(0, 0, ((1.0,),))

    @classmethod
    def default(cls, memory_depth: int, order: int, triangular: bool = False) -> "PaModel":
        """Stand-in coefficient table: unit linear gain, even-envelope
        distortion terms decaying 0.5 per memory tap and per order step,
        small linear memory echoes."""
        rho = np.zeros((memory_depth + 1, order + 1), dtype=complex)
        rho[0, 0] = 1.0
        for i in range(memory_depth + 1):
            for j in range(order + 1):
                if (i, j) == (0, 0):
                    continue
                if j == 0:
                    rho[i, j] = (0.02 - 0.01j) * 0.5 ** (i - 1)
                elif j % 2 == 0:
                    rho[i, j] = (-0.05 + 0.01j) * 0.5**i * 0.5 ** ((j - 2) // 2)
        return cls(memory_depth, order, tuple(tuple(row) for row in rho), triangular)

    @property
    def is_identity(self) -> bool:
        return self.memory_depth == 0 and self.order == 0 and self.coeffs == ((1.0,),)

    def apply(self, x: np.ndarray) -> np.ndarray:
        rho = np.asarray(self.coeffs, dtype=complex)
        if rho.shape != (self.memory_depth + 1, self.order + 1):
            raise ValueError(
                f"coefficient table shape {rho.shape} does not match "
                f"(depth+1, order+1) = ({self.memory_depth + 1}, {self.order + 1})"
            )
        x = np.asarray(x)
        y = np.zeros_like(x, dtype=complex)
        for i in range(self.memory_depth + 1):
            xi = np.zeros_like(x, dtype=complex)
            xi[i:] = x[: x.size - i] if i else x
            env = np.abs(xi)
            j_hi = self.order - i if self.triangular else self.order
            for j in range(j_hi + 1):
                c = rho[i, j]
                if c != 0:
                    y += c * xi * env**j
        return y


@dataclass(frozen=True)
class StoParams:
    """Residual timing-offset profile.

    i1/i2 are the opaque loop settings of the scenario table; they map to a
    constant fractional offset mu = 0.5 * i1/i2 (zero integer offset), which
    grows with i1 and with shrinking i2-i1, matching the documented severity
    ordering.  (0, 0) means no offset.
    """

    i1: int = 0
    i2: int = 0
    frac_override: float | None = None

    @property
    def frac_offset(self) -> float:
        if self.frac_override is not None:
            return self.frac_override
        if self.i1 == 0 and self.i2 == 0:
            return 0.0
        return 0.5 * self.i1 / self.i2

    @property
    def is_ideal(self) -> bool:
        return self.frac_offset == 0.0


@dataclass(frozen=True)
class HwiScenario:
    """Full impairment parameter record for one scenario."""

    tx_iqi: IqiParams = IqiParams()
    rx_iqi: IqiParams = IqiParams()
    tx_dco_db: float | None = None  # None = no DC offset
    rx_dco_db: float | None = None
    tx_pn_var: float = 0.0  # end-of-frame phase variance [rad^2]
    rx_pn_var: float = 0.0
    pa: PaModel = PaModel.identity()
    cfo_hz: float = 0.0
    sto: StoParams = StoParams()
    pn_model: str = "wiener"  # or "iid"

    def __post_init__(self):
        if self.tx_pn_var < 0 or self.rx_pn_var < 0:
            raise ValueError("phase-noise variance must be non-negative")
        if self.pn_model not in ("wiener", "iid"):
            raise ValueError(f"unknown phase-noise model {self.pn_model!r}")

    @staticmethod
    def _dco_amplitude(level_db: float | None) -> float:
        # DC amplitude for a DC-to-average-signal-power ratio in dB,
        # referenced to unit average sample power
        return 0.0 if level_db is None else 10.0 ** (level_db / 20.0)

    @property
    def tx_dco(self) -> float:
        return self._dco_amplitude(self.tx_dco_db)

    @property
    def rx_dco(self) -> float:
        return self._dco_amplitude(self.rx_dco_db)

    def linearized(self) -> "HwiScenario":
        """Copy with the amplifier and timing offset disabled; the linear
        matrix I/O relations model exactly this subset of the chain."""
        return replace(self, pa=PaModel.identity(), sto=StoParams())

    @property
    def is_ideal(self) -> bool:
        return (
            self.tx_iqi.is_ideal
            and self.rx_iqi.is_ideal
            and self.tx_dco == 0.0
            and self.rx_dco == 0.0
            and self.tx_pn_var == 0.0
            and self.rx_pn_var == 0.0
            and self.pa.is_identity
            and self.cfo_hz == 0.0
            and self.sto.is_ideal
        )


def _preset_table() -> dict[int, HwiScenario]:
    def iqi(g, p):
        return IqiParams(g, p)

    return {
        0: HwiScenario(),
        1: HwiScenario(iqi(0.3, 1), iqi(0.3, 1), 0.7, 0.7, 0.1, 0.1,
                       PaModel.default(2, 2), 15e3, StoParams(4167, 4567)),
        2: HwiScenario(iqi(0.8, 2), iqi(0.8, 2), 1.2, 1.2, 0.8, 0.8,
                       PaModel.default(3, 4), 20e3, StoParams(4272, 4572)),
        3: HwiScenario(iqi(1.3, 3), iqi(1.3, 3), 1.6, 1.8, 1.6, 1.6,
                       PaModel.default(4, 6), 25e3, StoParams(4388, 4588)),
        4: HwiScenario(iqi(2.0, 4), iqi(2.0, 4), 2.5, 2.5, 3.0, 3.0,
                       PaModel.default(5, 8), 30e3, StoParams(4495, 4595)),
    }


def scenario_preset(index: int) -> HwiScenario:
    """Named scenario presets 0 (ideal) through 4 (harshest)."""
    table = _preset_table()
    if index not in table:
        raise ValueError(f"unknown scenario preset {index}; valid presets are 0..4")
    return table[index]


@dataclass
class ImpairmentRealization:
    """Per-frame draw of the stochastic impairments.

    The phase vectors are exp(-j angle) so that omega = rx_pn_angle +
    cfo_angle is the composite receive phase entering the noise statistics.
    """

    tx_pn_angle: np.ndarray
    rx_pn_angle: np.ndarray
    cfo_angle: np.ndarray
    sto_base: np.ndarray   # integer base-point offset per output sample
    sto_frac: np.ndarray   # fractional interval per output sample

    @property
    def tx_pn(self) -> np.ndarray:
        return np.exp(-1j * self.tx_pn_angle)

    @property
    def rx_pn(self) -> np.ndarray:
        return np.exp(-1j * self.rx_pn_angle)

    @property
    def cfo(self) -> np.ndarray:
        return np.exp(-1j * self.cfo_angle)

    @property
    def rx_phase(self) -> np.ndarray:
        """Combined Rx PN+CFO unit-modulus vector."""
        return np.exp(-1j * (self.rx_pn_angle + self.cfo_angle))


def ideal_realization(geometry: FrameGeometry) -> ImpairmentRealization:
    s = geometry.frame_len
    z = np.zeros(s)
    return ImpairmentRealization(z.copy(), z.copy(), z.copy(), np.zeros(s, dtype=int), z.copy())


def draw_realization(
    scenario: HwiScenario, geometry: FrameGeometry, rng: np.random.Generator
) -> ImpairmentRealization:
    """Draw phase-noise trajectories, the CFO ramp, and the timing profile.

    Wiener phase noise uses increment variance sigma^2/(NM+l_max) so the
    end-of-frame phase variance equals the scenario's sigma^2.
    """
    s = geometry.frame_len

    def pn(var):
        if var == 0.0:
            return np.zeros(s)
        if scenario.pn_model == "iid":
            return rng.normal(0.0, np.sqrt(var), s)
        return np.cumsum(rng.normal(0.0, np.sqrt(var / s), s))

    cfo_angle = 2.0 * np.pi * scenario.cfo_hz * np.arange(s) / geometry.bandwidth_hz
    return ImpairmentRealization(
        tx_pn_angle=pn(scenario.tx_pn_var),
        rx_pn_angle=pn(scenario.rx_pn_var),
        cfo_angle=cfo_angle,
        sto_base=np.zeros(s, dtype=int),
        sto_frac=np.full(s, scenario.sto.frac_offset),
    )


def tx_impair(
    s: np.ndarray, scenario: HwiScenario, realization: ImpairmentRealization
) -> np.ndarray:
    """Tx chain: IQI + DCO + PN, then the memory-polynomial amplifier."""
    s = np.asarray(s)
    rotated = s * realization.tx_pn
    alpha, beta = scenario.tx_iqi.alpha, scenario.tx_iqi.beta
    bar = alpha * rotated + beta * np.conj(rotated) + scenario.tx_dco
    return scenario.pa.apply(bar)


def rx_impair(
    r: np.ndarray, scenario: HwiScenario, realization: ImpairmentRealization
) -> np.ndarray:
    """Rx front end: IQI + DCO + PN + CFO (before timing resampling)."""
    r = np.asarray(r)
    rotated = r * realization.rx_phase
    alpha, beta = scenario.rx_iqi.alpha, scenario.rx_iqi.beta
    return alpha * rotated + beta * np.conj(rotated) + scenario.rx_dco


def cubic_interp_weights(mu) -> np.ndarray:
    """4-tap cubic-Lagrange weights for taps i = -1, 0, 1, 2.

    The output sum_i x[m - i] w_i(mu) interpolates x at position m - mu;
    mu = 0 reduces to the unit sample at i = 0.
    """
    mu = np.asarray(mu, dtype=float)
    w_m1 = -mu * (1 - mu) * (2 - mu) / 6.0
    w_0 = (1 + mu) * (1 - mu) * (2 - mu) / 2.0
    w_p1 = mu * (1 + mu) * (2 - mu) / 2.0
    w_p2 = -mu * (1 + mu) * (1 - mu) / 6.0
    return np.stack([w_m1, w_0, w_p1, w_p2])


def fractional_resample(
    signal: np.ndarray, base: np.ndarray, frac: np.ndarray
) -> np.ndarray:
    """Resample signal at positions (q + base[q]) - frac[q] with the cubic
    kernel; out-of-range source samples are treated as zero."""
    signal = np.asarray(signal)
    n = signal.size
    m = np.arange(n) + np.broadcast_to(np.asarray(base, dtype=int), (n,))
    weights = cubic_interp_weights(np.broadcast_to(np.asarray(frac, dtype=float), (n,)))
    out = np.zeros(n, dtype=complex)
    for k, i in enumerate((-1, 0, 1, 2)):
        src = m - i
        valid = (src >= 0) & (src < n)
        out[valid] += signal[src[valid]] * weights[k][valid]
    return out


def sto_resample(
    r_bar: np.ndarray, realization: ImpairmentRealization
) -> np.ndarray:
    """Apply the residual timing offset of the realization."""
    if np.all(realization.sto_base == 0) and np.all(realization.sto_frac == 0.0):
        return np.asarray(r_bar).astype(complex, copy=True)
    return fractional_resample(r_bar, realization.sto_base, realization.sto_frac)
