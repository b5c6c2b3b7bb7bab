"""Doubly-spread channel: tapped-delay-line profiles with Jakes Doppler,
discrete delay-time CIR, time-domain application, dense channel matrices,
and the statistical imperfect-CSI model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import FrameGeometry

SPEED_OF_LIGHT = 299792458.0  # m/s


class UnsupportedConfigurationError(ValueError):
    """Requested analysis path is undefined for this configuration."""

# Extended Vehicular A power-delay profile
EVA_DELAYS_NS = (0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0)
EVA_POWERS_DB = (0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9)


@dataclass(frozen=True)
class ChannelProfile:
    """Tapped-delay-line power-delay profile (delays in ns, powers in dB)."""

    delays_ns: tuple
    powers_db: tuple
    name: str = "custom"

    def __post_init__(self):
        if len(self.delays_ns) != len(self.powers_db):
            raise ValueError("delays_ns and powers_db must have equal length")
        if len(self.delays_ns) == 0:
            raise ValueError("profile needs at least one tap")

    @classmethod
    def eva(cls) -> "ChannelProfile":
        return cls(EVA_DELAYS_NS, EVA_POWERS_DB, name="eva")

    @classmethod
    def single_tap(cls) -> "ChannelProfile":
        return cls((0.0,), (0.0,), name="flat")

    @property
    def linear_powers(self) -> np.ndarray:
        """Per-tap powers normalised to unit total."""
        p = 10.0 ** (np.asarray(self.powers_db) / 10.0)
        return p / p.sum()

    def truncated(self, l_max: int, bandwidth_hz: float) -> "ChannelProfile":
        """Keep only taps whose normalised delay fits within l_max."""
        delays = np.asarray(self.delays_ns)
        keep = delays * 1e-9 * bandwidth_hz <= l_max
        if not keep.any():
            raise ValueError("truncation removed every tap")
        return ChannelProfile(
            tuple(delays[keep]),
            tuple(np.asarray(self.powers_db)[keep]),
            name=f"{self.name}-trunc",
        )


@dataclass
class ChannelTaps:
    """One realisation of a P-path doubly-spread channel.

    gains are complex path amplitudes; delays/dopplers are the normalised
    (possibly fractional) shifts in samples and cycles per frame.
    """

    gains: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray

    def __post_init__(self):
        self.gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        self.delays = np.atleast_1d(np.asarray(self.delays, dtype=float))
        self.dopplers = np.atleast_1d(np.asarray(self.dopplers, dtype=float))
        if not (self.gains.shape == self.delays.shape == self.dopplers.shape):
            raise ValueError("gains, delays, dopplers must have equal length")
        if np.any(self.delays < 0):
            raise ValueError("normalised delays must be non-negative")

    @property
    def p_count(self) -> int:
        return self.gains.size

    @property
    def has_integer_delays(self) -> bool:
        return bool(np.all(self.delays == np.round(self.delays)))

    def with_gains(self, gains: np.ndarray) -> "ChannelTaps":
        return ChannelTaps(np.asarray(gains, dtype=complex), self.delays.copy(), self.dopplers.copy())


def max_doppler_shift(speed_kph: float, carrier_hz: float) -> float:
    """Maximum Doppler shift in Hz for the given speed and carrier."""
    return (speed_kph / 3.6) * carrier_hz / SPEED_OF_LIGHT


def sample_channel(
    profile: ChannelProfile,
    geometry: FrameGeometry,
    speed_kph: float,
    carrier_hz: float,
    rng: np.random.Generator,
) -> ChannelTaps:
    """Draw one channel realisation: Rayleigh gains per profile power,
    fixed profile delays, Jakes-distributed fractional Dopplers."""
    bandwidth = geometry.bandwidth_hz
    delays = np.asarray(profile.delays_ns) * 1e-9 * bandwidth
    if np.any(delays > geometry.l_max):
        raise ValueError(
            f"profile delay {delays.max():.2f} samples exceeds l_max = {geometry.l_max}; "
            "truncate the profile or enlarge the geometry"
        )
    powers = profile.linear_powers
    p = powers.size
    gains = np.sqrt(powers / 2.0) * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    # k_max = nu_max * N*T with T = 1/delta_f, i.e. nu_max * NM/B
    k_max = max_doppler_shift(speed_kph, carrier_hz) * geometry.nm / bandwidth
    angles = rng.uniform(0.0, 2.0 * np.pi, p)
    dopplers = k_max * np.cos(angles)
    return ChannelTaps(gains, delays, dopplers)


def dt_cir(taps: ChannelTaps, l, q, geometry: FrameGeometry):
    """Discrete delay-time CIR g[l, q] with sinc interpolation over
    fractional delays and a per-path Doppler phase ramp.

    q indexes the CP-extended time axis 0 .. NM+l_max-1; broadcasting over
    array-valued l/q is supported.
    """
    l_arr, q_arr = np.broadcast_arrays(np.asarray(l), np.asarray(q))
    if np.any(l_arr < 0) or np.any(l_arr > geometry.l_max):
        raise IndexError(f"delay index out of range 0..{geometry.l_max}")
    if np.any(q_arr < 0) or np.any(q_arr >= geometry.frame_len):
        raise IndexError(f"time index out of range 0..{geometry.frame_len - 1}")
    lf = l_arr.ravel()[None, :]
    qf = q_arr.ravel()[None, :]
    phase = np.exp(2j * np.pi * taps.dopplers[:, None] * (qf - lf) / geometry.nm)
    window = np.sinc(lf - taps.delays[:, None])
    vals = (taps.gains[:, None] * phase * window).sum(axis=0).reshape(l_arr.shape)
    return complex(vals) if vals.ndim == 0 else vals


def cir_band(taps: ChannelTaps, geometry: FrameGeometry) -> np.ndarray:
    """All CIR values as a band array of shape (l_max+1, NM+l_max)."""
    s = geometry.frame_len
    q = np.arange(s)
    band = np.empty((geometry.l_max + 1, s), dtype=complex)
    for l in range(geometry.l_max + 1):
        phase = np.exp(2j * np.pi * np.outer(taps.dopplers, q - l) / geometry.nm)
        window = np.sinc(l - taps.delays)
        band[l] = (taps.gains[:, None] * phase * window[:, None]).sum(axis=0)
    return band


def apply_channel(
    s_hi: np.ndarray,
    taps: ChannelTaps,
    noise_var: float,
    rng: np.random.Generator | None,
    geometry: FrameGeometry,
) -> np.ndarray:
    """Linear time-varying convolution r[q] = sum_l g[l,q] s[q-l] + w[q]
    with zero signal history before q = 0 and circular CN(0, noise_var) noise."""
    s_hi = np.asarray(s_hi)
    s = geometry.frame_len
    if s_hi.shape != (s,):
        raise ValueError(f"expected signal length {s}, got {s_hi.shape}")
    band = cir_band(taps, geometry)
    r = np.zeros(s, dtype=complex)
    for l in range(geometry.l_max + 1):
        r[l:] += band[l, l:] * s_hi[: s - l]
    if noise_var > 0:
        if rng is None:
            raise ValueError("rng required when noise_var > 0")
        r += np.sqrt(noise_var / 2.0) * (rng.standard_normal(s) + 1j * rng.standard_normal(s))
    return r


def build_H(taps: ChannelTaps, geometry: FrameGeometry, form: str = "band") -> np.ndarray:
    """Dense (NM+l_max)^2 time-domain channel matrix.

    form="band": H[q, q-l] = g[l, q], the matrix realised by apply_channel
    (supports fractional delays, no wrap).
    form="cyclic": H = sum_i h_i Pi^l_i Delta^k_i with Pi the forward cyclic
    row shift and Delta = diag(exp(j 2 pi k_i q / NM)); integer delays only.
    """
    s = geometry.frame_len
    if form == "band":
        band = cir_band(taps, geometry)
        h = np.zeros((s, s), dtype=complex)
        for l in range(geometry.l_max + 1):
            idx = np.arange(l, s)
            h[idx, idx - l] = band[l, l:]
        return h
    if form == "cyclic":
        if not taps.has_integer_delays:
            raise UnsupportedConfigurationError(
                "cyclic Pi/Delta channel form requires integer delays"
            )
        h = np.zeros((s, s), dtype=complex)
        q = np.arange(s)
        for gain, delay, doppler in zip(taps.gains, taps.delays, taps.dopplers):
            shift = int(round(delay))
            z = np.exp(2j * np.pi * doppler * q / geometry.nm)
            # row q of Pi^shift selects column (q - shift) mod s
            h[q, (q - shift) % s] += gain * z[(q - shift) % s]
        return h
    raise ValueError(f"unknown channel matrix form {form!r}")


def degrade_csi(gains: np.ndarray, b: float, rng: np.random.Generator) -> np.ndarray:
    """Imperfect-CSI mixing: h_bar = sqrt(1-b^2) h + b eps, eps ~ CN(0, I)."""
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"CSI imperfectness b must lie in [0, 1], got {b}")
    gains = np.asarray(gains, dtype=complex)
    if b == 0.0:
        return gains.copy()
    eps = (rng.standard_normal(gains.shape) + 1j * rng.standard_normal(gains.shape)) / np.sqrt(2.0)
    return np.sqrt(1.0 - b * b) * gains + b * eps
