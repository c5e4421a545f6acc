"""Path loss, Nakagami-m fading and link-budget bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_KM_S = 3.0e5
MAX_NAKAGAMI_M = 20


@dataclass(frozen=True)
class ChannelParams:
    carrier_freq_hz: float = 20e9
    nakagami_m: int = 1
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 30e6

    def __post_init__(self) -> None:
        m = self.nakagami_m
        if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
            raise ValueError(f"nakagami_m must be an integer, got {m!r}")
        if not 1 <= m <= MAX_NAKAGAMI_M:
            raise ValueError(f"nakagami_m must lie in [1, {MAX_NAKAGAMI_M}], got {m}")
        if not self.carrier_freq_hz > 0:
            raise ValueError("carrier_freq_hz must be positive")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")

    @property
    def noise_power_w(self) -> float:
        """Thermal noise power N0*W in watts."""
        return 10.0 ** ((self.noise_psd_dbm_hz + 10.0 * math.log10(self.bandwidth_hz) - 30.0) / 10.0)

    @property
    def unit_distance_gain(self) -> float:
        """(c / (4 pi f_c))^2 with c in km/s, i.e. the path loss at 1 km."""
        return (SPEED_OF_LIGHT_KM_S / (4.0 * math.pi * self.carrier_freq_hz)) ** 2


@dataclass(frozen=True)
class LinkBudget:
    """Per-constellation transmit parameters.

    ``mainlobe_gain`` and ``interferer_gain`` are effective gains, i.e. they
    already include the terminal receive gain.
    """

    tx_power_w: float
    mainlobe_gain: float = 1.0
    interferer_gain: float = 1e-3
    bias: float = 1.0
    pathloss_exp: float = 2.0

    def __post_init__(self) -> None:
        for name in ("tx_power_w", "mainlobe_gain", "interferer_gain", "bias"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if not self.pathloss_exp >= 2.0:
            raise ValueError(f"pathloss_exp must be >= 2, got {self.pathloss_exp!r}")

    @property
    def biased_power(self) -> float:
        return self.tx_power_w * self.mainlobe_gain * self.bias


def path_loss(distance_km, alpha: float, params: ChannelParams):
    """Large-scale gain ``(c/(4 pi f_c))^2 d^-alpha`` with ``d`` in km."""
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be strictly positive")
    out = params.unit_distance_gain * d ** (-alpha)
    return float(out) if out.ndim == 0 else out


def _check_m(m: int) -> None:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"Nakagami parameter must be a positive integer, got {m!r}")


def _check_gain(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("channel gain must be nonnegative")
    return x


def nakagami_cdf(x, m: int):
    """Exact CDF of a unit-mean Nakagami-m power gain (integer m)."""
    _check_m(m)
    x = _check_gain(x)
    mx = m * x
    term = np.ones_like(mx)
    acc = np.ones_like(mx)
    for q in range(1, m):
        term = term * mx / q
        acc = acc + term
    out = 1.0 - np.exp(-mx) * acc
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def alzer_nu(m: int) -> float:
    """Scale ``nu = m (m!)^(-1/m)`` of the exponential-mixture CDF approximation."""
    _check_m(m)
    return m * math.factorial(m) ** (-1.0 / m)


def nakagami_cdf_approx(x, m: int):
    """Exponential-mixture approximation ``1 - sum_i C(m,i)(-1)^(i+1) exp(-nu i x)``."""
    nu = alzer_nu(m)
    x = _check_gain(x)
    # 1 - sum_i ... = (1 - exp(-nu x))^m by the binomial theorem
    out = (-np.expm1(-nu * x)) ** m
    return float(out) if out.ndim == 0 else out


def sample_channel_gain(m: int, rng: np.random.Generator, size=None):
    """Draw unit-mean Nakagami-m power gains, i.e. Gamma(m, 1/m)."""
    _check_m(m)
    return rng.gamma(m, 1.0 / m, size=size)


def eirp_density_to_power(eirp_density_dbw_mhz: float, mainlobe_gain: float, bandwidth_hz: float) -> float:
    """Transmit power (W) giving the stated EIRP density over the bandwidth."""
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth_hz must be positive")
    return 10.0 ** (eirp_density_dbw_mhz / 10.0) * (bandwidth_hz / 1e6) / mainlobe_gain


def omega_coefficient(tx_power_w: float, gain: float, params: ChannelParams) -> float:
    """Reciprocal of the received power at 1 km: ``16 pi^2 f_c^2 / (P_t G c^2)``."""
    return 16.0 * math.pi**2 * params.carrier_freq_hz**2 / (tx_power_w * gain * SPEED_OF_LIGHT_KM_S**2)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x) if np.ndim(x) else 10.0 * math.log10(x)
