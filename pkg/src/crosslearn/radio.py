"""Propagation, SINR and rate models for the licensed and unlicensed bands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MACRO_TO_UE = "macro_to_ue"
SCBS_TO_UE = "scbs_to_ue"

PATHLOSS_FLOOR_DB = 38.0
SINR_CAP_DB = 30.0
NOISE_DENSITY_DBM_HZ = -174.0
WIFI_EMAX = 0.8
WIFI_GAMMA = 0.05

# (intercept dB at 1 km, slope dB/decade)
_PATHLOSS = {
    MACRO_TO_UE: (128.1, 37.6),
    SCBS_TO_UE: (140.7, 36.7),
}


def pathloss(link: str, distance):
    """Outdoor picocell model-1 pathloss in dB for ``distance`` in metres.

    Works elementwise on arrays. Clamped below at 38 dB.
    """
    try:
        a, b = _PATHLOSS[link]
    except KeyError:
        raise ValueError(f"unknown link type {link!r}") from None
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be positive")
    pl = np.maximum(a + b * np.log10(d / 1000.0), PATHLOSS_FLOOR_DB)
    return float(pl) if pl.ndim == 0 else pl


def sector_antenna_gain(offset_deg):
    """Horizontal 3-sector pattern: -min(12 (phi/70)^2, 20) dB."""
    phi = (np.asarray(offset_deg, dtype=float) + 180.0) % 360.0 - 180.0
    return -np.minimum(12.0 * (phi / 70.0) ** 2, 20.0)


def noise_power(bandwidth, density_dbm_hz=NOISE_DENSITY_DBM_HZ, noise_figure_db=0.0):
    """Thermal noise in mW over ``bandwidth`` Hz."""
    return 10.0 ** ((density_dbm_hz + noise_figure_db + 10.0 * np.log10(bandwidth)) / 10.0)


def sinr(signal, interferers, noise):
    """Received signal over summed co-channel interference plus noise (all mW)."""
    interference = float(np.sum(interferers)) if np.size(interferers) else 0.0
    return signal / (interference + noise)


def licensed_rate(sinr_linear, bandwidth, sinr_cap_db=SINR_CAP_DB):
    """Shannon rate with the SINR clipped at ``sinr_cap_db``; bits/s."""
    s = np.asarray(sinr_linear, dtype=float)
    if np.any(s < 0):
        raise ValueError("sinr must be non-negative")
    cap = 10.0 ** (sinr_cap_db / 10.0)
    rate = bandwidth * np.log2(1.0 + np.minimum(s, cap))
    return float(rate) if rate.ndim == 0 else rate


def wifi_efficiency(contenders, e_max=WIFI_EMAX, gamma=WIFI_GAMMA):
    n = np.asarray(contenders, dtype=float)
    return e_max / (1.0 + gamma * (n - 1.0))


def wifi_share(contenders, capacity, e_max=WIFI_EMAX, gamma=WIFI_GAMMA):
    """Per-station throughput when ``contenders`` stations share one channel.

    Collision losses grow with the number of contenders, so the aggregate
    ``n * wifi_share(n)`` falls below the ideal ``e_max * capacity``.
    """
    n = np.asarray(contenders, dtype=float)
    if np.any(n < 0):
        raise ValueError("contenders must be >= 0")
    safe = np.maximum(n, 1.0)
    share = np.where(n > 0, wifi_efficiency(safe, e_max, gamma) * capacity / safe, 0.0)
    return float(share) if share.ndim == 0 else share


def rsrp(tx_power_dbm, pathloss_db, antenna_gain_db=0.0):
    """Reference signal received power in dBm (no interference term)."""
    return tx_power_dbm + antenna_gain_db - pathloss_db


@dataclass(frozen=True)
class LinkBudget:
    pathloss: float  # dB
    rx_power: float  # dBm; -inf when the station is silent
    interference: float  # mW
    noise: float  # mW
    sinr: float
    rate: float  # bits/s


def link_budget(link, distance, tx_power_dbm, interferers_mw, bandwidth,
                antenna_gain_db=0.0, noise_figure_db=0.0, sinr_cap_db=SINR_CAP_DB):
    pl = pathloss(link, distance)
    noise = float(noise_power(bandwidth, noise_figure_db=noise_figure_db))
    interference = float(np.sum(interferers_mw)) if np.size(interferers_mw) else 0.0
    if tx_power_dbm == -np.inf:
        return LinkBudget(pl, -np.inf, interference, noise, 0.0, 0.0)
    rx_dbm = tx_power_dbm + antenna_gain_db - pl
    s = 10.0 ** (rx_dbm / 10.0) / (interference + noise)
    return LinkBudget(pl, rx_dbm, interference, noise, s,
                      licensed_rate(s, bandwidth, sinr_cap_db))


@dataclass
class WifiCell:
    """Contention state of one SCBS's unlicensed subband."""

    contenders: int = 0
    capacity: float = 0.0  # bits/s at the station's link quality
    e_max: float = WIFI_EMAX
    gamma: float = WIFI_GAMMA

    @property
    def efficiency(self) -> float:
        if self.contenders == 0:
            return self.e_max
        return float(wifi_efficiency(self.contenders, self.e_max, self.gamma))

    @property
    def per_station_share(self) -> float:
        return wifi_share(self.contenders, self.capacity, self.e_max, self.gamma)
