"""Seeded Rician fading channel generation with log-distance path loss.

Channels are amplitude gains in linear scale: large-scale loss (free-space
reference at ``ref_distance_m`` plus log-distance decay, minus the transmit
antenna gain) applied on top of a unit-average-power Rician fading vector.
Every draw is a pure function of (config, realization index), so ensembles
are reproducible regardless of execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ChannelConfig:
    """Static parameters of the downlink channel generator.

    distances_m holds one BS-to-UE distance per user; its length fixes the
    number of users drawn per realization.
    """

    carrier_freq_hz: float
    antenna_gain_db: float
    ref_distance_m: float
    pathloss_exponent: float
    rician_k_db: float
    num_antennas: int
    distances_m: tuple[float, ...]
    seed: int

    def __post_init__(self):
        if self.ref_distance_m <= 0:
            raise ValueError("ref_distance_m must be positive")
        if self.pathloss_exponent <= 0:
            raise ValueError("pathloss_exponent must be positive")
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if self.carrier_freq_hz <= 0:
            raise ValueError("carrier_freq_hz must be positive")
        if len(self.distances_m) == 0:
            raise ValueError("need at least one UE distance")
        for d in self.distances_m:
            if d < self.ref_distance_m:
                raise ValueError(
                    f"distance {d} m below reference distance {self.ref_distance_m} m"
                )

    @property
    def num_users(self) -> int:
        return len(self.distances_m)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the downlink: h[n] is the complex M-vector of UE n."""

    h: np.ndarray  # (N, M) complex, includes path loss and antenna gain

    def __post_init__(self):
        if not np.all(np.isfinite(self.h.view(float))):
            raise ValueError("channel entries must be finite")


def pathloss_db(cfg: ChannelConfig, d: float) -> float:
    """Total link loss in dB at distance d (antenna gain already credited).

    Free-space loss at the reference distance, minus the transmit antenna
    gain, plus 10*exponent*log10(d/d0) beyond it.
    """
    if d < cfg.ref_distance_m:
        raise ValueError(f"d={d} m is below the reference distance {cfg.ref_distance_m} m")
    wavelength = SPEED_OF_LIGHT / cfg.carrier_freq_hz
    fs_ref_db = 20.0 * np.log10(4.0 * np.pi * cfg.ref_distance_m / wavelength)
    return float(
        fs_ref_db
        - cfg.antenna_gain_db
        + 10.0 * cfg.pathloss_exponent * np.log10(d / cfg.ref_distance_m)
    )


def pathgain_linear(cfg: ChannelConfig, d: float) -> float:
    """Linear power gain of the link (10^(-PL/10))."""
    return float(10.0 ** (-pathloss_db(cfg, d) / 10.0))


def _ue_angle(cfg: ChannelConfig, ue_index: int) -> float:
    """Per-UE angular placement, drawn once from the seed (not per realization)."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0, ue_index)))
    return float(rng.uniform(-np.pi / 2.0, np.pi / 2.0))


def _los_steering(cfg: ChannelConfig, ue_index: int) -> np.ndarray:
    # Half-wavelength ULA steering vector; unit-modulus entries so its
    # squared norm is exactly M.
    m = np.arange(cfg.num_antennas)
    theta = _ue_angle(cfg, ue_index)
    return np.exp(1j * np.pi * m * np.sin(theta))


def draw_channel(cfg: ChannelConfig, realization_index: int) -> ChannelRealization:
    """Draw one channel realization; identical for identical (cfg, index).

    Small-scale fading mixes a deterministic ULA line-of-sight component and
    an i.i.d. CN(0,1) scattered component with Rician weights
    sqrt(K/(K+1)) and sqrt(1/(K+1)); unit average power per entry.
    """
    k_lin = 10.0 ** (cfg.rician_k_db / 10.0)
    w_los = np.sqrt(k_lin / (k_lin + 1.0))
    w_nlos = np.sqrt(1.0 / (k_lin + 1.0))

    rows = []
    for n, d in enumerate(cfg.distances_m):
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.seed, spawn_key=(1, realization_index, n))
        )
        nlos = (
            rng.standard_normal(cfg.num_antennas)
            + 1j * rng.standard_normal(cfg.num_antennas)
        ) / np.sqrt(2.0)
        fading = w_los * _los_steering(cfg, n) + w_nlos * nlos
        rows.append(np.sqrt(pathgain_linear(cfg, d)) * fading)
    return ChannelRealization(h=np.array(rows))
