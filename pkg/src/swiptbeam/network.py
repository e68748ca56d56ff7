"""Problem datum and exact evaluation of the design metrics.

A NetworkInstance bundles channels, noise powers, conversion efficiencies,
SINR thresholds and the transmit power budget. The first ``n_eh`` users both
harvest and decode through a signal splitter (ratio alpha each); the
remaining users decode only (alpha pinned to 1 in the SINR).

Core computations run in normalized units: construct via
:meth:`NetworkInstance.from_physical` to divide all powers by the antenna
noise so it becomes 1 internally; ``scale`` converts harvested values back
to watts. Raw instances (scale=1) are equally valid for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NetworkInstance:
    """Immutable problem instance; all operations are pure."""

    h: np.ndarray            # (N, M) complex channel vectors
    n_eh: int                # number of EH-ID users (first n_eh rows of h)
    sigma_a_sq: float        # antenna noise power (1.0 when normalized)
    sigma_c_sq: float        # ID-circuitry noise power
    zeta: np.ndarray         # (n_eh,) energy-conversion efficiencies
    gamma_min: np.ndarray    # (N,) linear SINR thresholds
    power_budget: float
    scale: float = 1.0       # multiply internal powers by this to get watts

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "zeta", np.broadcast_to(
            np.asarray(self.zeta, dtype=float), (self.n_eh,)).copy())
        object.__setattr__(self, "gamma_min", np.broadcast_to(
            np.asarray(self.gamma_min, dtype=float), (h.shape[0],)).copy())
        if h.ndim != 2:
            raise ValueError("h must be an (N, M) array")
        if not 0 <= self.n_eh <= self.num_users:
            raise ValueError("n_eh out of range")
        if self.sigma_a_sq <= 0:
            raise ValueError("antenna noise power must be positive")
        if self.sigma_c_sq < 0:
            raise ValueError("circuit noise power must be nonnegative")
        if np.any(self.zeta <= 0) or np.any(self.zeta >= 1):
            raise ValueError("efficiencies must lie in (0, 1)")
        if np.any(self.gamma_min <= 0):
            raise ValueError("SINR thresholds must be positive")
        if self.power_budget <= 0:
            raise ValueError("power budget must be positive")

    @property
    def num_users(self) -> int:
        return self.h.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.h.shape[1]

    @property
    def num_id_only(self) -> int:
        return self.num_users - self.n_eh

    @classmethod
    def from_physical(cls, h, n_eh, sigma_a_sq, sigma_c_sq, zeta, gamma_min,
                      power_budget) -> "NetworkInstance":
        """Build a normalized instance from physical (watt-scale) data.

        Channel powers and both noise powers are divided by sigma_a_sq, so
        the antenna noise is 1 internally and SINRs are unchanged; harvested
        powers come out divided by sigma_a_sq, recorded in ``scale``.
        """
        h = np.asarray(h, dtype=complex)
        return cls(
            h=h / np.sqrt(sigma_a_sq),
            n_eh=n_eh,
            sigma_a_sq=1.0,
            sigma_c_sq=sigma_c_sq / sigma_a_sq,
            zeta=zeta,
            gamma_min=gamma_min,
            power_budget=power_budget,
            scale=float(sigma_a_sq),
        )

    # -- metrics ----------------------------------------------------------

    def received_powers(self, point: "DesignPoint") -> np.ndarray:
        """|h_n^H w_eta|^2 for all users n and streams eta; shape (N, N)."""
        return np.abs(self.h.conj() @ point.w.T) ** 2

    def sinr(self, point: "DesignPoint", n: int) -> float:
        """Decoder-input SINR of user n (splitter noise term for EH users)."""
        cross = self.received_powers(point)[n]
        signal = cross[n]
        interference = cross.sum() - signal
        if n < self.n_eh:
            alpha = point.alpha[n]
            if alpha == 0:
                raise ValueError("alpha must be nonzero for an EH-ID user")
            circuit = self.sigma_c_sq / alpha**2
        else:
            circuit = self.sigma_c_sq
        return float(signal / (interference + self.sigma_a_sq + circuit))

    def incident_power(self, point: "DesignPoint", n1: int) -> float:
        """Total RF power arriving at EH user n1 (before splitting)."""
        if not 0 <= n1 < self.n_eh:
            raise IndexError("not an EH-ID user")
        return float(self.received_powers(point)[n1].sum() + self.sigma_a_sq)

    def harvested_energy(self, point: "DesignPoint", n1: int) -> float:
        """zeta*(1-alpha^2) times the incident power at EH user n1."""
        alpha = point.alpha[n1]
        return float(self.zeta[n1] * (1.0 - alpha**2) * self.incident_power(point, n1))

    def sum_eh(self, point: "DesignPoint") -> float:
        return sum(self.harvested_energy(point, n1) for n1 in range(self.n_eh))

    def min_eh(self, point: "DesignPoint") -> float:
        return min(self.harvested_energy(point, n1) for n1 in range(self.n_eh))

    def constraint_residuals(self, point: "DesignPoint") -> "ResidualReport":
        """Slack of every design constraint; all >= -tol means feasible."""
        power = self.power_budget - float(np.sum(np.abs(point.w) ** 2))
        sinr = np.array([
            self.sinr(point, n) - self.gamma_min[n] for n in range(self.num_users)
        ])
        return ResidualReport(power=power, sinr=sinr)


@dataclass(frozen=True)
class DesignPoint:
    """Candidate solution: beamformers w, SS ratios alpha, auxiliaries t.

    t mirrors the solver's reciprocal bound t*alpha >= 1; code that only
    evaluates metrics may leave it at the default 1/alpha.
    """

    w: np.ndarray            # (N, M) complex beamforming vectors
    alpha: np.ndarray        # (n_eh,) in (0, 1)
    t: np.ndarray = field(default=None)  # (n_eh,), t*alpha >= 1

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        alpha = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "alpha", alpha)
        if self.t is None:
            with np.errstate(divide="ignore"):
                object.__setattr__(self, "t", np.where(alpha > 0, 1.0 / alpha, np.inf))
        else:
            object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        if np.any(alpha <= 0) or np.any(alpha >= 1):
            raise ValueError("SS ratios must lie strictly inside (0, 1)")
        if not np.all(np.isfinite(w.view(float))):
            raise ValueError("beamformers must be finite")

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.w) ** 2))


@dataclass(frozen=True)
class ResidualReport:
    power: float
    sinr: np.ndarray

    def worst(self) -> float:
        return float(min(self.power, self.sinr.min()))

    def feasible(self, tol: float) -> bool:
        return self.worst() >= -tol
