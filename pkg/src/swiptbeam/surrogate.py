"""Concave minorant of the split-energy product (1-alpha^2)*p(w).

The product of the harvesting fraction and the incident power is neither
concave nor convex. Writing each term as |z|^2/y with y = 1/(1-alpha^2) and
linearizing the perspective function |z|^2/y at the current iterate yields a
global concave lower bound that is tight at the iterate - the workhorse of
the path-following loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import NetworkInstance

ALPHA_MIN = 1e-3
ALPHA_MAX = 1.0 - 1e-3


def clamp_alpha(alpha: np.ndarray, lo: float = ALPHA_MIN, hi: float = ALPHA_MAX) -> np.ndarray:
    """Pull SS ratios off the open-interval boundary before re-expanding.

    Solvers can return boundary-grazing values; the expansion point must stay
    strictly inside (0, 1) for 1/(1-alpha^2) to be well behaved.
    """
    return np.clip(np.asarray(alpha, dtype=float), lo, hi)


def perspective_bound(z: complex, z_bar: complex, y: float, y_bar: float) -> float:
    """First-order lower bound on |z|^2/y from the expansion point (z_bar, y_bar).

    Returns 2*Re(conj(z_bar)*z)/y_bar - |z_bar|^2*y/y_bar^2, which never
    exceeds |z|^2/y and matches it (value and gradient) at the expansion
    point.
    """
    if y <= 0 or y_bar <= 0:
        raise ValueError("perspective bound requires positive y and y_bar")
    return float(2.0 * (np.conj(z_bar) * z).real / y_bar - abs(z_bar) ** 2 * y / y_bar**2)


@dataclass(frozen=True)
class ExpansionPoint:
    """Iterate around which the minorant is built, with cached inner products.

    a[n1, eta] = h_{n1}^H w_eta at the iterate and p_k[n1] the incident power
    there; cached once so each outer iteration reuses them O(N1*N) times.
    """

    w_k: np.ndarray       # (N, M) complex
    alpha_k: np.ndarray   # (n_eh,) strictly inside (0, 1)
    a: np.ndarray         # (n_eh, N) complex, h_{n1}^H w_eta
    p_k: np.ndarray       # (n_eh,) incident powers at the iterate

    def __post_init__(self):
        if np.any(self.alpha_k <= 0) or np.any(self.alpha_k >= 1):
            raise ValueError("expansion SS ratios must lie strictly inside (0, 1)")

    @classmethod
    def at(cls, inst: NetworkInstance, w: np.ndarray, alpha: np.ndarray) -> "ExpansionPoint":
        w = np.asarray(w, dtype=complex)
        alpha = np.asarray(alpha, dtype=float)
        a = inst.h[: inst.n_eh].conj() @ w.T              # (n_eh, N)
        p_k = np.sum(np.abs(a) ** 2, axis=1) + inst.sigma_a_sq
        return cls(w_k=w.copy(), alpha_k=alpha.copy(), a=a, p_k=p_k)


def minorant_value(exp: ExpansionPoint, inst: NetworkInstance, w: np.ndarray,
                   alpha: float, n1: int) -> float:
    """Evaluate the concave lower bound on (1-alpha^2)*p(w) for EH user n1."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    c = 1.0 - exp.alpha_k[n1] ** 2
    z = inst.h[n1].conj() @ np.asarray(w, dtype=complex).T  # h_{n1}^H w_eta, (N,)
    affine = 2.0 * c * (float((exp.a[n1].conj() * z).real.sum()) + inst.sigma_a_sq)
    return affine - exp.p_k[n1] * c**2 / (1.0 - alpha**2)


@dataclass(frozen=True)
class MinorantCoefficients:
    """Minorant split for the conic builder.

    minorant = sum_eta Re(w_forms[eta]^H w_eta) + constant
               - inverse_weight / (1 - alpha^2)
    with inverse_weight >= 0, so the nonconvex tail enters the program
    through an epigraph variable bounding 1/(1-alpha^2).
    """

    w_forms: np.ndarray    # (N, M) complex: linear form over each beamformer
    constant: float
    inverse_weight: float


def minorant_coefficients(exp: ExpansionPoint, inst: NetworkInstance,
                          n1: int) -> MinorantCoefficients:
    c = 1.0 - exp.alpha_k[n1] ** 2
    # Re{conj(a_eta) h^H w} = Re{(a_eta h)^H w}
    forms = 2.0 * c * exp.a[n1][:, None] * inst.h[n1][None, :]
    return MinorantCoefficients(
        w_forms=forms,
        constant=2.0 * c * inst.sigma_a_sq,
        inverse_weight=exp.p_k[n1] * c**2,
    )
