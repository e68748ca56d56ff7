import numpy as np
import pytest

from swiptbeam.network import NetworkInstance


def random_instance(rng, num_antennas=4, num_users=3, n_eh=2, gamma_db=10.0,
                    power=2.0, channel_scale=30.0, sigma_c_sq=1.0):
    """Noise-normalized instance with Rayleigh-like channels.

    channel_scale plays the role of the per-entry amplitude after path-loss
    normalization; ~30 puts the SNR near the regime the solver sees in the
    experiment harness.
    """
    h = (rng.standard_normal((num_users, num_antennas))
         + 1j * rng.standard_normal((num_users, num_antennas))) / np.sqrt(2.0)
    return NetworkInstance(
        h=channel_scale * h,
        n_eh=n_eh,
        sigma_a_sq=1.0,
        sigma_c_sq=sigma_c_sq,
        zeta=0.5,
        gamma_min=10.0 ** (gamma_db / 10.0),
        power_budget=power,
    )


def random_point(rng, inst, power_fraction=0.9):
    w = (rng.standard_normal((inst.num_users, inst.num_antennas))
         + 1j * rng.standard_normal((inst.num_users, inst.num_antennas)))
    w *= np.sqrt(power_fraction * inst.power_budget / np.sum(np.abs(w) ** 2))
    alpha = rng.uniform(0.05, 0.95, size=inst.n_eh)
    from swiptbeam.network import DesignPoint
    return DesignPoint(w=w, alpha=alpha)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
