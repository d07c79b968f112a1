import numpy as np
import pytest

from gcoh.core import GaussianState, rotation


def single_mode_symplectic(r, phi):
    return rotation(phi) @ np.diag([np.exp(-r), np.exp(r)])


def beam_splitter(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.block([[c * np.eye(2), s * np.eye(2)], [-s * np.eye(2), c * np.eye(2)]])


def random_symplectic(rng, n_modes, r_max=1.0):
    s = np.eye(2 * n_modes)
    for _ in range(2):
        for k in range(n_modes):
            blk = np.eye(2 * n_modes)
            blk[2 * k:2 * k + 2, 2 * k:2 * k + 2] = single_mode_symplectic(rng.uniform(0, r_max),
                                                                           rng.uniform(0, np.pi))
            s = blk @ s
        if n_modes == 2:
            s = beam_splitter(rng.uniform(0, np.pi)) @ s
    return s


def random_state(rng, n_modes=1, n_max=2.0, r_max=1.0, mean_scale=1.0, pure=False):
    nu = np.ones(n_modes) if pure else 1 + 2 * rng.uniform(0, n_max, n_modes)
    s = random_symplectic(rng, n_modes, r_max)
    cov = s @ np.diag(np.repeat(nu, 2)) @ s.T
    mean = rng.normal(0, mean_scale, 2 * n_modes)
    return GaussianState(mean=mean, cov=cov)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
