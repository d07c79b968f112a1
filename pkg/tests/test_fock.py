import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from gcoh.core import GaussianState, h, rotation, single_mode_state, thermal_state, vacuum
from gcoh.errors import TruncationError, UnsupportedError
from gcoh.fock import (
    density_matrix,
    entropy_uncertainty,
    fock_amplitudes,
    fock_moments,
    fock_oracle_density_matrix,
    joint_photon_number_distribution,
    photon_number_distribution,
    shannon_entropy,
)
from gcoh.measurement import GeneralDyneMeasurement, condition_on_outcome
from gcoh.states import InterlinkedParams, NormalFormParams, interlinked_three_mode, normal_form_state

# Squeezed vacuum r=1: photon-number entropy from the truncated-operator oracle at cutoff 200.
SQUEEZED_ENTROPY_R1 = 1.1261467230521833


def test_thermal_geometric_exact():
    for n in (0.3, 1.0, 4.0):
        p = photon_number_distribution(thermal_state(n)).probs
        k = np.arange(p.size)
        np.testing.assert_allclose(p, n ** k / (n + 1) ** (k + 1), rtol=0, atol=1e-12)
    p = photon_number_distribution(thermal_state(1.0)).probs
    assert p[:3] == pytest.approx([0.5, 0.25, 0.125], abs=1e-15)


def test_squeezed_vacuum_distribution():
    d = photon_number_distribution(single_mode_state(0, 1.0))
    assert d.probs[0] == pytest.approx(1 / math.cosh(1.0), abs=1e-14)
    assert np.max(np.abs(d.probs[1::2])) < 1e-15
    oracle = np.real(np.diag(fock_oracle_density_matrix(single_mode_state(0, 1.0), 200)))
    np.testing.assert_allclose(d.probs[:200], oracle[:d.probs.size], atol=1e-12)
    assert shannon_entropy(d) == pytest.approx(SQUEEZED_ENTROPY_R1, abs=1e-9)


def test_vacuum_distribution():
    p = photon_number_distribution(vacuum()).probs
    assert p[0] == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(p[1:])) < 1e-15


def test_adaptive_cutoff_reaches_target():
    d = photon_number_distribution(single_mode_state(6.0, 0.8))
    assert d.tail_bound <= 1e-12
    assert d.cutoff >= math.ceil(10 * (1 + 6.0))
    fixed = photon_number_distribution(single_mode_state(6.0, 0.8), cutoff=20)
    assert fixed.tail_bound > 1e-3
    with pytest.raises(TruncationError):
        photon_number_distribution(single_mode_state(6.0, 0.8), max_cutoff=80)
    with pytest.raises(UnsupportedError):
        photon_number_distribution(vacuum(2))


def test_shannon_examples():
    assert shannon_entropy(np.full(4, 0.25)) == pytest.approx(math.log(4))
    assert shannon_entropy(np.array([1.0, 0, 0])) == 0.0
    for n in (1.0, 2.5):
        assert shannon_entropy(photon_number_distribution(thermal_state(n))) == pytest.approx(h(2 * n + 1),
                                                                                              abs=1e-10)
    assert shannon_entropy(photon_number_distribution(thermal_state(1.0))) == pytest.approx(2 * math.log(2))


def test_entropy_uncertainty():
    d = photon_number_distribution(single_mode_state(1.0, 0.5), cutoff=15)
    t, k = d.tail_bound, 15
    assert entropy_uncertainty(d) == pytest.approx(-t * math.log(t) + t * (k + math.log(k)))
    assert entropy_uncertainty(photon_number_distribution(vacuum())) == 0.0


def test_oracle_thermal():
    rho = fock_oracle_density_matrix(thermal_state(1.0), 60)
    k = np.arange(60)
    np.testing.assert_allclose(np.real(np.diag(rho)), 0.5 ** (k + 1), atol=1e-12)
    assert np.max(np.abs(rho - np.diag(np.diag(rho)))) < 1e-12


def test_oracle_squeezed_matches_recursion():
    sq = single_mode_state(0, 1.0)
    rho = fock_oracle_density_matrix(sq, 100)
    p = photon_number_distribution(sq, cutoff=100).probs
    np.testing.assert_allclose(np.real(np.diag(rho)), p, atol=1e-8)


def test_oracle_moments_match_input():
    s = GaussianState(mean=[0.8, -0.5], cov=single_mode_state(0.5, 0.4, 0.7).cov)
    rho = fock_oracle_density_matrix(s, 90)
    mean, cov = fock_moments(rho, 1)
    np.testing.assert_allclose(mean, s.mean, atol=1e-6)
    np.testing.assert_allclose(cov, s.cov, atol=1e-6)


def test_oracle_rejects_small_cutoff():
    with pytest.raises(TruncationError):
        fock_oracle_density_matrix(thermal_state(3.0), 20)


def test_density_matrix_matches_oracle_displaced(rng):
    for _ in range(3):
        s = random_state(rng, 1, n_max=1.0, r_max=0.6, mean_scale=0.8)
        cut = int(math.ceil(10 * (1 + float(np.trace(s.cov) / 4 + s.mean @ s.mean / 2))))
        oracle = fock_oracle_density_matrix(s, 2 * cut)[:cut, :cut]
        np.testing.assert_allclose(density_matrix(s, cut), oracle, atol=1e-8)


def test_rotation_covariance_of_photon_statistics(rng):
    for _ in range(10):
        s = random_state(rng, 1, mean_scale=0.0)
        rot = rotation(rng.uniform(0, 2 * np.pi))
        s_rot = GaussianState(mean=None, cov=rot @ s.cov @ rot.T)
        p1 = photon_number_distribution(s, cutoff=150).probs
        p2 = photon_number_distribution(s_rot, cutoff=150).probs
        np.testing.assert_allclose(p1, p2, atol=1e-9)


def test_joint_examples():
    assert joint_photon_number_distribution(vacuum(2)).probs[0, 0] == pytest.approx(1.0)
    r = 1.0
    twin = normal_form_state(NormalFormParams.sts(math.cosh(2 * r), math.sinh(2 * r)))
    d = joint_photon_number_distribution(twin)
    assert d.probs[0, 0] == pytest.approx(1 / math.cosh(r) ** 2, abs=1e-14)
    k = min(d.probs.shape)
    diag = np.tanh(r) ** (2 * np.arange(k)) / math.cosh(r) ** 2
    np.testing.assert_allclose(np.diag(d.probs), diag, atol=1e-12)
    off = d.probs[:k, :k] - np.diag(np.diag(d.probs[:k, :k]))
    assert np.max(np.abs(off)) < 1e-14


def test_joint_requires_pure_zero_mean():
    with pytest.raises(UnsupportedError):
        joint_photon_number_distribution(normal_form_state(NormalFormParams.sts(2, 1)))
    shifted = GaussianState(mean=[0.1, 0, 0, 0], cov=np.eye(4))
    with pytest.raises(UnsupportedError):
        joint_photon_number_distribution(shifted)


def test_joint_interlinked_conditional_matches_oracle():
    tri = interlinked_three_mode(InterlinkedParams(1.0, 2.0))
    cond = condition_on_outcome(tri, 0, GeneralDyneMeasurement.homodyne_limit())
    d = joint_photon_number_distribution(cond, cutoffs=(40, 40))
    oracle = np.real(np.diag(fock_oracle_density_matrix(cond, 40))).reshape(40, 40)
    np.testing.assert_allclose(d.probs, oracle, atol=1e-7)


def test_interlinked_support_on_photon_conservation():
    tri = interlinked_three_mode(InterlinkedParams(0.3, 0.5))
    amps = fock_amplitudes(tri, (14, 10, 10))
    na, nb, nc = np.meshgrid(*(np.arange(k) for k in (14, 10, 10)), indexing="ij")
    assert np.max(np.abs(amps[na != nb + nc])) < 1e-14
    assert np.sum(np.abs(amps) ** 2) > 1 - 1e-4


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_recursion_matches_oracle_random(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, 1, n_max=1.0, r_max=0.5, mean_scale=0.7)
    nbar = float(np.trace(s.cov) / 4 + s.mean @ s.mean / 2 - 0.5)
    cut = int(math.ceil(20 * (1 + nbar)))
    p = photon_number_distribution(s, cutoff=cut).probs
    oracle = np.real(np.diag(fock_oracle_density_matrix(s, cut)))
    np.testing.assert_allclose(p, oracle, atol=1e-7)
