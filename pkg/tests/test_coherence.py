import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from gcoh.coherence import (
    average_remote_coherence,
    coherence,
    coherence_report,
    correlated_coherence,
    entropic_coherence,
    gaussian_coherence,
    optimal_homodyne_coherence,
    pure_state_discord,
    remote_coherence,
)
from gcoh.core import (
    GaussianState,
    direct_sum,
    h,
    partial_trace,
    quantum_mutual_information,
    single_mode_state,
    thermal_state,
    von_neumann_entropy,
)
from gcoh.errors import DimensionError, UnsupportedError
from gcoh.fock import fock_oracle_density_matrix
from gcoh.measurement import GeneralDyneMeasurement, MeasurementOutcome
from gcoh.states import NormalFormParams, normal_form_state, sts_from_physical_params

HET = GeneralDyneMeasurement.heterodyne()
HOM = GeneralDyneMeasurement.homodyne_limit()
H_COSH2 = 1.6198220928977025


def _relative_entropy_to_thermal_oracle(state, cutoff):
    # S(rho || nu) with nu the thermal state of equal mean photon number, from a truncated density matrix.
    rho = fock_oracle_density_matrix(state, cutoff)
    evals = np.clip(np.linalg.eigvalsh(rho), 1e-300, None)
    s_rho = -np.sum(evals * np.log(evals))
    p = np.real(np.diag(rho))
    k = np.arange(cutoff)
    nbar = np.sum(k * p)
    log_nu = k * np.log(nbar / (nbar + 1)) - np.log(nbar + 1)
    return -s_rho - np.sum(p * log_nu)


def test_gaussian_coherence_examples():
    assert gaussian_coherence(thermal_state(2.0)) == pytest.approx(0, abs=1e-12)
    assert gaussian_coherence(thermal_state([1.0, 3.0])) == pytest.approx(0, abs=1e-12)
    assert gaussian_coherence(single_mode_state(0, 1.0)) == pytest.approx(H_COSH2, abs=1e-12)
    disp = GaussianState(mean=[1.0, 1.0], cov=np.eye(2))
    assert gaussian_coherence(disp) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_gaussian_coherence_against_oracle():
    sq = single_mode_state(0, 1.0)
    assert gaussian_coherence(sq) == pytest.approx(_relative_entropy_to_thermal_oracle(sq, 200), abs=1e-9)
    mixed = GaussianState(mean=[0.6, -0.2], cov=single_mode_state(0.4, 0.3, 0.5).cov)
    assert gaussian_coherence(mixed) == pytest.approx(_relative_entropy_to_thermal_oracle(mixed, 120), abs=1e-7)


def test_entropic_coherence_examples():
    for n in (0.5, 2.0, 5.0):
        assert entropic_coherence(thermal_state(n)) == pytest.approx(0, abs=1e-8)
    st_ = normal_form_state(sts_from_physical_params(1.0, 1.0))
    cond_het = remote_coherence(st_, HET, measure="entropic")
    assert cond_het == pytest.approx(0, abs=1e-8)
    sq = single_mode_state(0, 1.0)
    assert entropic_coherence(sq) == pytest.approx(1.1261467230521833, abs=1e-9)
    assert entropic_coherence(sq) <= gaussian_coherence(sq)


def test_dispatch_and_errors():
    sq = single_mode_state(0, 0.5)
    assert coherence(sq, "gaussian") == gaussian_coherence(sq)
    assert coherence(sq, "entropic") == entropic_coherence(sq)
    with pytest.raises(ValueError):
        coherence(sq, "l1")
    with pytest.raises(UnsupportedError):
        entropic_coherence(normal_form_state(NormalFormParams.sts(2, 1)))
    with pytest.raises(DimensionError):
        correlated_coherence(sq)


def test_report_fields():
    rep = coherence_report(single_mode_state(1.0, 0.4))
    assert rep.mode_count == 1
    assert rep.c_s <= rep.c_s_gauss
    assert rep.tail_bound <= 1e-12
    assert rep.uncertainty >= 0
    assert rep.cutoff[0] >= 20


def test_correlated_coherence_examples():
    prod = direct_sum(single_mode_state(0, 0.4), single_mode_state(0, 0.7, 1.0))
    assert correlated_coherence(prod, "gaussian") == pytest.approx(0, abs=1e-10)
    assert correlated_coherence(prod, "entropic") == pytest.approx(0, abs=1e-8)
    twin = normal_form_state(sts_from_physical_params(0, 1.0))
    dg = correlated_coherence(twin, "gaussian")
    assert dg == pytest.approx(2 * H_COSH2, abs=1e-10)
    ds = correlated_coherence(twin, "entropic")
    disc = pure_state_discord(twin)
    assert disc - 1e-8 <= ds <= dg + 1e-10


def test_gaussian_correlated_coherence_is_mutual_information(rng):
    for _ in range(30):
        s = random_state(rng, 2)
        assert correlated_coherence(s, "gaussian") == pytest.approx(quantum_mutual_information(s), abs=1e-12)
    sts = normal_form_state(sts_from_physical_params(1.0, 1.0))
    assert quantum_mutual_information(sts) > 0


def test_discord_examples():
    prod = direct_sum(single_mode_state(0, 0.4), single_mode_state(0, 0.2))
    assert pure_state_discord(prod) == pytest.approx(0, abs=1e-10)
    for r in (0.3, 1.0):
        twin = normal_form_state(sts_from_physical_params(0, r))
        assert pure_state_discord(twin) == pytest.approx(h(math.cosh(2 * r)), abs=1e-10)
    with pytest.raises(UnsupportedError):
        pure_state_discord(normal_form_state(NormalFormParams.sts(2, 1)))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_bound_chain_pure_two_mode(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, 2, pure=True, r_max=0.6, mean_scale=0.0)
    rep = coherence_report(s)
    tol = rep.uncertainty + 1e-8
    disc = pure_state_discord(s)
    ds = correlated_coherence(s, "entropic")
    dg = correlated_coherence(s, "gaussian")
    assert disc <= ds + tol
    assert ds <= dg + tol
    assert dg == pytest.approx(quantum_mutual_information(s), abs=1e-12)
    assert dg <= rep.c_s_gauss + 1e-10


def test_remote_coherence_heterodyne_zero():
    for n, r in ((0.0, 0.5), (1.0, 1.0), (3.0, 0.2)):
        st_ = normal_form_state(sts_from_physical_params(n, r))
        assert remote_coherence(st_, HET) == pytest.approx(0, abs=1e-10)
        assert remote_coherence(st_, HET, measure="entropic") == pytest.approx(0, abs=1e-8)


def test_remote_coherence_homodyne_monotone():
    st_ = normal_form_state(sts_from_physical_params(1.0, 1.0))
    for measure in ("gaussian", "entropic"):
        vals = [remote_coherence(st_, GeneralDyneMeasurement.from_squeezing(rm), measure=measure)
                for rm in np.arange(0, 3.01, 0.5)]
        vals.append(remote_coherence(st_, HOM, measure=measure))
        assert np.all(np.diff(vals) >= -1e-10)


def test_remote_coherence_theta_maximum():
    st_ = normal_form_state(sts_from_physical_params(1.0, 1.0))
    m = GeneralDyneMeasurement.from_squeezing(1.0)
    thetas = np.linspace(0, np.pi, 181)
    vals = [remote_coherence(st_, m, MeasurementOutcome.polar(1.0, t)) for t in thetas]
    assert thetas[int(np.argmax(vals))] == pytest.approx(np.pi / 2, abs=1e-12)


def test_sign_insensitivity(rng):
    for _ in range(10):
        a = rng.uniform(1.1, 4)
        c = rng.uniform(0, math.sqrt(a * a - 1))
        plus = normal_form_state(NormalFormParams.sts(a, c))
        minus = normal_form_state(NormalFormParams.sts(a, -c))
        m = GeneralDyneMeasurement(rng.uniform(1, 20), rng.uniform(0, np.pi))
        assert remote_coherence(plus, m) == pytest.approx(remote_coherence(minus, m), abs=1e-12)


def test_heterodyne_family_vanishes_iff_thermal():
    st_ = normal_form_state(sts_from_physical_params(1.0, 1.0))
    zero = remote_coherence(st_, HET)
    shifted = remote_coherence(st_, HET, MeasurementOutcome((0.5, 0.0)))
    assert zero == pytest.approx(0, abs=1e-12)
    assert shifted > 1e-3
    assert remote_coherence(st_, HET, MeasurementOutcome((0.5, 0.0)), "entropic") > 1e-3


def test_optimal_homodyne_angle():
    p = NormalFormParams(2.0, 3.0, 1.5, -0.7)
    st_ = normal_form_state(p)
    best, phi = optimal_homodyne_coherence(st_)
    grid = [remote_coherence(st_, GeneralDyneMeasurement.homodyne_limit(t)) for t in np.linspace(0, np.pi, 361)]
    assert best >= max(grid) - 1e-12
    assert phi == pytest.approx(np.pi / 2, abs=1e-6)


def test_average_product_state_zero():
    prod = direct_sum(thermal_state(1.0), thermal_state(2.0))
    mean, se = average_remote_coherence(prod, HET, n_samples=2000, rng_seed=3)
    assert mean == pytest.approx(0, abs=1e-12)
    assert se == pytest.approx(0, abs=1e-12)


def test_average_coherence_orderings():
    st_ = normal_form_state(sts_from_physical_params(1.0, 1.0))
    het = average_remote_coherence(st_, HET, n_samples=20_000, rng_seed=11)
    sq = average_remote_coherence(st_, GeneralDyneMeasurement.from_squeezing(2.0), n_samples=20_000, rng_seed=12)
    assert het[0] - sq[0] > 3 * math.hypot(het[1], sq[1])
    lo = average_remote_coherence(normal_form_state(sts_from_physical_params(0.1, 1.0)), HET,
                                  n_samples=20_000, rng_seed=13)
    hi = average_remote_coherence(normal_form_state(sts_from_physical_params(5.0, 1.0)), HET,
                                  n_samples=20_000, rng_seed=14)
    assert hi[0] - lo[0] > 3 * math.hypot(hi[1], lo[1])


def test_average_reproducible_and_chunk_independent():
    st_ = normal_form_state(sts_from_physical_params(1.0, 0.5))
    m = GeneralDyneMeasurement.from_squeezing(0.5)
    a = average_remote_coherence(st_, m, n_samples=5000, rng_seed=9)
    b = average_remote_coherence(st_, m, n_samples=5000, rng_seed=9)
    assert a == b
    with pytest.raises(ValueError):
        average_remote_coherence(st_, m, n_samples=10)


def test_average_vectorised_matches_generic_path():
    st_ = normal_form_state(sts_from_physical_params(1.0, 0.5))
    m = GeneralDyneMeasurement.from_squeezing(0.5)
    fast = average_remote_coherence(st_, m, n_samples=1000, rng_seed=4, chunk=1000)[0]
    # The generic per-outcome path, driven by the same outcomes.
    rng = np.random.default_rng(np.random.SeedSequence(4).spawn(1)[0])
    from gcoh.measurement import outcome_distribution

    mu, cov = outcome_distribution(st_, 1, m)
    outs = rng.multivariate_normal(mu, cov, size=1000, method="cholesky")
    slow = np.mean([remote_coherence(st_, m, o) for o in outs])
    assert fast == pytest.approx(slow, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_entropic_below_gaussian_single_mode(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, 1, n_max=2.0, r_max=0.8, mean_scale=1.0)
    rep = coherence_report(s)
    assert rep.c_s <= rep.c_s_gauss + rep.uncertainty + 1e-10


def test_marginal_entropy_consistency():
    st_ = normal_form_state(sts_from_physical_params(0.0, 0.8))
    assert pure_state_discord(st_) == pytest.approx(von_neumann_entropy(partial_trace(st_, [1])), abs=1e-12)
