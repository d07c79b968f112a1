import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from gcoh.core import (
    GaussianState,
    direct_sum,
    h,
    is_physical,
    is_separable_ppt,
    mean_photon_number,
    partial_trace,
    quantum_mutual_information,
    single_mode_state,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_state,
    vacuum,
    von_neumann_entropy,
    williamson,
)
from gcoh.errors import DimensionError, PhysicalityError
from gcoh.states import InterlinkedParams, NormalFormParams, interlinked_three_mode, normal_form_state

# Entropy of the twin-beam (r=1) marginal evaluated from its Schmidt coefficients
# tanh^{2n}(1)/cosh^2(1), n < 200.
TWIN_BEAM_MARGINAL_ENTROPY = 1.619822092897702


def test_vacuum_convention():
    v = vacuum(2)
    np.testing.assert_array_equal(v.cov, np.eye(4))
    np.testing.assert_array_equal(v.mean, np.zeros(4))
    np.testing.assert_allclose(thermal_state(1.5).cov, 4 * np.eye(2))


def test_is_physical_examples():
    assert is_physical(np.eye(2))
    assert not is_physical(np.diag([0.5, 0.5]))
    assert is_physical(NormalFormParams.sts(2, math.sqrt(3)).cov())
    assert not is_physical(NormalFormParams.sts(2, math.sqrt(3) + 1e-6).cov())
    assert not is_physical(-np.eye(2))


def test_shape_errors():
    with pytest.raises(DimensionError):
        is_physical(np.eye(3))
    with pytest.raises(DimensionError):
        GaussianState(mean=np.zeros(3), cov=np.eye(2))
    with pytest.raises(PhysicalityError):
        GaussianState(mean=None, cov=np.diag([0.5, 0.5]))


def test_state_is_read_only():
    s = single_mode_state(1, 0.3)
    with pytest.raises(ValueError):
        s.cov[0, 0] = 5.0


def test_symplectic_eigenvalues_examples():
    assert symplectic_eigenvalues(2.5 * np.eye(2)).values == pytest.approx((2.5,))
    r = 0.7
    sq = np.diag([np.exp(2 * r), np.exp(-2 * r)])
    assert symplectic_eigenvalues(sq).values == pytest.approx((1.0,))
    twin = normal_form_state(NormalFormParams.sts(math.cosh(2), math.sinh(2)))
    np.testing.assert_allclose(symplectic_eigenvalues(twin.cov).as_array(), [1, 1], atol=1e-10)


def test_symplectic_eigenvalues_unphysical_raises():
    with pytest.raises(PhysicalityError):
        symplectic_eigenvalues(np.diag([0.5, 0.5]))


def test_h_values():
    assert h(1.0) == 0.0
    assert h(1 + 1e-14) == 0.0
    assert h(3.0) == pytest.approx(2 * math.log(2), rel=1e-14)
    np.testing.assert_allclose(h(np.array([1.0, 3.0])), [0, 2 * math.log(2)])


def test_h_monotone_concave():
    x = np.linspace(1, 100, 5001)
    y = h(x)
    assert np.all(np.diff(y) > 0)
    assert np.all(np.diff(y, 2) < 1e-12)


def test_entropy_examples():
    assert von_neumann_entropy(thermal_state(1.0)) == pytest.approx(1.386294361, abs=1e-9)
    assert von_neumann_entropy(single_mode_state(0, 1.2, 0.4, (1, 2))) == pytest.approx(0, abs=1e-12)
    twin = normal_form_state(NormalFormParams.sts(math.cosh(2), math.sinh(2)))
    marg = von_neumann_entropy(partial_trace(twin, [0]))
    assert marg == pytest.approx(TWIN_BEAM_MARGINAL_ENTROPY, abs=1e-12)


def test_partial_trace_examples():
    prod = direct_sum(thermal_state(0.5), thermal_state(2.0))
    np.testing.assert_allclose(partial_trace(prod, [1]).cov, 5 * np.eye(2))
    sts = normal_form_state(NormalFormParams.sts(3.0, 2.0))
    np.testing.assert_allclose(partial_trace(sts, [0]).cov, 3 * np.eye(2))
    tri = interlinked_three_mode(InterlinkedParams(1.0, 2.0))
    bc = partial_trace(tri, [1, 2])
    np.testing.assert_allclose(bc.cov, tri.cov[2:, 2:])
    with pytest.raises(IndexError):
        partial_trace(tri, [3])
    with pytest.raises(ValueError):
        partial_trace(tri, [1, 1])


def test_mean_photon_number_examples():
    assert mean_photon_number(vacuum()) == 0
    assert mean_photon_number(GaussianState(mean=[1.0, 1.0], cov=np.eye(2))) == pytest.approx(1.0)
    assert mean_photon_number(thermal_state(2.3)) == pytest.approx(2.3)
    np.testing.assert_allclose(mean_photon_number(thermal_state([1.0, 4.0])), [1.0, 4.0])


def test_ppt_examples():
    assert not is_separable_ppt(normal_form_state(NormalFormParams.sts(2, 1.5)))
    assert is_separable_ppt(normal_form_state(NormalFormParams.sts(2, 0.9)))
    assert is_separable_ppt(normal_form_state(NormalFormParams.mts(2, 0.9)))
    with pytest.raises(DimensionError):
        is_separable_ppt(thermal_state(1.0))


@pytest.mark.parametrize("a", [1.2, 2.0, 3.5, 5.0])
def test_ppt_matches_symmetric_threshold(a):
    sep = a - 1
    for c in np.linspace(0, math.sqrt(a * a - 1), 41):
        if abs(c - sep) < 1e-9:
            continue
        assert is_separable_ppt(normal_form_state(NormalFormParams.sts(a, c))) == (c < sep)


def test_mutual_information_twin_beam():
    twin = normal_form_state(NormalFormParams.sts(math.cosh(2), math.sinh(2)))
    assert quantum_mutual_information(twin) == pytest.approx(2 * TWIN_BEAM_MARGINAL_ENTROPY, abs=1e-11)
    assert quantum_mutual_information(direct_sum(thermal_state(1), thermal_state(2))) == pytest.approx(0, abs=1e-12)


def test_williamson_reconstructs(rng):
    for n in (1, 2):
        s = random_state(rng, n)
        nu, sym = williamson(s.cov)
        om = symplectic_form(n)
        np.testing.assert_allclose(sym @ np.diag(np.repeat(nu, 2)) @ sym.T, s.cov, atol=1e-9)
        np.testing.assert_allclose(sym @ om @ sym.T, om, atol=1e-9)
        np.testing.assert_allclose(np.sort(nu), symplectic_eigenvalues(s.cov).as_array(), rtol=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 3), pure=st.booleans())
def test_entropy_and_closure_properties(seed, n, pure):
    rng = np.random.default_rng(seed)
    s = random_state(rng, n, pure=pure)
    ent = von_neumann_entropy(s)
    nu = symplectic_eigenvalues(s.cov).as_array()
    assert ent >= 0
    assert (ent < 1e-10) == bool(np.all(np.abs(nu - 1) < 1e-8))
    if n > 1:
        assert is_physical(partial_trace(s, [0]).cov)
        assert is_physical(partial_trace(s, list(range(1, n))).cov)
