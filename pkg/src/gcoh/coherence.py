"""Relative-entropy coherence in the Fock basis (exact and Gaussian) and related correlations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import fock
from .core import (
    GaussianState,
    h,
    mean_photon_number,
    partial_trace,
    quantum_mutual_information,
    von_neumann_entropy,
)
from .errors import DimensionError, UnsupportedError
from .measurement import (
    GeneralDyneMeasurement,
    _as_list,
    _split,
    condition_on_outcome,
    outcome_distribution,
)

MEASURES = ("entropic", "gaussian")


@dataclass(frozen=True)
class CoherenceReport:
    c_s: float
    c_s_gauss: float
    cutoff: tuple[int, ...]
    tail_bound: float
    uncertainty: float
    mode_count: int


def gaussian_coherence(state: GaussianState) -> float:
    """``sum_i h(2 nbar_i + 1) - S(rho)``: relative entropy to the closest product-thermal state."""
    nbar = np.atleast_1d(mean_photon_number(state))
    return max(float(np.sum(h(2 * nbar + 1))) - von_neumann_entropy(state), 0.0)


def _entropic(state: GaussianState, target_tail: float, cutoffs=None):
    if state.n_modes == 1:
        cut = None if cutoffs is None else int(np.atleast_1d(cutoffs)[0])
        dist = fock.photon_number_distribution(state, target_tail, cutoff=cut)
    elif state.is_pure(1e-6) and np.max(np.abs(state.mean)) < 1e-12:
        dist = fock.joint_photon_number_distribution(
            state, cutoffs, target_tail=max(target_tail, 1e-10))
    else:
        raise UnsupportedError(
            "entropic coherence of mixed or displaced multimode states needs fock_oracle_density_matrix")
    value = fock.shannon_entropy(dist) - (von_neumann_entropy(state) if state.n_modes == 1 else 0.0)
    return max(value, 0.0), dist


def entropic_coherence(state: GaussianState, target_tail: float = 1e-12, cutoffs=None) -> float:
    """``H({p_n}) - S(rho)``.

    Single-mode states of any kind are supported; with two or more modes the state
    must be pure with zero mean, where ``S = 0`` and ``p`` is the joint distribution.
    """
    return _entropic(state, target_tail, cutoffs)[0]


def coherence_report(state: GaussianState, target_tail: float = 1e-12, cutoffs=None) -> CoherenceReport:
    c_s, dist = _entropic(state, target_tail, cutoffs)
    shape = tuple(np.shape(dist.probs))
    return CoherenceReport(c_s, gaussian_coherence(state), shape, dist.tail_bound,
                           fock.entropy_uncertainty(dist), state.n_modes)


def coherence(state: GaussianState, measure: str = "gaussian", **kwargs) -> float:
    if measure == "gaussian":
        return gaussian_coherence(state)
    if measure == "entropic":
        return entropic_coherence(state, **kwargs)
    raise ValueError(f"unknown coherence measure {measure!r}; expected one of {MEASURES}")


def correlated_coherence(state: GaussianState, measure: str = "gaussian", **kwargs) -> float:
    """``C(rho_AB) - C(rho_A) - C(rho_B)`` for a two-mode state."""
    if state.n_modes != 2:
        raise DimensionError("correlated coherence is defined here for two modes")
    total = coherence(state, measure, **kwargs)
    local = sum(coherence(partial_trace(state, [k]), measure) for k in (0, 1))
    return total - local


def pure_state_discord(state: GaussianState, tol: float = 1e-6) -> float:
    """Entanglement entropy of a pure two-mode state (equal to its discord)."""
    if state.n_modes != 2:
        raise DimensionError("pure-state discord needs two modes")
    if not state.is_pure(tol):
        raise UnsupportedError("discord is implemented only for pure states")
    return von_neumann_entropy(partial_trace(state, [0]))


def remote_coherence(state: GaussianState, m: GeneralDyneMeasurement, outcome=None,
                     measure: str = "gaussian", measured=1, **kwargs) -> float:
    """Coherence of the unmeasured modes conditioned on outcome ``outcome`` of ``m``."""
    cond = condition_on_outcome(state, measured, m, outcome)
    return coherence(cond, measure, **kwargs)


def _seed_chunks(n_samples: int, rng_seed, chunk: int):
    seq = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    n_chunks = -(-n_samples // chunk)
    for j, child in enumerate(seq.spawn(n_chunks)):
        yield min(chunk, n_samples - j * chunk), np.random.default_rng(child)


def average_remote_coherence(state: GaussianState, m: GeneralDyneMeasurement, measure: str = "gaussian",
                             n_samples: int = 10_000, rng_seed=0, measured=1, chunk: int = 4096,
                             **kwargs) -> tuple[float, float]:
    """Monte Carlo average of the remote coherence over the outcome distribution.

    Returns ``(mean, standard_error)``. Outcomes are drawn in fixed-size chunks, chunk
    ``j`` from the ``j``-th child of ``SeedSequence(rng_seed)``, so results do not
    depend on how chunks are distributed over workers.
    """
    if m.homodyne:
        raise UnsupportedError("average coherence needs a finite measurement (outcome density)")
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    modes, ms = _as_list(measured, m)
    cond0 = condition_on_outcome(state, modes, ms)
    _, sab, _, ra, rb = _split(state, modes)
    mu, cov = outcome_distribution(state, modes, ms)
    gain = sab @ np.linalg.inv(2 * cov)
    s_cond = von_neumann_entropy(cond0)
    tr_half = np.trace(cond0.cov) / 2
    values = []
    for size, rng in _seed_chunks(n_samples, rng_seed, chunk):
        outs = rng.multivariate_normal(mu, cov, size=size, method="cholesky")
        means = ra + (outs - rb) @ gain.T
        if measure == "gaussian" and cond0.n_modes == 1:
            vals = h(tr_half + np.sum(means ** 2, axis=1)) - s_cond
            values.append(np.maximum(vals, 0.0))
        else:
            values.append(np.array([
                coherence(GaussianState(mean=r, cov=cond0.cov, tol=state.tol), measure, **kwargs)
                for r in means]))
    vals = np.concatenate(values)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))


def optimal_homodyne_coherence(state: GaussianState, measure: str = "gaussian", measured=1,
                               n_grid: int = 13, **kwargs) -> tuple[float, float]:
    """Largest zero-outcome remote coherence over the homodyne angle.

    A coarse grid over ``phi in [0, pi)`` is refined by bounded scalar search
    around the best grid point. Returns ``(coherence, phi)``.
    """
    def value(phi):
        return remote_coherence(state, GeneralDyneMeasurement.homodyne_limit(phi), None, measure,
                                measured, **kwargs)

    grid = np.linspace(0.0, np.pi, n_grid, endpoint=False)
    vals = [value(p) for p in grid]
    k = int(np.argmax(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(lambda p: -value(p), bounds=(grid[k] - step, grid[k] + step),
                          method="bounded", options={"xatol": 1e-9})
    if -res.fun > vals[k]:
        return float(-res.fun), float(res.x % np.pi)
    return float(vals[k]), float(grid[k])
