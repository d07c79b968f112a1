"""Gaussian (general-dyne) measurements and conditional states.

A pure single-mode measurement is labelled by ``sigma_m = R(phi) diag(s, 1/s) R(phi)^T``
with ``s >= 1``; ``s = 1`` is heterodyne. The homodyne flag is the exact ``s -> inf``
limit, which measures the quadrature along ``R(phi) (0, 1)^T`` (``p`` for ``phi = 0``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import GaussianState, _mode_indices, rotation
from .errors import DimensionError, LimitError


@dataclass(frozen=True)
class GeneralDyneMeasurement:
    s: float = 1.0
    phi: float = 0.0
    homodyne: bool = False

    def __post_init__(self):
        if not self.homodyne:
            if not np.isfinite(self.s) or self.s < 1.0:
                raise ValueError(f"squeezing parameter s must satisfy 1 <= s < inf, got {self.s}")

    @classmethod
    def heterodyne(cls) -> "GeneralDyneMeasurement":
        return cls(1.0, 0.0)

    @classmethod
    def from_squeezing(cls, r_m: float, phi: float = 0.0) -> "GeneralDyneMeasurement":
        """Measurement with ``s = exp(2 r_m)``."""
        if r_m < 0:
            raise ValueError("measurement squeezing r_m must be non-negative")
        return cls(float(np.exp(2 * r_m)), phi)

    @classmethod
    def homodyne_limit(cls, phi: float = 0.0) -> "GeneralDyneMeasurement":
        return cls(np.inf, phi, homodyne=True)

    @property
    def r_m(self) -> float:
        return np.inf if self.homodyne else 0.5 * np.log(self.s)

    @property
    def measured_quadrature(self) -> np.ndarray:
        """Unit vector of the quadrature read out in the homodyne limit."""
        return rotation(self.phi) @ np.array([0.0, 1.0])


@dataclass(frozen=True)
class MeasurementOutcome:
    r_out: tuple[float, float]

    def __post_init__(self):
        r = tuple(float(v) for v in np.asarray(self.r_out, dtype=float).reshape(-1))
        if len(r) != 2:
            raise DimensionError("a single-mode outcome has two quadrature values")
        if not all(np.isfinite(r)):
            raise ValueError("outcome must be finite")
        object.__setattr__(self, "r_out", r)

    @classmethod
    def polar(cls, radius: float, theta: float) -> "MeasurementOutcome":
        return cls((radius * np.cos(theta), radius * np.sin(theta)))

    @property
    def radius(self) -> float:
        return float(np.hypot(*self.r_out))

    @property
    def theta(self) -> float:
        return float(np.arctan2(self.r_out[1], self.r_out[0]))

    def as_array(self) -> np.ndarray:
        return np.array(self.r_out)


MeasurementLike = Union[GeneralDyneMeasurement, Sequence[GeneralDyneMeasurement]]


def measurement_cm(m: GeneralDyneMeasurement) -> np.ndarray:
    """Covariance matrix ``R(phi) diag(s, 1/s) R(phi)^T`` of a finite measurement."""
    if m.homodyne:
        raise LimitError("homodyne measurement has no finite covariance matrix")
    s, c, sn = m.s, np.cos(m.phi), np.sin(m.phi)
    off = (s * s - 1) * c * sn / s
    return np.array([[s * c * c + sn * sn / s, off], [off, c * c / s + s * sn * sn]])


def _as_list(measured, m) -> tuple[list[int], list[GeneralDyneMeasurement]]:
    modes = [int(measured)] if np.isscalar(measured) else [int(k) for k in measured]
    ms = [m] if isinstance(m, GeneralDyneMeasurement) else list(m)
    if len(ms) != len(modes):
        raise DimensionError(f"{len(modes)} measured modes but {len(ms)} measurements")
    return modes, ms


def _gain_matrix(sigma_b: np.ndarray, ms: list[GeneralDyneMeasurement]) -> np.ndarray:
    """``(sigma_B + sigma_m)^{-1}``, or its homodyne limit ``Pi (Pi M Pi)^+ Pi``."""
    # Work in the frame rotated by R(phi_j) so diag(s, 1/s) is added exactly; forming
    # R diag(s, 1/s) R^T directly loses the 1/s eigenvalue to cancellation at large s.
    k = len(ms)
    rot = np.zeros((2 * k, 2 * k))
    for j, mj in enumerate(ms):
        rot[2 * j:2 * j + 2, 2 * j:2 * j + 2] = rotation(mj.phi)
    total = rot.T @ sigma_b @ rot
    proj = np.eye(2 * k)
    for j, mj in enumerate(ms):
        if mj.homodyne:
            proj[2 * j, 2 * j] = 0.0
        else:
            total[2 * j, 2 * j] += mj.s
            total[2 * j + 1, 2 * j + 1] += 1 / mj.s
    if not any(mj.homodyne for mj in ms):
        cond = np.linalg.cond(total)
        if cond > 1e14:
            raise np.linalg.LinAlgError(f"sigma_B + sigma_m is singular (condition {cond:.2e})")
        gain = np.linalg.inv(total)
    else:
        reduced = proj @ total @ proj
        gain = proj @ np.linalg.pinv(reduced, rcond=1e-12, hermitian=True) @ proj
    gain = rot @ gain @ rot.T
    return (gain + gain.T) / 2


def _split(state: GaussianState, modes: list[int]):
    n = state.n_modes
    if any(not 0 <= k < n for k in modes) or len(set(modes)) != len(modes):
        raise IndexError(f"measured modes {modes} invalid for {n} modes")
    if len(modes) == n:
        raise ValueError("at least one mode must remain unmeasured")
    rest = [k for k in range(n) if k not in modes]
    ia, ib = _mode_indices(rest), _mode_indices(modes)
    cov, mean = state.cov, state.mean
    return (cov[np.ix_(ia, ia)], cov[np.ix_(ia, ib)], cov[np.ix_(ib, ib)], mean[ia], mean[ib])


def condition_on_outcome(state: GaussianState, measured, m: MeasurementLike, outcome=None) -> GaussianState:
    """Conditional state of the unmeasured modes after measuring ``measured``.

    ``sigma'_A = sigma_A - sigma_AB (sigma_B + sigma_m)^{-1} sigma_AB^T`` and
    ``r'_A = r_A + sigma_AB (sigma_B + sigma_m)^{-1} (r_out - r_B)``. In the homodyne
    limit the inverse becomes a projected pseudoinverse and only the measured
    quadrature of ``r_out`` matters.

    Args:
        state: state of all modes.
        measured: index (or indices) of the measured mode(s).
        m: one measurement per measured mode.
        outcome: ``MeasurementOutcome`` or array of length ``2 * len(measured)``;
            ``None`` means the zero (most likely, for zero-mean states) outcome.
    """
    modes, ms = _as_list(measured, m)
    sa, sab, sb, ra, rb = _split(state, modes)
    gain = _gain_matrix(sb, ms)
    if outcome is None:
        r_out = rb * 0.0
    elif isinstance(outcome, MeasurementOutcome):
        r_out = outcome.as_array()
    else:
        r_out = np.asarray(outcome, dtype=float).reshape(-1)
    if r_out.shape != rb.shape:
        raise DimensionError(f"outcome must have length {rb.size}")
    if not np.all(np.isfinite(r_out)):
        raise ValueError("outcome must be finite")
    kal = sab @ gain
    cov = sa - kal @ sab.T
    mean = ra + kal @ (r_out - rb)
    return GaussianState(mean=mean, cov=(cov + cov.T) / 2, tol=state.tol)


def _outcome_covariance(state: GaussianState, measured, m):
    modes, ms = _as_list(measured, m)
    if any(mj.homodyne for mj in ms):
        raise LimitError("outcome statistics are not provided for the homodyne limit")
    _, _, sb, _, rb = _split(state, modes)
    total = sb.copy()
    for j, mj in enumerate(ms):
        total[2 * j:2 * j + 2, 2 * j:2 * j + 2] += measurement_cm(mj)
    return total, rb


def outcome_density(state: GaussianState, measured, m: MeasurementLike, outcome) -> float:
    """Probability density ``exp(-d^T (sigma_m + sigma_B)^{-1} d) / (pi^k sqrt(det))``."""
    total, rb = _outcome_covariance(state, measured, m)
    r_out = outcome.as_array() if isinstance(outcome, MeasurementOutcome) else np.asarray(outcome, float)
    d = r_out.reshape(-1) - rb
    k = rb.size // 2
    return float(np.exp(-d @ np.linalg.solve(total, d)) / (np.pi ** k * np.sqrt(np.linalg.det(total))))


def outcome_distribution(state: GaussianState, measured, m: MeasurementLike) -> tuple[np.ndarray, np.ndarray]:
    """Mean and classical covariance ``(sigma_m + sigma_B) / 2`` of the outcomes."""
    total, rb = _outcome_covariance(state, measured, m)
    return rb.copy(), total / 2


def sample_outcomes(state: GaussianState, measured, m: MeasurementLike, size: int, rng) -> np.ndarray:
    """Draw ``size`` outcome vectors (rows) from a ``numpy.random.Generator``."""
    mu, cov = outcome_distribution(state, measured, m)
    return rng.multivariate_normal(mu, cov, size=size, method="cholesky")


def sample_outcome(state: GaussianState, measured, m: GeneralDyneMeasurement, rng_seed) -> MeasurementOutcome:
    """One outcome, deterministic for a fixed seed (int or ``SeedSequence``)."""
    rng = np.random.default_rng(rng_seed)
    return MeasurementOutcome(sample_outcomes(state, measured, m, 1, rng)[0])


def conditional_first_moment_energy(a: float, b: float, c: float, s: float, phi: float, outcome) -> float:
    """``|r'_A|^2`` for an STS (``c1 = -c2 = c``) under a general-dyne measurement on B.

    Closed form in the outcome's polar coordinates ``(|r_out|, theta)``; only the
    relative angle ``theta - phi`` matters. ``s`` may be ``inf`` (homodyne limit).
    """
    if s < 1:
        raise ValueError("closed form assumes s >= 1")
    if not isinstance(outcome, MeasurementOutcome):
        outcome = MeasurementOutcome(outcome)
    rsq = outcome.radius ** 2
    delta = outcome.theta - phi
    if np.isinf(s):
        return c * c * rsq * np.sin(delta) ** 2 / (b * b)
    bracket = (b * b - 1) + (2 * b + s + 1 / s) * (s * np.sin(delta) ** 2 + np.cos(delta) ** 2 / s)
    return c * c * rsq * s * s * bracket / ((b + s) ** 2 * (b * s + 1) ** 2)
