"""Conditional Gaussian dynamics under continuous general-dyne monitoring.

A system with Hamiltonian matrix ``H_s`` couples through ``C`` to a Markovian bath
with covariance ``sigma_E``. Unmonitored, its covariance obeys the diffusion
equation ``d sigma/dt = A sigma + sigma A^T + D``. When the bath output is
monitored with ``sigma_m``, the conditional covariance obeys a Riccati equation

    d sigma'/dt = A~ sigma' + sigma' A~^T + D~ - sigma' B B^T sigma'

and the first moments follow an Ito SDE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.integrate import RK45

from .coherence import coherence
from .core import GaussianState, _raw_min_nu, symplectic_form
from .errors import DimensionError, InstabilityError, PhysicalityError, StepSizeError
from .measurement import GeneralDyneMeasurement, measurement_cm


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.T) / 2)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


@dataclass(frozen=True)
class MonitoredModel:
    """Linear open system with an optionally monitored bath.

    Args:
        H_s: ``2n x 2n`` Hamiltonian matrix of ``H = r^T H_s r / 2``.
        C: ``2n x 2m`` coupling to the bath input quadratures.
        sigma_E: ``2m x 2m`` bath covariance.
        sigma_m: ``2m x 2m`` measurement covariance, a single-mode
            ``GeneralDyneMeasurement`` (which may be the homodyne limit), or
            ``None`` for an unmonitored bath.
    """

    H_s: np.ndarray
    C: np.ndarray
    sigma_E: np.ndarray
    sigma_m: object = None
    _w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        hs = np.atleast_2d(np.asarray(self.H_s, dtype=float))
        c = np.atleast_2d(np.asarray(self.C, dtype=float))
        se = np.atleast_2d(np.asarray(self.sigma_E, dtype=float))
        if hs.shape[0] != hs.shape[1] or hs.shape[0] % 2:
            raise DimensionError(f"H_s must be square with even size, got {hs.shape}")
        if not np.allclose(hs, hs.T, atol=1e-12):
            raise ValueError("H_s must be symmetric")
        if c.shape[0] != hs.shape[0] or c.shape[1] % 2:
            raise DimensionError(f"C must be {hs.shape[0]} x 2m, got {c.shape}")
        if se.shape != (c.shape[1], c.shape[1]):
            raise DimensionError(f"sigma_E must be {c.shape[1]} x {c.shape[1]}, got {se.shape}")
        if _raw_min_nu(se) < 1 - 1e-9:
            raise PhysicalityError("bath covariance sigma_E is unphysical")
        object.__setattr__(self, "H_s", hs)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "sigma_E", se)
        object.__setattr__(self, "_w", self._gain())

    @property
    def n_modes(self) -> int:
        return self.H_s.shape[0] // 2

    @property
    def monitored(self) -> bool:
        return self.sigma_m is not None

    def _gain(self):
        # (sigma_E + sigma_m)^{-1}, or its homodyne limit Pi (Pi sigma_E Pi)^+ Pi.
        sm = self.sigma_m
        if sm is None:
            return None
        se = self.sigma_E
        if isinstance(sm, GeneralDyneMeasurement):
            if se.shape != (2, 2):
                raise DimensionError("a GeneralDyneMeasurement monitors a single bath mode")
            if sm.homodyne:
                v = sm.measured_quadrature
                proj = np.outer(v, v)
                w = proj @ np.linalg.pinv(proj @ se @ proj, hermitian=True) @ proj
                return (w + w.T) / 2
            sm = measurement_cm(sm)
        sm = np.asarray(sm, dtype=float)
        if sm.shape != se.shape:
            raise DimensionError(f"sigma_m must match sigma_E {se.shape}, got {sm.shape}")
        if _raw_min_nu(sm) < 1 - 1e-9:
            raise PhysicalityError("measurement covariance sigma_m is unphysical")
        total = se + sm
        if np.linalg.cond(total) > 1e14:
            raise np.linalg.LinAlgError("sigma_E + sigma_m is singular")
        w = np.linalg.inv(total)
        return (w + w.T) / 2


def drift_diffusion(model: MonitoredModel) -> tuple[np.ndarray, np.ndarray]:
    """``A = Omega H_s + Omega C Omega C^T / 2`` and ``D = Omega C sigma_E C^T Omega^T``."""
    om = symplectic_form(model.n_modes)
    om_e = symplectic_form(model.C.shape[1] // 2)
    c = model.C
    a = om @ model.H_s + om @ c @ om_e @ c.T / 2
    d = om @ c @ model.sigma_E @ c.T @ om.T
    return a, (d + d.T) / 2


def conditional_matrices(model: MonitoredModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(A~, D~, B)`` of the Riccati equation.

    With ``W = (sigma_E + sigma_m)^{-1}``::

        A~ = A - Omega C sigma_E W Omega C^T
        D~ = D + Omega C sigma_E W sigma_E C^T Omega
        B  = C Omega W^{1/2}

    An unmonitored model returns ``(A, D, 0)``.
    """
    a, d = drift_diffusion(model)
    if not model.monitored:
        return a, d, np.zeros_like(model.C)
    om = symplectic_form(model.n_modes)
    om_e = symplectic_form(model.C.shape[1] // 2)
    c, se, w = model.C, model.sigma_E, model._w
    a_t = a - om @ c @ se @ w @ om_e @ c.T
    d_t = d + om @ c @ se @ w @ se @ c.T @ om
    b = c @ om_e @ _psd_sqrt(w)
    return a_t, (d_t + d_t.T) / 2, b


def riccati_rhs(sigma: np.ndarray, a_t: np.ndarray, d_t: np.ndarray, b: np.ndarray) -> np.ndarray:
    bb = b @ b.T
    return a_t @ sigma + sigma @ a_t.T + d_t - sigma @ bb @ sigma


def riccati_steady_state(model: MonitoredModel, tol: float = 1e-10, max_time: float = 1e5,
                         sigma0=None, rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Fixed point of the Riccati flow, reached by RK45 from the vacuum.

    Integration stops once ``max |d sigma/dt| < tol``. Every accepted step is
    checked for physicality.

    Raises:
        InstabilityError: no convergence before ``max_time``.
        PhysicalityError: the flow left the physical set (numerical failure).
    """
    a_t, d_t, b = conditional_matrices(model)
    dim = a_t.shape[0]
    s0 = np.eye(dim) if sigma0 is None else np.asarray(sigma0, dtype=float)

    def f(_t, y):
        s = y.reshape(dim, dim)
        s = (s + s.T) / 2
        return riccati_rhs(s, a_t, d_t, b).ravel()

    solver = RK45(f, 0.0, s0.ravel(), max_time, rtol=rtol, atol=atol)
    sigma = s0
    while True:
        if np.max(np.abs(f(0.0, sigma.ravel()))) < tol:
            return sigma
        if solver.status != "running":
            break
        solver.step()
        sigma = solver.y.reshape(dim, dim)
        sigma = (sigma + sigma.T) / 2
        if not np.all(np.isfinite(sigma)):
            break
        if _raw_min_nu(sigma) < 1 - 1e-7:
            raise PhysicalityError(f"Riccati flow left the physical set at t={solver.t:.4g}")
    raise InstabilityError(
        f"Riccati flow did not settle (|d sigma/dt| >= {tol}) within t={max_time}; model may be unstable")


def lyapunov_steady_state(model: MonitoredModel) -> np.ndarray:
    """Unmonitored steady state, ``A sigma + sigma A^T + D = 0``."""
    a, d = drift_diffusion(model)
    if np.max(np.linalg.eigvals(a).real) >= 0:
        raise InstabilityError("drift matrix has eigenvalues with non-negative real part")
    s = la.solve_continuous_lyapunov(a, -d)
    return (s + s.T) / 2


@dataclass(frozen=True)
class OPOParams:
    """Degenerate parametric oscillator with ``chi = chi_tilde * gamma``."""

    chi_tilde: float
    gamma: float = 1.0
    N: float = 0.0
    r_m: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.N < 0 or self.r_m < 0:
            raise ValueError("N and r_m must be non-negative")

    @property
    def mu(self) -> float:
        return 1.0 / (2 * self.N + 1)

    @property
    def chi(self) -> float:
        return self.chi_tilde * self.gamma

    def with_r_m(self, r_m: float) -> "OPOParams":
        return OPOParams(self.chi_tilde, self.gamma, self.N, r_m)


def opo_model(p: OPOParams, monitored: bool = True, homodyne: bool = False) -> MonitoredModel:
    """OPO with ``H_s = -chi [[0, 1], [1, 0]]``, ``C = sqrt(gamma) 1`` and a thermal bath.

    Monitoring uses ``sigma_m = diag(e^{2 r_m}, e^{-2 r_m})``; ``homodyne`` takes the
    ``r_m -> inf`` limit (homodyne detection of ``p``).
    """
    hs = -p.chi * np.array([[0.0, 1.0], [1.0, 0.0]])
    c = math.sqrt(p.gamma) * np.eye(2)
    se = (2 * p.N + 1) * np.eye(2)
    if not monitored:
        sm = None
    elif homodyne:
        sm = GeneralDyneMeasurement.homodyne_limit(0.0)
    else:
        sm = GeneralDyneMeasurement.from_squeezing(p.r_m, 0.0)
    return MonitoredModel(hs, c, se, sm)


def opo_conditional_matrices(p: OPOParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form ``(A~, D~, B)`` for the monitored OPO."""
    g, chi, mu = p.gamma, p.chi, p.mu
    em, ep = mu * math.exp(-2 * p.r_m), mu * math.exp(2 * p.r_m)
    a_t = np.diag([-chi - g / 2 + g / (1 + em), chi - g / 2 + g / (1 + ep)])
    d_t = (g / mu) * np.diag([em / (1 + em), ep / (1 + ep)])
    b = math.sqrt(mu * g) * np.array([[0.0, math.sqrt(1 / (1 + em))], [-math.sqrt(1 / (1 + ep)), 0.0]])
    return a_t, d_t, b


def opo_steady_state_closed_form(p: OPOParams, monitored: bool = True, homodyne: bool = False) -> np.ndarray:
    """Steady-state covariance of the OPO.

    Unmonitored: ``diag(1/(1+2x), 1/(1-2x)) / mu``. Homodyne: ``diag(1-2x, 1/(1-2x)) / mu``.
    General-dyne: ``sigma_ii = (A~_ii + sqrt(A~_ii^2 + (BB^T)_ii D~_ii)) / (BB^T)_ii``.

    Raises:
        InstabilityError: ``chi_tilde >= 1/2``.
    """
    x, mu = p.chi_tilde, p.mu
    if x >= 0.5:
        raise InstabilityError(f"OPO has no steady state for chi_tilde >= 1/2 (got {x})")
    if not monitored:
        return np.diag([1 / (1 + 2 * x), 1 / (1 - 2 * x)]) / mu
    if homodyne:
        return np.diag([1 - 2 * x, 1 / (1 - 2 * x)]) / mu
    a_t, d_t, b = opo_conditional_matrices(p)
    at, dt, bb = np.diag(a_t), np.diag(d_t), np.diag(b @ b.T)
    root = np.sqrt(at ** 2 + bb * dt)
    # Rationalized (A + sqrt(A^2 + BD)) / B avoids cancellation when A < 0 and B D is small.
    vals = np.where(at > 0, (at + root) / bb, dt / (root - at))
    return np.diag(vals)


def noise_matrix(model: MonitoredModel, sigma_steady: np.ndarray) -> np.ndarray:
    """``G`` in ``dr = A r dt + G dw``: ``(Omega C sigma_E - sigma' C Omega) W^{1/2} / sqrt(2)``."""
    if not model.monitored:
        return np.zeros_like(model.C)
    om = symplectic_form(model.n_modes)
    om_e = symplectic_form(model.C.shape[1] // 2)
    c = model.C
    return (om @ c @ model.sigma_E - sigma_steady @ c @ om_e) @ _psd_sqrt(model._w) / math.sqrt(2)


def simulate_trajectory(model: MonitoredModel, sigma_steady, dt: float, n_steps: int, rng_seed=0,
                        r0=None, noise: bool = True) -> np.ndarray:
    """Euler-Maruyama integration of the conditional first moments.

    Returns an ``(n_steps + 1, 2n)`` array starting at ``r0`` (zero by default), with
    independent ``dw ~ Normal(0, dt)`` per bath quadrature.

    Raises:
        StepSizeError: ``max |eig(A)| * dt > 0.1``.
    """
    if dt <= 0 or n_steps < 0:
        raise ValueError("need dt > 0 and n_steps >= 0")
    a, _ = drift_diffusion(model)
    rate = float(np.max(np.abs(np.linalg.eigvals(a))))
    if rate * dt > 0.1:
        raise StepSizeError(f"dt={dt} too large for drift rate {rate:.4g} (need rate*dt <= 0.1)")
    g = noise_matrix(model, np.asarray(sigma_steady, dtype=float))
    dim = a.shape[0]
    out = np.empty((n_steps + 1, dim))
    out[0] = np.zeros(dim) if r0 is None else np.asarray(r0, dtype=float)
    rng = np.random.default_rng(rng_seed)
    dws = rng.normal(0.0, math.sqrt(dt), size=(n_steps, g.shape[1])) if noise else np.zeros((n_steps, g.shape[1]))
    step = np.eye(dim) + a * dt
    for k in range(n_steps):
        out[k + 1] = step @ out[k] + g @ dws[k]
    return out


def simulate_ensemble(model: MonitoredModel, sigma_steady, dt: float, n_steps: int, n_traj: int,
                      rng_seed=0) -> np.ndarray:
    """Final first moments of ``n_traj`` trajectories, trajectory ``j`` seeded by the ``j``-th child seed."""
    children = np.random.SeedSequence(rng_seed).spawn(n_traj)
    return np.array([simulate_trajectory(model, sigma_steady, dt, n_steps, child)[-1] for child in children])


def opo_coherence(p: OPOParams, measure: str = "gaussian", monitored: bool = True,
                  homodyne: bool = False) -> float:
    """Coherence of the zero-mean OPO steady state."""
    cov = opo_steady_state_closed_form(p, monitored, homodyne)
    return coherence(GaussianState(mean=np.zeros(2), cov=cov), measure)


@dataclass(frozen=True)
class ThresholdResult:
    r_m: float
    bracketed: bool
    side: str = ""

    def __float__(self):
        return self.r_m


def threshold_squeezing(p: OPOParams, measure: str = "gaussian", r_max: float = 15.0,
                        n_grid: int = 61, xtol: float = 1e-6) -> ThresholdResult:
    """Measurement squeezing where monitored and unmonitored coherences coincide.

    The difference is scanned on a uniform ``r_m`` grid over ``[0, r_max]`` and the
    first sign change is bisected to ``xtol``. Without a sign change the nearest
    boundary is returned with ``bracketed=False`` and ``side`` telling whether the
    monitored coherence lies ``"above"`` or ``"below"`` throughout.
    """
    if not 0 < p.chi_tilde < 0.5:
        raise ValueError("need 0 < chi_tilde < 1/2")
    ref = opo_coherence(p, measure, monitored=False)

    def gap(r):
        return opo_coherence(p.with_r_m(r), measure) - ref

    grid = np.linspace(0.0, r_max, n_grid)
    vals = [gap(r) for r in grid]
    for k in range(n_grid - 1):
        if vals[k] == 0:
            return ThresholdResult(float(grid[k]), True)
        if vals[k] * vals[k + 1] < 0:
            lo, hi, flo = grid[k], grid[k + 1], vals[k]
            while hi - lo > xtol:
                mid = (lo + hi) / 2
                fm = gap(mid)
                if fm * flo > 0:
                    lo, flo = mid, fm
                else:
                    hi = mid
            return ThresholdResult(float((lo + hi) / 2), True)
    above = vals[0] > 0
    return ThresholdResult(0.0 if above else float(r_max), False, "above" if above else "below")
