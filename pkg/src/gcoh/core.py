"""Symplectic linear algebra on Gaussian states.

Conventions: quadratures are ordered ``(x1, p1, ..., xn, pn)`` with
``[x, p] = i``, and the covariance matrix is ``sigma_ij = <{dr_i, dr_j}>``, so the
vacuum has ``sigma = 1`` and a thermal state with ``N`` photons has
``sigma = (2N + 1) * 1``. Entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as la

from .errors import DimensionError, PhysicalityError

PHYS_TOL = 1e-9
SYM_TOL = 1e-10

OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the ``2n x 2n`` symplectic form ``Omega = (+)_j [[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), OMEGA1)


def rotation(phi: float) -> np.ndarray:
    """Return the 2x2 phase-space rotation ``R(phi)``."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def _check_square_even(cov: np.ndarray) -> int:
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DimensionError(f"covariance matrix must be square, got shape {cov.shape}")
    if cov.shape[0] % 2:
        raise DimensionError(f"covariance matrix must have even dimension, got {cov.shape[0]}")
    return cov.shape[0] // 2


def _raw_symplectic_spectrum(cov: np.ndarray) -> np.ndarray:
    # Spectrum of i*Omega*sigma via the Hermitian similar matrix sqrt(sigma) iOmega sqrt(sigma).
    n = cov.shape[0] // 2
    root = la.sqrtm(cov)
    root = np.real(root + root.T) / 2
    herm = 1j * root @ symplectic_form(n) @ root
    vals = np.linalg.eigvalsh((herm + herm.conj().T) / 2)
    return np.sort(np.abs(vals))[::2]


def is_physical(cov, tol: float = PHYS_TOL) -> bool:
    """Check the uncertainty relation ``sigma + i Omega >= 0``.

    Args:
        cov: real symmetric ``2n x 2n`` matrix.
        tol: slack on the smallest symplectic eigenvalue.

    Returns:
        True iff ``cov`` is positive definite and every symplectic eigenvalue is
        at least ``1 - tol``.
    """
    cov = np.asarray(cov, dtype=float)
    _check_square_even(cov)
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > max(tol, SYM_TOL) * scale:
        raise DimensionError("covariance matrix is not symmetric")
    cov = (cov + cov.T) / 2
    if np.linalg.eigvalsh(cov)[0] <= 0:
        return False
    return bool(_raw_symplectic_spectrum(cov)[0] >= 1 - tol)


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Sorted symplectic eigenvalues of a physical covariance matrix."""

    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def symplectic_eigenvalues(cov, tol: float = PHYS_TOL) -> SymplecticSpectrum:
    """Symplectic spectrum of ``cov``, with values in ``[1 - tol, 1)`` clamped to 1.

    Raises:
        PhysicalityError: if ``cov`` is not a physical covariance matrix.
    """
    cov = np.asarray(cov, dtype=float)
    _check_square_even(cov)
    if not is_physical(cov, tol):
        raise PhysicalityError("covariance matrix violates sigma + i Omega >= 0")
    vals = _raw_symplectic_spectrum((cov + cov.T) / 2)
    vals = np.maximum(vals, 1.0)
    return SymplecticSpectrum(tuple(float(v) for v in vals))


def h(x):
    """Entropy of a single-mode thermal state with symplectic eigenvalue ``x``.

    ``h(x) = (x+1)/2 ln((x+1)/2) - (x-1)/2 ln((x-1)/2)``, with ``h(1) = 0``.
    Works elementwise on arrays.
    """
    x = np.asarray(x, dtype=float)
    xp = (x + 1) / 2
    xm = (x - 1) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        val = xp * np.log(xp) - np.where(xm > 0, xm * np.log(np.where(xm > 0, xm, 1.0)), 0.0)
    val = np.where(x < 1 + 1e-12, 0.0, val)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True, eq=False)
class GaussianState:
    """An ``n``-mode Gaussian state given by first moments and covariance matrix.

    The constructor validates symmetry and physicality; arrays are copied and
    made read-only so instances can be shared freely.
    """

    mean: np.ndarray
    cov: np.ndarray
    tol: float = PHYS_TOL

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        n = _check_square_even(cov)
        mean = np.zeros(2 * n) if self.mean is None else np.array(self.mean, dtype=float).reshape(-1)
        if mean.shape != (2 * n,):
            raise DimensionError(f"mean must have length {2 * n}, got {mean.shape}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("state moments must be finite")
        if not is_physical(cov, self.tol):
            raise PhysicalityError(
                "covariance matrix violates sigma + i Omega >= 0 "
                f"(min symplectic eigenvalue {_raw_min_nu(cov):.3g})"
            )
        cov = (cov + cov.T) / 2
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_cov(cls, cov, mean=None, tol: float = PHYS_TOL) -> "GaussianState":
        return cls(mean=mean, cov=cov, tol=tol)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def is_pure(self, tol: float = 1e-8) -> bool:
        return abs(np.linalg.det(self.cov) - 1.0) < tol

    def mode_block(self, i: int, j: int | None = None) -> np.ndarray:
        """The 2x2 block ``sigma_ij`` (``sigma_i`` when ``j`` is omitted)."""
        j = i if j is None else j
        return self.cov[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def __repr__(self) -> str:
        return f"GaussianState(n_modes={self.n_modes}, mean={self.mean.tolist()}, cov={self.cov.tolist()})"


def _raw_min_nu(cov) -> float:
    try:
        return float(_raw_symplectic_spectrum((cov + cov.T) / 2)[0])
    except Exception:  # sqrtm of an indefinite matrix
        return float("nan")


def _mode_indices(modes: Sequence[int]) -> np.ndarray:
    return np.array([k for m in modes for k in (2 * m, 2 * m + 1)], dtype=int)


def vacuum(n_modes: int = 1) -> GaussianState:
    return GaussianState(mean=np.zeros(2 * n_modes), cov=np.eye(2 * n_modes))


def thermal_state(n_photons) -> GaussianState:
    """Product of thermal states; ``n_photons`` is a scalar or one value per mode."""
    n = np.atleast_1d(np.asarray(n_photons, dtype=float))
    if np.any(n < 0):
        raise ValueError("thermal photon numbers must be non-negative")
    return GaussianState(mean=None, cov=np.diag(np.repeat(2 * n + 1, 2)))


def single_mode_state(n_thermal: float = 0.0, r: float = 0.0, phi: float = 0.0, mean=(0.0, 0.0)) -> GaussianState:
    """Displaced squeezed thermal state ``D R(phi) S(r) nu_N``.

    The covariance matrix is ``(2N+1) R(phi) diag(e^{-2r}, e^{2r}) R(phi)^T``: ``r > 0``
    squeezes ``x`` before the rotation.
    """
    if n_thermal < 0:
        raise ValueError("thermal photon number must be non-negative")
    rot = rotation(phi)
    cov = (2 * n_thermal + 1) * rot @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ rot.T
    return GaussianState(mean=mean, cov=cov)


def direct_sum(*states: GaussianState) -> GaussianState:
    """Tensor product of uncorrelated states."""
    return GaussianState(
        mean=np.concatenate([s.mean for s in states]),
        cov=la.block_diag(*[s.cov for s in states]),
    )


def von_neumann_entropy(state: GaussianState) -> float:
    """``S(rho) = sum_k h(nu_k)`` over the symplectic spectrum, in nats."""
    nu = symplectic_eigenvalues(state.cov, state.tol).as_array()
    return float(np.sum(h(nu)))


def partial_trace(state: GaussianState, keep_modes: Sequence[int]) -> GaussianState:
    """Reduced state on ``keep_modes`` (in the given order)."""
    keep = list(keep_modes)
    if not keep:
        raise ValueError("keep_modes must be non-empty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate mode indices in {keep}")
    if any(not 0 <= k < state.n_modes for k in keep):
        raise IndexError(f"mode indices {keep} out of range for {state.n_modes} modes")
    idx = _mode_indices(keep)
    return GaussianState(mean=state.mean[idx], cov=state.cov[np.ix_(idx, idx)], tol=state.tol)


def mean_photon_number(state: GaussianState):
    """Mean photon number ``1/4 Tr sigma_i + 1/2 |r_i|^2 - 1/2``.

    Returns a float for a single mode and an array with one entry per mode otherwise.
    """
    cov = state.cov
    diag = np.diag(cov).reshape(-1, 2).sum(axis=1)
    rsq = (state.mean ** 2).reshape(-1, 2).sum(axis=1)
    nbar = np.maximum(diag / 4 + rsq / 2 - 0.5, 0.0)
    return float(nbar[0]) if state.n_modes == 1 else nbar


def partial_transpose(cov) -> np.ndarray:
    """Flip the sign of the last momentum, ``Lambda sigma Lambda`` with ``Lambda = diag(1,..,1,-1)``."""
    cov = np.asarray(cov, dtype=float)
    lam = np.ones(cov.shape[0])
    lam[-1] = -1.0
    return cov * np.outer(lam, lam)


def is_separable_ppt(state: GaussianState, tol: float = PHYS_TOL) -> bool:
    """Simon's PPT criterion for two-mode Gaussian states."""
    if state.n_modes != 2:
        raise DimensionError(f"PPT test is implemented for two modes, got {state.n_modes}")
    return is_physical(partial_transpose(state.cov), tol)


def quantum_mutual_information(state: GaussianState) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` for a two-mode state."""
    if state.n_modes != 2:
        raise DimensionError(f"mutual information needs two modes, got {state.n_modes}")
    s_a = von_neumann_entropy(partial_trace(state, [0]))
    s_b = von_neumann_entropy(partial_trace(state, [1]))
    return max(s_a + s_b - von_neumann_entropy(state), 0.0)


def williamson(cov) -> tuple[np.ndarray, np.ndarray]:
    """Williamson decomposition ``cov = S diag(nu_1, nu_1, ..., nu_n, nu_n) S^T``.

    Used internally by the Fock oracle; returns ``(nu, S)``.
    """
    cov = np.asarray(cov, dtype=float)
    n = _check_square_even(cov)
    inv_root = la.inv(np.real(la.sqrtm(cov)))
    inv_root = (inv_root + inv_root.T) / 2
    k = inv_root @ symplectic_form(n) @ inv_root
    t, o = la.schur(k, output="real")
    nu = np.empty(n)
    for j in range(n):
        blk = t[2 * j:2 * j + 2, 2 * j:2 * j + 2]
        if blk[0, 1] < 0:
            o[:, [2 * j, 2 * j + 1]] = o[:, [2 * j + 1, 2 * j]]
            blk = blk[::-1, ::-1]
        nu[j] = 1.0 / blk[0, 1]
    d_half = np.diag(np.repeat(np.sqrt(nu), 2))
    s_inv_t = inv_root @ o @ d_half
    return nu, la.inv(s_inv_t).T
