"""Fock-basis numerics for Gaussian states.

Photon statistics come from the exact Gaussian generating function. With
``u = alpha*`` and ``v = alpha`` (one pair per mode),

    exp(|alpha|^2) <alpha|rho|alpha>  ->  G(u, v) = K exp(w^T M w / 2 + g^T w),  w = (u, v),

is the generating function of ``rho_{mn} / sqrt(m! n!)`` and its coefficients obey a
multidimensional Hermite recurrence. For pure states ``G`` factorises and the
``u`` block alone yields the amplitudes ``<k|psi>``.

``fock_oracle_density_matrix`` is an independent route through truncated ladder
operators and matrix exponentials; it exists to cross-check the recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .core import GaussianState, mean_photon_number, williamson
from .errors import TruncationError, UnsupportedError

NEG_CLAMP = 1e-12
MAX_CUTOFF = 4096


@dataclass(frozen=True)
class PhotonNumberDistribution:
    probs: np.ndarray
    tail_bound: float

    @property
    def cutoff(self) -> int:
        return len(self.probs)

    @property
    def mean(self) -> float:
        return float(np.arange(self.cutoff) @ self.probs)


@dataclass(frozen=True)
class JointPhotonNumberDistribution:
    probs: np.ndarray
    tail_bound: float
    amplitudes: np.ndarray | None = field(default=None, repr=False)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return self.probs.shape

    def marginal(self, mode: int) -> PhotonNumberDistribution:
        axes = tuple(k for k in range(self.probs.ndim) if k != mode)
        return PhotonNumberDistribution(self.probs.sum(axis=axes), self.tail_bound)


def _generating_form(state: GaussianState):
    """``(M, g, K)`` of the generating function, variables ordered ``(u_1..u_n, v_1..v_n)``."""
    n = state.n_modes
    w_mat = la.inv(state.cov + np.eye(2 * n))
    w_mat = (w_mat + w_mat.T) / 2
    proj = np.zeros((2 * n, 2 * n), dtype=complex)
    s2 = 1 / math.sqrt(2)
    for i in range(n):
        proj[2 * i, i] = s2
        proj[2 * i, n + i] = s2
        proj[2 * i + 1, i] = 1j * s2
        proj[2 * i + 1, n + i] = -1j * s2
    j_mat = np.zeros((2 * n, 2 * n))
    j_mat[:n, n:] = np.eye(n)
    j_mat[n:, :n] = np.eye(n)
    m_mat = -2 * proj.T @ w_mat @ proj + j_mat
    g = 2 * proj.T @ w_mat @ state.mean
    r = state.mean
    k0 = 2 ** n / math.sqrt(np.linalg.det(state.cov + np.eye(2 * n))) * math.exp(-r @ w_mat @ r)
    return m_mat, g, k0


def _shift(x: np.ndarray, axis: int) -> np.ndarray:
    out = np.zeros_like(x)
    idx = [slice(None)] * x.ndim
    src = list(idx)
    idx[axis] = slice(1, None)
    src[axis] = slice(None, -1)
    out[tuple(idx)] = x[tuple(src)]
    return out


def _hermite_grid(m_mat: np.ndarray, g: np.ndarray, c0: complex, shape: tuple[int, ...]) -> np.ndarray:
    """Coefficients ``c_k`` of ``c0 exp(w^T M w / 2 + g^T w)`` in the basis ``w^k / sqrt(k!)``.

    Fills the grid by raising the leading index:
    ``c_{k+e_0} = (g_0 c_k + sum_j M_0j sqrt(k_j) c_{k-e_j}) / sqrt(k_0 + 1)``.
    """
    d = len(shape)
    grid = np.zeros(shape, dtype=complex)
    if d == 1:
        grid[0] = c0
        for k in range(shape[0] - 1):
            prev = grid[k - 1] if k else 0.0
            grid[k + 1] = (g[0] * grid[k] + m_mat[0, 0] * math.sqrt(k) * prev) / math.sqrt(k + 1)
        return grid
    grid[0] = _hermite_grid(m_mat[1:, 1:], g[1:], c0, shape[1:])
    if d == 2:
        # In-place row update; the generic path below allocates per row.
        root = np.sqrt(np.arange(1, shape[1]))
        m00, m01, g0 = m_mat[0, 0], m_mat[0, 1], g[0]
        for k in range(shape[0] - 1):
            nxt = grid[k + 1]
            nxt[:] = g0 * grid[k]
            if k:
                nxt += (m00 * math.sqrt(k)) * grid[k - 1]
            if m01 != 0:
                nxt[1:] += m01 * root * grid[k, :-1]
            nxt /= math.sqrt(k + 1)
        return grid
    roots = [np.sqrt(np.arange(n)).reshape([-1 if a == j else 1 for a in range(d - 1)])
             for j, n in enumerate(shape[1:])]
    for k in range(shape[0] - 1):
        nxt = g[0] * grid[k]
        if k:
            nxt = nxt + m_mat[0, 0] * math.sqrt(k) * grid[k - 1]
        for j in range(1, d):
            if m_mat[0, j] != 0:
                nxt = nxt + m_mat[0, j] * roots[j - 1] * _shift(grid[k], j - 1)
        grid[k + 1] = nxt / math.sqrt(k + 1)
    return grid


def _clean_probs(raw: np.ndarray) -> np.ndarray:
    p = np.real(raw)
    if np.min(p) < -NEG_CLAMP:
        raise TruncationError(f"negative photon probability {np.min(p):.3e}: recursion lost accuracy")
    return np.where(p < 0, 0.0, p)


def _tail(probs: np.ndarray) -> float:
    return max(1.0 - float(np.sum(probs)), 0.0)


def _initial_cutoff(nbar: float) -> int:
    return int(math.ceil(10 * (1 + nbar)))


def density_matrix(state: GaussianState, cutoff: int) -> np.ndarray:
    """Exact Fock matrix elements ``<m|rho|n>`` for ``m, n < cutoff`` of a single-mode state."""
    if state.n_modes != 1:
        raise UnsupportedError("density_matrix is implemented for single-mode states")
    m_mat, g, k0 = _generating_form(state)
    return _hermite_grid(m_mat, g, k0, (cutoff, cutoff))


def photon_number_distribution(state: GaussianState, target_tail: float = 1e-12,
                               cutoff: int | None = None, max_cutoff: int = MAX_CUTOFF) -> PhotonNumberDistribution:
    """Photon-number distribution of a single-mode Gaussian state.

    The cutoff starts at ``ceil(10 (1 + nbar))`` and doubles until the missing
    probability mass is below ``target_tail``. Passing ``cutoff`` fixes it and
    simply reports the tail.
    """
    if target_tail <= 0:
        raise ValueError("target_tail must be positive")
    if state.n_modes != 1:
        raise UnsupportedError("photon_number_distribution expects a single-mode state")
    m_mat, g, k0 = _generating_form(state)
    if cutoff is not None:
        rho = _hermite_grid(m_mat, g, k0, (cutoff, cutoff))
        probs = _clean_probs(np.diagonal(rho))
        return PhotonNumberDistribution(probs, _tail(probs))
    k = min(_initial_cutoff(mean_photon_number(state)), max_cutoff)
    while True:
        rho = _hermite_grid(m_mat, g, k0, (k, k))
        probs = _clean_probs(np.diagonal(rho))
        tail = _tail(probs)
        if tail <= target_tail:
            return PhotonNumberDistribution(probs, tail)
        if k >= max_cutoff:
            raise TruncationError(f"tail {tail:.2e} above target {target_tail:.1e} at cutoff {k}")
        k = min(2 * k, max_cutoff)


def fock_amplitudes(state: GaussianState, cutoffs) -> np.ndarray:
    """Fock amplitudes ``<k|psi>`` (up to a global phase) of a pure Gaussian state."""
    if not state.is_pure(1e-6):
        raise UnsupportedError("amplitudes exist only for pure states; use fock_oracle_density_matrix")
    n = state.n_modes
    m_mat, g, k0 = _generating_form(state)
    cross = np.max(np.abs(m_mat[:n, n:]))
    if cross > 1e-6:
        raise UnsupportedError(f"generating function does not factorise (|M_uv| = {cross:.2e})")
    return _hermite_grid(m_mat[:n, :n], g[:n], math.sqrt(k0), tuple(cutoffs))


def joint_photon_number_distribution(state: GaussianState, cutoffs=None, target_tail: float = 1e-10,
                                     max_cutoff: int = 400) -> JointPhotonNumberDistribution:
    """Joint photon statistics ``p_{n1 n2 ...} = |<n1, n2, ...|psi>|^2`` of a pure zero-mean state.

    With ``cutoffs=None`` every per-mode cutoff starts at ``ceil(10 (1 + nbar_i))`` and
    doubles (capped at ``max_cutoff``) until the missing mass is below ``target_tail``.
    """
    if not state.is_pure(1e-6):
        raise UnsupportedError("joint distribution needs a pure state; mixed states go through the oracle")
    if np.max(np.abs(state.mean)) > 1e-12:
        raise UnsupportedError("joint distribution is implemented for zero-mean states")
    if cutoffs is not None:
        amps = fock_amplitudes(state, cutoffs)
        probs = _clean_probs(np.abs(amps) ** 2)
        return JointPhotonNumberDistribution(probs, _tail(probs), amps)
    nbar = np.atleast_1d(mean_photon_number(state))
    ks = [min(_initial_cutoff(x), max_cutoff) for x in nbar]
    while True:
        amps = fock_amplitudes(state, ks)
        probs = _clean_probs(np.abs(amps) ** 2)
        tail = _tail(probs)
        if tail <= target_tail or all(k >= max_cutoff for k in ks):
            return JointPhotonNumberDistribution(probs, tail, amps)
        ks = [min(2 * k, max_cutoff) for k in ks]


def shannon_entropy(dist) -> float:
    """``-sum p ln p`` over the non-zero entries, in nats."""
    p = np.asarray(getattr(dist, "probs", dist), dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_uncertainty(dist) -> float:
    """Bound on the entropy carried by the truncated tail: ``-t ln t + t (K + ln K)``."""
    t = float(dist.tail_bound)
    if t <= 0:
        return 0.0
    k = float(np.max(np.shape(dist.probs)))
    return -t * math.log(t) + t * (k + math.log(k))


# --- truncated-operator oracle -------------------------------------------------


def _ladder(d: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, d)), 1, format="csr", dtype=complex)


def _mode_ops(n: int, d: int):
    a1 = _ladder(d)
    eye = sp.identity(d, format="csr", dtype=complex)
    ops = []
    for i in range(n):
        mats = [eye] * n
        mats[i] = a1
        op = mats[0]
        for m in mats[1:]:
            op = sp.kron(op, m, format="csr")
        ops.append(op)
    return ops


def _quadratures(n: int, d: int):
    ops = _mode_ops(n, d)
    rs = []
    for a in ops:
        ad = a.conj().T
        rs.append((a + ad) / math.sqrt(2))
        rs.append((a - ad) / (1j * math.sqrt(2)))
    return ops, rs


def fock_oracle_density_matrix(state: GaussianState, cutoff: int, pad: int | None = None) -> np.ndarray:
    """Density matrix in the truncated Fock basis built from truncated operators.

    ``rho = D(alpha) U_O U_P nu U_P^dag U_O^dag D(alpha)^dag`` where ``nu`` is the
    product thermal state of the Williamson form, ``U_P`` exponentiates the quadratic
    generator of the positive symplectic factor, ``U_O`` the passive generator
    ``a^dag h a`` of the orthogonal factor, and ``D`` the displacement. Everything is
    computed in a padded space of ``cutoff + pad`` levels per mode and then cropped.
    Basis ordering is mode-major (``|n_1 n_2 ...>``, last mode fastest).
    """
    n = state.n_modes
    if n > 2:
        raise UnsupportedError("oracle supports one or two modes")
    nbar = np.max(np.atleast_1d(mean_photon_number(state)))
    if cutoff < 10 * (1 + nbar) - 1e-9:
        raise TruncationError(f"cutoff {cutoff} below 10 (1 + nbar) = {10 * (1 + nbar):.1f}")
    if pad is None:
        pad = cutoff if n == 1 else max(cutoff // 2, 10)
    d = cutoff + pad
    ops, rs = _quadratures(n, d)
    dim = d ** n

    nu, symp = williamson(state.cov)
    orth, pos = la.polar(symp)
    lam, vec = np.linalg.eigh((pos + pos.T) / 2)
    log_pos = vec @ np.diag(np.log(lam)) @ vec.T
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    h_pos = -omega @ log_pos
    h_pos = (h_pos + h_pos.T) / 2
    gen_p = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(2 * n):
        for j in range(2 * n):
            if abs(h_pos[i, j]) > 1e-15:
                gen_p = gen_p + 0.5 * h_pos[i, j] * (rs[i] @ rs[j])

    u_mat = orth[0::2, 0::2] + 1j * orth[1::2, 0::2]
    ev, evec = np.linalg.eig(u_mat)
    h_pass = -evec @ np.diag(np.angle(ev)) @ np.linalg.inv(evec)
    h_pass = (h_pass + h_pass.conj().T) / 2
    gen_o = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            if abs(h_pass[i, j]) > 1e-15:
                gen_o = gen_o + h_pass[i, j] * (ops[i].conj().T @ ops[j])

    alpha = (state.mean[0::2] + 1j * state.mean[1::2]) / math.sqrt(2)
    gen_d = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        gen_d = gen_d + alpha[i] * ops[i].conj().T - np.conj(alpha[i]) * ops[i]

    nth = (nu - 1) / 2
    weights1 = [np.array([1.0] + [0.0] * (d - 1)) if x < 1e-14 else
                (x / (1 + x)) ** np.arange(d) / (1 + x) for x in nth]
    weights = weights1[0]
    for w in weights1[1:]:
        weights = np.kron(weights, w)
    cols = np.nonzero(weights > 1e-17)[0]
    block = np.zeros((dim, cols.size), dtype=complex)
    block[cols, np.arange(cols.size)] = 1.0
    block = expm_multiply(-1j * gen_p, block)
    block = expm_multiply(-1j * gen_o, block)
    if np.any(alpha != 0):
        block = expm_multiply(gen_d, block)

    keep = np.ravel_multi_index(np.indices((cutoff,) * n).reshape(n, -1), (d,) * n)
    cropped = block[keep]
    rho = (cropped * weights[cols]) @ cropped.conj().T
    deficit = 1.0 - float(np.real(np.trace(rho)))
    if deficit > 1e-4:
        raise TruncationError(f"oracle trace deficit {deficit:.2e} exceeds 1e-4 at cutoff {cutoff}")
    return rho


def fock_moments(rho: np.ndarray, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """First moments and covariance matrix of a truncated Fock density matrix."""
    d = round(rho.shape[0] ** (1 / n_modes))
    _, rs = _quadratures(n_modes, d)
    mean = np.array([np.real(np.trace(r @ rho)) for r in rs])
    cov = np.empty((2 * n_modes, 2 * n_modes))
    for i, ri in enumerate(rs):
        for j, rj in enumerate(rs):
            anti = ri @ rj + rj @ ri
            cov[i, j] = np.real(np.trace(anti @ rho)) - 2 * mean[i] * mean[j]
    return mean, cov
