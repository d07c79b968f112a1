"""State families: two-mode normal form, STS/MTS, thresholds, sampling and the three-mode interlinked state."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import GaussianState, _raw_symplectic_spectrum, is_physical, is_separable_ppt
from .errors import PhysicalityError

P_MAT = np.diag([1.0, -1.0])


class StateClass(str, enum.Enum):
    STS = "STS"
    MTS = "MTS"
    GENERIC = "generic"


@dataclass(frozen=True)
class NormalFormParams:
    """Two-mode normal form: ``sigma_A = a 1``, ``sigma_B = b 1``, ``sigma_AB = diag(c1, c2)``."""

    a: float
    b: float
    c1: float
    c2: float

    @property
    def state_class(self) -> StateClass:
        if math.isclose(self.c1, -self.c2, abs_tol=1e-14):
            return StateClass.STS
        if math.isclose(self.c1, self.c2, abs_tol=1e-14):
            return StateClass.MTS
        return StateClass.GENERIC

    @property
    def c(self) -> float:
        return abs(self.c1) if self.state_class is not StateClass.GENERIC else max(abs(self.c1), abs(self.c2))

    def cov(self) -> np.ndarray:
        a, b = self.a * np.eye(2), self.b * np.eye(2)
        ab = np.diag([self.c1, self.c2])
        return np.block([[a, ab], [ab, b]])

    @classmethod
    def sts(cls, a: float, c: float, b: float | None = None) -> "NormalFormParams":
        return cls(a, a if b is None else b, c, -c)

    @classmethod
    def mts(cls, a: float, c: float, b: float | None = None) -> "NormalFormParams":
        return cls(a, a if b is None else b, c, c)


def normal_form_state(p: NormalFormParams, tol: float = 1e-9) -> GaussianState:
    """Zero-mean two-mode state in normal form."""
    if p.a < 1 or p.b < 1:
        raise PhysicalityError(f"local variances must be >= 1 (a={p.a}, b={p.b})")
    cov = p.cov()
    if not is_physical(cov, tol):
        det_x, det_p = p.a * p.b - p.c1 ** 2, p.a * p.b - p.c2 ** 2
        delta = p.a ** 2 + p.b ** 2 + 2 * p.c1 * p.c2
        raise PhysicalityError(
            f"normal form ({p.a}, {p.b}, {p.c1}, {p.c2}) is unphysical: need ab - c1^2 > 0 "
            f"({det_x:.4g}), ab - c2^2 > 0 ({det_p:.4g}) and 1 + det(sigma) >= a^2 + b^2 + 2 c1 c2 "
            f"({1 + det_x * det_p:.6g} vs {delta:.6g})")
    return GaussianState(mean=np.zeros(4), cov=cov, tol=tol)


def sts_from_physical_params(n_thermal: float, r: float) -> NormalFormParams:
    """Symmetric STS with ``a = b = (1+2N) cosh 2r`` and ``c1 = -c2 = (1+2N) sinh 2r``."""
    if n_thermal < 0 or r < 0:
        raise ValueError("N and r must be non-negative")
    k = 1 + 2 * n_thermal
    return NormalFormParams.sts(k * math.cosh(2 * r), k * math.sinh(2 * r))


def thresholds(a: float, b: float | None = None, symmetric: bool | None = None) -> tuple[float, float]:
    """Physicality and separability thresholds ``(c_phys, c_sep)`` on ``|c|`` for STS.

    Symmetric (``a = b``): ``(sqrt(a^2 - 1), a - 1)``; otherwise
    ``(sqrt(ab - 1 - |a - b|), sqrt(ab + 1 - a - b))``.
    """
    if b is None:
        b = a
    if symmetric is None:
        symmetric = a == b
    if a < 1 or b < 1:
        raise ValueError("a and b must be >= 1")
    if symmetric:
        if a != b:
            raise ValueError("symmetric thresholds need a == b")
        return math.sqrt(max(a * a - 1, 0.0)), a - 1
    return math.sqrt(max(a * b - 1 - abs(a - b), 0.0)), math.sqrt(max(a * b + 1 - a - b, 0.0))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_normal_form(rng_seed, a_range=(1.0, 5.0), b_range=None, state_class: str = "STS",
                       size: int | None = None):
    """Uniform samples over the physical region of a normal-form family.

    ``(a, c)`` (or ``(a, b, c)``, or ``(a, b, c1, c2)``) are drawn uniformly in a
    bounding box and rejected when unphysical, which leaves them uniform over the
    physical region. STS/MTS samples have ``c >= 0``. With ``b_range=None`` the
    family is symmetric (``b = a``).

    Returns one ``NormalFormParams`` or, with ``size``, a list of them.
    """
    cls = StateClass(state_class)
    rng = _rng(rng_seed)
    a_lo, a_hi = a_range
    symmetric = b_range is None
    b_lo, b_hi = (a_lo, a_hi) if symmetric else b_range
    if not (1 <= a_lo <= a_hi) or not (1 <= b_lo <= b_hi):
        raise ValueError("ranges must lie within [1, inf) and be non-empty")
    c_box = math.sqrt(a_hi * b_hi)
    out = []
    n = 1 if size is None else size
    while len(out) < n:
        a = rng.uniform(a_lo, a_hi)
        b = a if symmetric else rng.uniform(b_lo, b_hi)
        if cls is StateClass.GENERIC:
            c1, c2 = rng.uniform(-c_box, c_box, size=2)
            p = NormalFormParams(a, b, c1, c2)
        else:
            c = rng.uniform(0.0, c_box)
            p = NormalFormParams.sts(a, c, b) if cls is StateClass.STS else NormalFormParams.mts(a, c, b)
        if is_physical(p.cov(), 0.0):
            out.append(p)
    return out[0] if size is None else out


def _feasible(a: float, b: float, c1: float, c2: float) -> bool:
    cov = NormalFormParams(a, b, c1, c2).cov()
    if np.linalg.eigvalsh(cov)[0] <= 0:
        return False
    return _raw_symplectic_spectrum(cov)[0] >= 1.0


def _ray_length(a: float, b: float, angle: float, tol: float) -> float:
    direction = np.array([math.cos(angle), math.sin(angle)])
    lo, hi = 0.0, math.sqrt(a * b) / max(abs(direction[0]), abs(direction[1]))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _feasible(a, b, *(mid * direction)):
            lo = mid
        else:
            hi = mid
    return lo


def max_c1_on_physicality(a: float, b: float, tol: float = 1e-8) -> tuple[tuple[float, float], tuple[float, float]]:
    """Two boundary points of the physical region in the ``(c1, c2)`` plane.

    Returns ``((c1_sep, 0), (c1_max, c2_at_max))``: the separable boundary state with
    ``c2 = 0`` and ``|c1| = sqrt((a^2-1)(b^2-1)/(ab))``, and the state on the
    physicality surface with the largest ``|c1|``, found by golden-section search
    over the direction in the ``(c1, c2)`` plane with bisection along each ray.
    """
    if a <= 1 or b <= 1:
        raise ValueError("a and b must exceed 1")
    c1_sep = math.sqrt((a * a - 1) * (b * b - 1) / (a * b))

    def c1_of(angle: float) -> float:
        return _ray_length(a, b, angle, tol * 1e-2) * math.cos(angle)

    inv_phi = (math.sqrt(5) - 1) / 2
    lo, hi = -math.pi / 2, 0.0
    x1, x2 = hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo)
    f1, f2 = c1_of(x1), c1_of(x2)
    while hi - lo > 1e-10:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = c1_of(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = c1_of(x1)
    angle = (lo + hi) / 2
    t = _ray_length(a, b, angle, tol * 1e-2)
    return (c1_sep, 0.0), (t * math.cos(angle), t * math.sin(angle))


def is_entangled(p: NormalFormParams) -> bool:
    return not is_separable_ppt(normal_form_state(p))


@dataclass(frozen=True)
class InterlinkedParams:
    n_b: float
    n_c: float

    def __post_init__(self):
        if self.n_b < 0 or self.n_c < 0:
            raise ValueError("photon numbers must be non-negative")

    @property
    def n_a(self) -> float:
        return self.n_b + self.n_c


def interlinked_three_mode(p: InterlinkedParams) -> GaussianState:
    """Pure three-mode state generated by interlinked bilinear interactions.

    Modes ``(A, B, C)`` with ``sigma_k = (2N_k + 1) 1``; A is two-mode-squeezed with
    B and C (blocks ``2 sqrt(N_k (N_A + 1)) P``) while B and C are beam-splitter
    correlated (block ``2 sqrt(N_B N_C) 1``).
    """
    na, nb, nc = p.n_a, p.n_b, p.n_c
    eye = np.eye(2)
    s_ab = 2 * math.sqrt(nb * (na + 1)) * P_MAT
    s_ac = 2 * math.sqrt(nc * (na + 1)) * P_MAT
    s_bc = 2 * math.sqrt(nb * nc) * eye
    cov = np.block([
        [(2 * na + 1) * eye, s_ab, s_ac],
        [s_ab, (2 * nb + 1) * eye, s_bc],
        [s_ac, s_bc, (2 * nc + 1) * eye],
    ])
    return GaussianState(mean=np.zeros(6), cov=cov)


def interlinked_fock_amplitudes(p: InterlinkedParams, cutoff: int) -> dict[tuple[int, int, int], float]:
    """Non-zero Fock amplitudes ``<p+q, p, q|xi>`` with ``p + q < cutoff``."""
    if cutoff < 10 * (1 + p.n_a):
        raise ValueError(f"cutoff must be at least 10 (1 + N_A) = {10 * (1 + p.n_a):.1f}")
    na = p.n_a
    lb = 0.5 * math.log(p.n_b / (1 + na)) if p.n_b > 0 else None
    lc = 0.5 * math.log(p.n_c / (1 + na)) if p.n_c > 0 else None
    amps = {}
    for n in range(cutoff):
        for i in range(n + 1):
            j = n - i
            if (i and lb is None) or (j and lc is None):
                continue
            log_amp = (-0.5 * math.log1p(na) + (i * lb if i else 0.0) + (j * lc if j else 0.0)
                       + 0.5 * (math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(j + 1)))
            amps[(n, i, j)] = math.exp(log_amp)
    return amps
