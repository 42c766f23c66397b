"""Simulated weak measurements on finite-dimensional systems.

A pointer with coordinate q and momentum p couples to the system through
H_I = lambda q A for a time tau; the pointer Hamiltonian is taken to be
zero. Two independent routes give the pointer shift:

* ``first_order``: the linear-response expressions built from the
  time-sliced operator F = int_0^tau U_S^dag A U_S dt and the pointer
  moments.
* ``simulate_pointer``: exact joint evolution on a q grid. Because H_I
  commutes with q, each grid point evolves the system under
  H_S + lambda q A independently; the pointer momentum is read off with an
  FFT derivative. Shrinking lambda and extrapolating recovers the weak limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RarePostselectionError, WeaknessError, WeaknessWarning

__all__ = [
    "FiniteSystem",
    "DetectorState",
    "CouplingConfig",
    "two_level_system",
    "level_projector",
    "time_integral",
    "heisenberg",
    "first_order",
    "weak_value_unconditional",
    "weak_value_conditional",
    "simulate_pointer",
    "extrapolate_to_weak",
    "weakness",
    "MIN_POSTSELECTION",
]

MIN_POSTSELECTION = 1e-6
WEAKNESS_LIMIT = 0.1


def _hermitian(m, name):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.allclose(m, m.conj().T, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise ValueError(f"{name} must be Hermitian")
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    """System Hamiltonian, measured observable and initial density matrix."""

    H: np.ndarray
    A: np.ndarray
    rho: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        H = _hermitian(self.H, "H")
        A = _hermitian(self.A, "A")
        rho = _hermitian(self.rho, "rho")
        if not (H.shape == A.shape == rho.shape):
            raise ValueError("H, A and rho must have the same dimension")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ValueError("rho must have unit trace")
        if np.linalg.eigvalsh(rho).min() < -1e-12:
            raise ValueError("rho must be positive semidefinite")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def with_observable(self, A) -> "FiniteSystem":
        return FiniteSystem(self.H, A, self.rho, self.hbar)

    def propagator(self, t: float) -> np.ndarray:
        vals, vecs = np.linalg.eigh(self.H)
        return (vecs * np.exp(-1j * vals * t / self.hbar)) @ vecs.conj().T


@dataclass(frozen=True)
class DetectorState:
    """First and second moments of the pointer.

    ``cov`` is the symmetrised covariance Re<qp> - <q><p>; the coefficient
    multiplying the commutator term in conditional averages is ``-cov``.
    """

    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    cov: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.var_q > 0 and self.var_p > 0):
            raise ValueError("pointer variances must be positive")
        # Robertson-Schroedinger; implies var_q var_p >= hbar^2 / 4
        if self.var_q * self.var_p - self.cov**2 < 0.25 * self.hbar**2 * (1.0 - 1e-12):
            raise ValueError("pointer moments violate the uncertainty relation")

    @classmethod
    def gaussian(cls, var_q: float, chirp: float = 0.0, mean_q: float = 0.0,
                 mean_p: float = 0.0, hbar: float = 1.0) -> "DetectorState":
        """Pure Gaussian pointer exp(-(q-q0)^2/(4 var_q) + i chirp (q-q0)^2 + i p0 q/hbar)."""
        var_p = hbar**2 / (4.0 * var_q) + (2.0 * hbar * chirp) ** 2 * var_q
        return cls(mean_q, mean_p, var_q, var_p, 2.0 * hbar * chirp * var_q, hbar)

    @property
    def coefficient(self) -> float:
        """<q><p> - Re<qp>."""
        return -self.cov

    @property
    def chirp(self) -> float:
        return self.cov / (2.0 * self.hbar * self.var_q)

    @property
    def is_pure_gaussian(self) -> bool:
        excess = self.var_q * self.var_p - self.cov**2 - 0.25 * self.hbar**2
        return abs(excess) <= 1e-9 * self.var_q * self.var_p


@dataclass(frozen=True)
class CouplingConfig:
    strength: float
    duration: float

    def __post_init__(self):
        if not (self.strength > 0 and np.isfinite(self.strength)):
            raise ValueError("coupling strength must be positive")
        if not (self.duration > 0 and np.isfinite(self.duration)):
            raise ValueError("measurement duration must be positive")


def two_level_system(omega: float, coupling: complex, observed_level: int = 0,
                     initial_level: int = 0, hbar: float = 1.0) -> FiniteSystem:
    """Driven two-level system in the basis (|0>, |1>), |0> the lower level."""
    v = complex(coupling)
    H = np.array([[-0.5 * hbar * omega, np.conj(v)], [v, 0.5 * hbar * omega]], dtype=complex)
    rho = level_projector(initial_level)
    return FiniteSystem(H, level_projector(observed_level), rho, hbar)


def level_projector(level: int, dim: int = 2) -> np.ndarray:
    P = np.zeros((dim, dim), dtype=complex)
    P[level, level] = 1.0
    return P


def time_integral(system: FiniteSystem, duration: float, slices: int = 1000,
                  rtol: float = 1e-7, max_slices: int = 1 << 16) -> np.ndarray:
    """F = int_0^duration U_S^dag(t) A U_S(t) dt by the midpoint rule.

    The slice count starts at ``slices`` (at least 1000) and doubles until
    two successive sums agree to ``rtol``.
    """
    vals, vecs = np.linalg.eigh(system.H)
    A_eig = vecs.conj().T @ system.A @ vecs
    gap = (vals[:, None] - vals[None, :]) / system.hbar

    def midpoint(n):
        h = duration / n
        t = (np.arange(n) + 0.5) * h
        # in the eigenbasis: A_ij exp(i (E_i - E_j) t / hbar)
        phases = np.exp(1j * gap[None, :, :] * t[:, None, None]).sum(axis=0)
        return vecs @ (A_eig * phases * h) @ vecs.conj().T

    n = max(int(slices), 1000)
    F = midpoint(n)
    while n < max_slices:
        F2 = midpoint(2 * n)
        if np.abs(F2 - F).max() <= rtol * max(np.abs(F2).max(), 1e-300):
            return F2
        F, n = F2, 2 * n
    return F


def heisenberg(system: FiniteSystem, op, t: float) -> np.ndarray:
    U = system.propagator(t)
    return U.conj().T @ np.asarray(op, dtype=complex) @ U


@dataclass(frozen=True)
class FirstOrder:
    """Linear-response pieces of a (possibly postselected) pointer shift.

    ``symmetric`` and ``commutator`` are times (they integrate A over the
    measurement); the measured time is symmetric + (2/hbar) coef * commutator.
    """

    probability: float
    symmetric: float
    commutator: float


def first_order(system: FiniteSystem, duration: float, postselect=None,
                post_delay: float = 0.0, slices: int = 1000) -> FirstOrder:
    F = time_integral(system, duration, slices)
    rho = system.rho
    if postselect is None:
        return FirstOrder(1.0, float(np.trace(rho @ F).real), 0.0)
    P = heisenberg(system, postselect, duration + post_delay)
    W = float(np.trace(rho @ P).real)
    if W <= MIN_POSTSELECTION:
        raise RarePostselectionError(
            f"postselection probability {W:.3g} is below {MIN_POSTSELECTION:g}"
        )
    sym = np.trace(rho @ (P @ F + F @ P)).real / (2.0 * W)
    comm = (np.trace(rho @ (P @ F - F @ P)) / (2j * W)).real
    return FirstOrder(W, float(sym), float(comm))


def weakness(system: FiniteSystem, det: DetectorState, cfg: CouplingConfig) -> float:
    """lambda tau sqrt(var q) ||A|| / hbar."""
    norm = np.abs(np.linalg.eigvalsh(system.A)).max()
    return cfg.strength * cfg.duration * math.sqrt(det.var_q) * norm / system.hbar


def _measured(fo: FirstOrder, det: DetectorState, hbar: float) -> float:
    return fo.symmetric + 2.0 / hbar * det.coefficient * fo.commutator


def _check_weakness(system, det, cfg, postselect, post_delay, first):
    eps = weakness(system, det, cfg)
    if eps <= WEAKNESS_LIMIT:
        return
    warnings.warn(
        f"coupling parameter {eps:.3g} exceeds {WEAKNESS_LIMIT:g}; weak-limit formulas may not apply",
        WeaknessWarning,
        stacklevel=3,
    )
    if not det.is_pure_gaussian:
        return
    exact = simulate_pointer(system, det, cfg, postselect, post_delay).time
    if abs(exact - first) > 0.1 * abs(first):
        raise WeaknessError(
            f"finite-coupling pointer shift {exact:.6g} deviates from the weak limit "
            f"{first:.6g} by more than 10%"
        )


def weak_value_unconditional(system: FiniteSystem, det: DetectorState, cfg: CouplingConfig,
                             slices: int = 1000) -> float:
    """(<p>_0 - <p>) / (lambda tau) to first order in lambda."""
    fo = first_order(system, cfg.duration, slices=slices)
    _check_weakness(system, det, cfg, None, 0.0, fo.symmetric)
    return fo.symmetric / cfg.duration


def weak_value_conditional(system: FiniteSystem, det: DetectorState, cfg: CouplingConfig,
                           postselect, post_delay: float = 0.0, slices: int = 1000) -> float:
    """Pointer shift per lambda tau on the subensemble passing ``postselect``.

    Postselection happens ``post_delay`` after the end of the coupling.
    """
    fo = first_order(system, cfg.duration, postselect, post_delay, slices)
    value = _measured(fo, det, system.hbar)
    _check_weakness(system, det, cfg, postselect, post_delay, value)
    return value / cfg.duration


@dataclass(frozen=True)
class PointerResult:
    """Exact pointer readout. ``time`` is (<p>_0 - <p>)/lambda."""

    strength: float
    time: float
    probability: float


def simulate_pointer(system: FiniteSystem, det: DetectorState, cfg: CouplingConfig,
                     postselect=None, post_delay: float = 0.0, points: int = 2048,
                     span: float = 12.0) -> PointerResult:
    """Exact joint evolution with a Gaussian pointer sampled on ``points`` q values."""
    if not det.is_pure_gaussian:
        raise ValueError("grid simulation needs a pure Gaussian pointer")
    hbar = system.hbar
    s = math.sqrt(det.var_q)
    q = det.mean_q + np.linspace(-span * s, span * s, points, endpoint=False)
    dq = q[1] - q[0]
    dqq = q - det.mean_q
    phi = (2.0 * np.pi * s * s) ** -0.25 * np.exp(
        -dqq**2 / (4.0 * s * s) + 1j * det.chirp * dqq**2 + 1j * det.mean_p * q / hbar
    )
    k = 2.0 * np.pi * np.fft.fftfreq(points, d=dq)

    def momentum(psi):
        # psi has shape (points, n); returns -i hbar d psi / dq
        return hbar * np.fft.ifft(k[:, None] * np.fft.fft(psi, axis=0), axis=0)

    p0_num = np.sum(np.conj(phi) * momentum(phi[:, None])[:, 0]).real
    p0 = p0_num / np.sum(np.abs(phi) ** 2)

    # exact evolution at each q under H_S + lambda q A
    Hq = system.H[None, :, :] + cfg.strength * q[:, None, None] * system.A[None, :, :]
    vals, vecs = np.linalg.eigh(Hq)
    phases = np.exp(-1j * vals * cfg.duration / hbar)
    U = np.einsum("qij,qj,qkj->qik", vecs, phases, vecs.conj())
    if post_delay:
        U = np.einsum("ij,qjk->qik", system.propagator(post_delay), U)
    B = np.eye(system.dim) if postselect is None else np.asarray(postselect, dtype=complex)

    wts, states = np.linalg.eigh(system.rho)
    num = 0.0
    den = 0.0
    for w, v in zip(wts, states.T):
        if w <= 1e-15:
            continue
        psi = np.einsum("qij,j->qi", U, v) * phi[:, None]
        Bpsi = psi @ B.T
        num += w * np.sum(np.conj(Bpsi) * momentum(psi)).real
        den += w * np.sum(np.conj(psi) * Bpsi).real
    norm = np.sum(np.abs(phi) ** 2)
    W = den / norm
    if postselect is not None and W <= MIN_POSTSELECTION:
        raise RarePostselectionError(
            f"postselection probability {W:.3g} is below {MIN_POSTSELECTION:g}"
        )
    p_after = num / den
    return PointerResult(cfg.strength, float((p0 - p_after) / cfg.strength), float(W))


def extrapolate_to_weak(system: FiniteSystem, det: DetectorState, cfg: CouplingConfig,
                        postselect=None, post_delay: float = 0.0, points: int = 2048):
    """Grid-simulated times at lambda, lambda/2, lambda/4 and their lambda -> 0 limit.

    The pointer shift is analytic in lambda, so two Richardson steps with
    ratio 2 remove the O(lambda) and O(lambda^2) terms.
    """
    runs = []
    for f in (1.0, 0.5, 0.25):
        c = CouplingConfig(cfg.strength * f, cfg.duration)
        runs.append(simulate_pointer(system, det, c, postselect, post_delay, points))
    v = [r.time for r in runs]
    r1 = 2.0 * v[1] - v[0]
    r2 = 2.0 * v[2] - v[1]
    return runs, (4.0 * r2 - r1) / 3.0
