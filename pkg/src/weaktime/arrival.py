"""Classical and quantum arrival-time distributions for a free particle.

The quantum object is the complex arrival probability
Pi_C = <P1 P2~(dt)> / dt, where P1 projects on x < X, P2 on x > X and
P2~(dt) is P2 evolved backwards over the detector resolution dt. The
operator Pi_+ = P1 P2~ / dt is not Hermitian and has no meaning on its own;
the physical outputs are the real pair (Pi1, Pi2) = (Re, Im) Pi_C and the
joint probability W(1, 2) assembled from them for a given detector.

Plane waves are normalised as <p1|p2> = 2 pi hbar delta(p1 - p2), so for a
state with momentum amplitude phi (unit norm in dp)
<Pi> = (2 pi hbar)^-1 iint phi*(p1) <p1|Pi|p2> phi(p2) dp1 dp2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import PhysicalDomainError, QuadratureError, ResolutionWarning
from .numerics import QuadratureSpec, erfc, integrate
from .scattering import Units

__all__ = [
    "PhaseSpaceDensity",
    "GaussianEnsemble",
    "MomentumAtoms",
    "ArrivalConfig",
    "ComplexArrival",
    "MomentumGaussian",
    "classical_arrival",
    "pi_matrix_element",
    "pi_minus_element",
    "flux_element",
    "arrival_distribution",
    "expectation",
    "flux_expectation",
    "resolution_bound",
]

# below this dimensionless half-separation the divided difference is
# replaced by its midpoint Taylor series (truncation ~ u^4)
_TAYLOR_SWITCH = 1e-3
PACKET_SIGMAS = 10.0
_BLOCK = 256


# --------------------------------------------------------------------------
# classical ensembles


@dataclass(frozen=True)
class PhaseSpaceDensity:
    """rho(x, p, t) >= 0 with unit integral over phase space.

    ``momentum_range`` bounds the support in p at the times of interest and
    is used as the integration window for the one-sided currents. The
    optional ``peak(x, t)`` returns (centre, width) of the momentum profile
    at fixed x; it lets the quadrature find profiles that sharpen with time.
    """

    density: Callable
    momentum_range: tuple
    mass: float = 1.0
    peak: Callable | None = None

    def __call__(self, x, p, t):
        return self.density(x, p, t)


def GaussianEnsemble(x0: float, momentum: float, sigma_x: float, sigma_p: float,
                     mass: float = 1.0, sigmas: float = 12.0) -> PhaseSpaceDensity:
    """Uncorrelated Gaussian ensemble at t = 0, moving freely afterwards."""
    if not (sigma_x > 0 and sigma_p > 0 and mass > 0):
        raise ValueError("widths and mass must be positive")

    def rho(x, p, t):
        p = np.asarray(p, dtype=float)
        xs = x - x0 - p * t / mass
        return np.exp(-0.5 * (xs / sigma_x) ** 2 - 0.5 * ((p - momentum) / sigma_p) ** 2) / (
            2.0 * np.pi * sigma_x * sigma_p
        )

    def peak(x, t):
        # at fixed x the profile in p is Gaussian with this centre and width
        a = t / mass
        prec = a * a / sigma_x**2 + 1.0 / sigma_p**2
        centre = (a * (x - x0) / sigma_x**2 + momentum / sigma_p**2) / prec
        return centre, 1.0 / math.sqrt(prec)

    span = sigmas * sigma_p
    return PhaseSpaceDensity(rho, (momentum - span, momentum + span), mass, peak)


@dataclass(frozen=True)
class MomentumAtoms:
    """Ensemble already localised at the arrival point with discrete momenta.

    ``atoms`` is a sequence of (p0, weight); the spatial factor is taken as
    the identity at X, so J+ = sum over p0 > 0 of weight p0 / m.
    """

    atoms: tuple
    mass: float = 1.0


def classical_arrival(rho, X: float, t: float, side: int = +1, rtol: float = 1e-10) -> float:
    """One-sided current J+ (side=+1) or J- (side=-1) at X and time t.

    J+ = int_0^inf (p/m) rho(X, p, t) dp counts arrivals from the left and
    J- = int_-inf^0 (|p|/m) rho(X, p, t) dp arrivals from the right. The
    normalisation over a time window is left to the caller.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if isinstance(rho, MomentumAtoms):
        return sum(w * abs(p0) / rho.mass for p0, w in rho.atoms if side * p0 > 0)
    lo, hi = rho.momentum_range
    lo, hi = (max(lo, 0.0), hi) if side > 0 else (lo, min(hi, 0.0))
    if hi <= lo:
        return 0.0
    spec = QuadratureSpec(lo, hi, rtol=rtol, atol=1e-300)
    breaks = ()
    if rho.peak is not None:
        c, w = rho.peak(X, t)
        breaks = [c + k * w for k in (-8, -3, 0, 3, 8)]
    val = integrate(lambda p: side * p / rho.mass * rho(X, p, t), spec, breakpoints=breaks)
    return float(val.real)


# --------------------------------------------------------------------------
# quantum matrix elements


@dataclass(frozen=True)
class ArrivalConfig:
    position: float
    resolution: float
    units: Units = Units()

    def __post_init__(self):
        if not (self.resolution > 0 and np.isfinite(self.resolution)):
            raise ValueError("resolution time must be positive")
        if not np.isfinite(self.position):
            raise ValueError("arrival point must be finite")


class ComplexArrival(NamedTuple):
    real: float
    imag: float

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)

    def joint_probability(self, coefficient: float, resolution: float, hbar: float = 1.0) -> float:
        """W(1, 2) for a detector with <q><p> - Re<qp> equal to ``coefficient``."""
        return self.real * resolution - 2.0 * resolution / hbar * coefficient * self.imag


def _g(p, a, s):
    # G(p) = exp(i a p^2) erfc(-p s)
    return np.exp(1j * a * p * p) * erfc(-p * s)


def _g_derivatives(c, a, s):
    """G'(c) and G'''(c), from G' = 2 i a p G + 2 s / sqrt(pi)."""
    G = _g(c, a, s)
    k = 2.0 * s / math.sqrt(math.pi)
    g1 = 2j * a * c * G + k
    g2 = 2j * a * G + 2j * a * c * g1
    g3 = 4j * a * g1 + 2j * a * c * g2
    return g1, g3


def pi_matrix_element(p1, p2, cfg: ArrivalConfig):
    """<p1|Pi_+|p2> for a free particle, elementwise over broadcast p1, p2.

    With a = dt / (2 m hbar), s = sqrt(i) sqrt(dt / (2 hbar m)) and
    G(p) = exp(i a p^2) erfc(-p s) the element is
    -(i hbar / 2 dt) exp(i (p2 - p1) X / hbar) exp(-i a p2^2)
    (G(p2) - G(p1)) / (p2 - p1). Close to the diagonal the divided
    difference is taken from a Taylor series about the midpoint, which at
    p1 = p2 gives the exact diagonal (p / 2m) erfc(-p s) +
    hbar exp(-i a p^2) / sqrt(2 pi i hbar m dt).
    """
    hbar, m = cfg.units.hbar, cfg.units.mass
    dt = cfg.resolution
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p1, p2 = np.broadcast_arrays(p1, p2)
    a = dt / (2.0 * m * hbar)
    s = np.exp(0.25j * np.pi) * math.sqrt(a)
    c = 0.5 * (p1 + p2)
    h = 0.5 * (p2 - p1)
    # G varies on the momentum scale min(1/sqrt(a), 1/(a|c|))
    u = np.abs(h) * np.maximum(math.sqrt(a), 2.0 * a * np.abs(c))
    near = u < _TAYLOR_SWITCH
    quotient = np.empty(p1.shape, dtype=complex)
    if np.any(near):
        g1, g3 = _g_derivatives(c[near], a, s)
        quotient[near] = g1 + h[near] ** 2 * g3 / 6.0
    far = ~near
    if np.any(far):
        # G depends on one momentum only: evaluate it once per distinct value
        values, index = np.unique(np.concatenate([p1[far], p2[far]]), return_inverse=True)
        g = _g(values, a, s)[index]
        n = index.size // 2
        quotient[far] = (g[n:] - g[:n]) / (2.0 * h[far])
    out = (-0.5j * hbar / dt) * np.exp(1j * (p2 - p1) * cfg.position / hbar) * np.exp(-1j * a * p2 * p2) * quotient
    return out if out.ndim else complex(out)


def pi_minus_element(p1, p2, cfg: ArrivalConfig):
    """<p1|P2 P1~(dt)|p2> / dt, the mirror image of Pi_+ under parity."""
    mirror = ArrivalConfig(-cfg.position, cfg.resolution, cfg.units)
    return pi_matrix_element(-np.asarray(p1, dtype=float), -np.asarray(p2, dtype=float), mirror)


def flux_element(p1, p2, cfg: ArrivalConfig):
    """<p1|J(X)|p2> = (p1 + p2) / 2m exp(i (p2 - p1) X / hbar)."""
    hbar, m = cfg.units.hbar, cfg.units.mass
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    return (p1 + p2) / (2.0 * m) * np.exp(1j * (p2 - p1) * cfg.position / hbar)


def resolution_bound(kinetic_energy: float, hbar: float = 1.0) -> float:
    """Smallest meaningful detector resolution, hbar / E_k."""
    if not (kinetic_energy > 0):
        raise PhysicalDomainError("kinetic energy must be positive")
    return hbar / kinetic_energy


# --------------------------------------------------------------------------
# packet averages


@dataclass(frozen=True)
class MomentumGaussian:
    """Free Gaussian packet, given by its momentum amplitude.

    phi(p) = (2 pi sigma^2)^(-1/4) exp(-(p - momentum)^2 / (4 sigma^2)
    - i p x0 / hbar - i p^2 t / (2 m hbar)), i.e. centred at x0 at time 0
    and observed at ``time``. Any sign of the mean momentum is allowed.
    """

    momentum: float
    sigma: float
    x0: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be positive")

    def amplitude(self, p, units: Units = Units()):
        p = np.asarray(p, dtype=float)
        s = self.sigma
        phase = p * self.x0 / units.hbar + p * p * self.time / (2.0 * units.mass * units.hbar)
        return (2.0 * np.pi * s * s) ** -0.25 * np.exp(-((p - self.momentum) ** 2) / (4.0 * s * s) - 1j * phase)

    def window(self):
        span = PACKET_SIGMAS * self.sigma
        return self.momentum - span, self.momentum + span

    def kinetic_energy(self, units: Units = Units()) -> float:
        return (self.momentum**2 + self.sigma**2) / (2.0 * units.mass)

    def wavefunction(self, x, units: Units = Units()):
        """psi(x, time) in closed form."""
        hbar, m = units.hbar, units.mass
        s2 = self.sigma**2
        z = 1.0 + 2j * s2 * self.time / (m * hbar)
        d = x - self.x0
        expo = (
            -(s2 * d * d) / (hbar * hbar * z)
            + 1j * self.momentum * d / (hbar * z)
            - 1j * self.momentum**2 * self.time / (2.0 * m * hbar * z)
        )
        return (2.0 * s2 / (np.pi * hbar * hbar)) ** 0.25 / np.sqrt(z) * np.exp(expo)


def _gl_nodes(lo, hi, panels, order):
    xs, ws = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xs[None, :]).ravel()
    weights = (half[:, None] * ws[None, :]).ravel()
    return nodes, weights


def expectation(element, packet: MomentumGaussian, cfg: ArrivalConfig, rtol: float = 1e-9,
                max_panels: int = 512) -> complex:
    """(2 pi hbar)^-1 iint phi*(p1) element(p1, p2) phi(p2) over +-10 sigma.

    Panels are sized so that the phase of the integrand turns by at most
    pi/4 per panel. That phase is stationary in p where the classical path
    x0 + p t / m crosses X, so its rate is set by the miss distance at the
    window edges plus the chirp exp(i a p^2) carried by the evolved
    projector. The panel count is doubled until two successive estimates
    agree to ``rtol``; rows are summed in blocks to bound memory.
    """
    units = cfg.units
    hbar, m = units.hbar, units.mass
    lo, hi = packet.window()
    a = cfg.resolution / (2.0 * m * hbar)
    miss = max(abs(packet.x0 + p * packet.time / m - cfg.position) for p in (lo, hi))
    rate = miss / hbar + 2.0 * a * max(abs(lo), abs(hi)) + math.sqrt(a)
    panels = max(4, int(math.ceil((hi - lo) * rate / (math.pi / 4))))
    previous = None
    while True:
        nodes, weights = _gl_nodes(lo, hi, panels, 16)
        v = packet.amplitude(nodes, units) * weights
        val = 0.0j
        for start in range(0, nodes.size, _BLOCK):
            rows = slice(start, start + _BLOCK)
            mat = element(nodes[rows, None], nodes[None, :], cfg)
            val += np.conj(v[rows]) @ (mat @ v)
        val /= 2.0 * np.pi * hbar
        if previous is not None and abs(val - previous) <= rtol * max(abs(val), 1e-300):
            return complex(val)
        if panels * 2 > max_panels:
            residual = abs(val - previous) if previous is not None else math.inf
            raise QuadratureError(complex(val), residual, panels)
        previous = val
        panels *= 2


def arrival_distribution(packet: MomentumGaussian, cfg: ArrivalConfig, rtol: float = 1e-9) -> ComplexArrival:
    """Pi_C = <Pi_+> split into its real and imaginary parts.

    Warns with ResolutionWarning when the resolution is below
    hbar / E_k, where the real part stops resembling an arrival density.
    """
    bound = resolution_bound(packet.kinetic_energy(cfg.units), cfg.units.hbar)
    if cfg.resolution < bound:
        warnings.warn(
            f"resolution {cfg.resolution:.3g} below hbar/E_k = {bound:.3g}",
            ResolutionWarning,
            stacklevel=2,
        )
    val = expectation(pi_matrix_element, packet, cfg, rtol)
    return ComplexArrival(val.real, val.imag)


def flux_expectation(packet: MomentumGaussian, cfg: ArrivalConfig) -> float:
    """<J(X)> = (hbar / m) Im(psi* dpsi/dx) from the closed-form wavefunction."""
    units = cfg.units
    hbar = units.hbar
    z = 1.0 + 2j * packet.sigma**2 * packet.time / (units.mass * hbar)
    psi = packet.wavefunction(cfg.position, units)
    dlog = (-2.0 * packet.sigma**2 * (cfg.position - packet.x0) / hbar + 1j * packet.momentum) / (hbar * z)
    return float(hbar / units.mass * abs(psi) ** 2 * dlog.imag)
