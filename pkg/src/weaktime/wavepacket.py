"""Gaussian incident packets in the energy representation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicalDomainError
from .numerics import QuadratureSpec, integrate
from .scattering import Units, transmission_reflection

__all__ = [
    "GaussianPacket",
    "momentum_amplitude",
    "energy_amplitude",
    "energy_amplitude_derivative",
    "energy_window",
    "packet_quadrature",
    "transmission_probability",
]

# packets with p/sigma below this have a non-negligible left-moving tail
MIN_MOMENTUM_RATIO = 5.0
WINDOW_SIGMAS = 8.0


@dataclass(frozen=True)
class GaussianPacket:
    """Right-moving Gaussian packet, centred at ``x0`` at time zero.

    ``x0`` defaults to ``-10 hbar / sigma`` capped at ``-1e4``, i.e. ten
    spatial widths to the left of the origin for moderate sigma.
    """

    momentum: float
    sigma: float
    x0: float | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.momentum > 0 and np.isfinite(self.momentum)):
            raise ValueError("packet momentum must be positive")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError("packet width sigma must be positive")
        if self.momentum / self.sigma < MIN_MOMENTUM_RATIO:
            raise ValueError(
                f"momentum/sigma = {self.momentum / self.sigma:.3g} < {MIN_MOMENTUM_RATIO:g}; "
                "packet would contain left-moving components"
            )
        if self.x0 is None:
            object.__setattr__(self, "x0", max(-10.0 * self.hbar / self.sigma, -1.0e4))
        if not (self.x0 < 0 and np.isfinite(self.x0)):
            raise ValueError("packet must start to the left of the barrier (x0 < 0)")

    @property
    def spatial_width(self) -> float:
        return self.hbar / (2.0 * self.sigma)

    @property
    def positive_mass(self) -> float:
        """Probability carried by p > 0 before renormalisation."""
        return 0.5 * math.erfc(-self.momentum / (self.sigma * math.sqrt(2.0)))


def momentum_amplitude(packet: GaussianPacket, p):
    """phi(p), unit-normalised over p > 0 and zero for p <= 0."""
    p = np.asarray(p, dtype=float)
    s = packet.sigma
    amp = (2.0 * np.pi * s * s) ** -0.25 * np.exp(-((p - packet.momentum) ** 2) / (4.0 * s * s))
    amp = amp / math.sqrt(packet.positive_mass)
    return np.where(p > 0, amp, 0.0)


def energy_amplitude(packet: GaussianPacket, E, units: Units = Units()):
    """<E,+|Psi> = sqrt(M/p_E) phi(p_E) exp(-i p_E x0 / hbar)."""
    E = np.asarray(E, dtype=float)
    if np.any(~(E > 0)):
        raise PhysicalDomainError("energy must be positive")
    p = np.sqrt(2.0 * units.mass * E)
    return np.sqrt(units.mass / p) * momentum_amplitude(packet, p) * np.exp(
        -1j * p * packet.x0 / units.hbar
    )


def energy_amplitude_derivative(packet: GaussianPacket, E, units: Units = Units()):
    """d<E,+|Psi>/dE in closed form."""
    psi = energy_amplitude(packet, E, units)
    p = np.sqrt(2.0 * units.mass * np.asarray(E, dtype=float))
    dlog_dp = -0.5 / p - (p - packet.momentum) / (2.0 * packet.sigma**2) - 1j * packet.x0 / units.hbar
    return psi * dlog_dp * units.mass / p


def energy_window(packet: GaussianPacket, units: Units = Units()):
    """Energies holding all but ~1e-15 of the packet."""
    m = units.mass
    lo_p = packet.momentum - WINDOW_SIGMAS * packet.sigma
    hi_p = packet.momentum + WINDOW_SIGMAS * packet.sigma
    lo = max(1e-12, lo_p * lo_p / (2.0 * m)) if lo_p > 0 else 1e-12
    return lo, hi_p * hi_p / (2.0 * m)


def packet_quadrature(packet: GaussianPacket, units: Units = Units(), *, rtol=1e-8,
                      max_panels=4000, x=0.0, atol=0.0) -> QuadratureSpec:
    """Quadrature over the packet window, paneled for exp(+-2 i p_E x / hbar).

    The phase 2 p_E |x| / hbar changes by 2 M |x| / (hbar p_E) per unit
    energy, so panels of width pi hbar p_min / (4 M |x|) keep it below
    pi/2 per panel.
    """
    lo, hi = energy_window(packet, units)
    max_width = None
    if x != 0.0:
        p_min = math.sqrt(2.0 * units.mass * lo)
        max_width = math.pi * units.hbar * p_min / (4.0 * units.mass * abs(x))
    return QuadratureSpec(lo, hi, rtol=rtol, max_panels=max_panels, atol=atol, max_width=max_width)


def transmission_probability(packet: GaussianPacket, barrier, units: Units = Units(),
                             spec: QuadratureSpec | None = None) -> float:
    """T = integral of |t(E)|^2 |<E,+|Psi>|^2 over energy."""
    spec = spec or packet_quadrature(packet, units)

    def f(E):
        t, _ = transmission_reflection(barrier, E, units)
        return np.abs(t) ** 2 * np.abs(energy_amplitude(packet, E, units)) ** 2

    T = integrate(f, spec).real
    return min(max(T, 0.0), 1.0)
