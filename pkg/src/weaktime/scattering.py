"""Barrier models, stationary scattering amplitudes and energy eigenfunctions.

Barriers occupy ``[0, L]`` (``L = 0`` for the delta spike). Amplitudes are
the closed-form matching solutions, vectorized over energy; the
piecewise transfer-matrix oracle in :mod:`weaktime.oracles` checks them.

Eigenfunctions are normalized to ``delta(E - E')``, so they carry the
prefactor ``sqrt(M / (2 pi hbar p_E))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NumericalError, PhysicalDomainError

__all__ = [
    "Units",
    "Free",
    "Delta",
    "Rectangular",
    "Barrier",
    "ScatteringAmplitudes",
    "AmplitudeOverflowError",
    "momentum_from_energy",
    "amplitudes",
    "transmission_reflection",
    "transmission_derivative",
    "eigenfunction",
]

# beyond this exp(kappa L) loses every significant digit of t
_MAX_OPACITY = 350.0


class AmplitudeOverflowError(NumericalError, OverflowError):
    """Rectangular barrier too opaque (kappa*L > 350) for double precision."""


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ValueError("hbar must be positive and finite")
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise ValueError("mass must be positive and finite")


@dataclass(frozen=True)
class Free:
    """No potential at all; t = 1, r = 0."""

    @property
    def width(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Delta:
    """V(x) = strength * delta(x)."""

    strength: float

    def __post_init__(self):
        if not (self.strength > 0 and np.isfinite(self.strength)):
            raise ValueError("delta barrier strength must be positive")

    @property
    def width(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Rectangular:
    """V(x) = height on [0, width], zero elsewhere."""

    height: float
    width: float

    def __post_init__(self):
        if not (self.height > 0 and np.isfinite(self.height)):
            raise ValueError("rectangular barrier height must be positive")
        if not (self.width > 0 and np.isfinite(self.width)):
            raise ValueError("rectangular barrier width must be positive")


Barrier = Union[Free, Delta, Rectangular]


@dataclass(frozen=True)
class ScatteringAmplitudes:
    t: complex
    r: complex
    E: float

    @property
    def transmission(self) -> float:
        return abs(self.t) ** 2

    @property
    def reflection(self) -> float:
        return abs(self.r) ** 2


def _check_energy(E):
    E = np.asarray(E, dtype=float)
    if np.any(~(E > 0)) or np.any(~np.isfinite(E)):
        raise PhysicalDomainError("energy must be positive and finite")
    return E


def momentum_from_energy(E, units: Units = Units()):
    """p_E = sqrt(2 M E); raises PhysicalDomainError for E <= 0."""
    E = _check_energy(E)
    p = np.sqrt(2.0 * units.mass * E)
    return float(p) if p.ndim == 0 else p


def _rect_parts(barrier: Rectangular, E, units: Units):
    """k, kappa, cosh(kappa L) and sinh(kappa L)/kappa for a rectangle."""
    hbar, m = units.hbar, units.mass
    k = np.sqrt(2.0 * m * E) / hbar
    # kappa is real below the barrier top and i*q above it
    kappa = np.sqrt((2.0 * m * (barrier.height - E)).astype(complex)) / hbar
    kl = kappa * barrier.width
    if np.any(kl.real > _MAX_OPACITY):
        raise AmplitudeOverflowError(
            f"kappa*L = {float(np.max(kl.real)):.1f} exceeds {_MAX_OPACITY:g}"
        )
    small = np.abs(kl) < 1e-4
    safe = np.where(small, 1.0, kappa)
    sinhc = np.where(
        small,
        barrier.width * (1.0 + kl * kl / 6.0),
        np.sinh(kl) / safe,
    )
    return k, kappa, np.cosh(kl), sinhc


def transmission_reflection(barrier: Barrier, E, units: Units = Units()):
    """Arrays ``(t, r)`` for left incidence, broadcast over ``E``."""
    E = _check_energy(E)
    if isinstance(barrier, Free):
        return np.ones_like(E, dtype=complex), np.zeros_like(E, dtype=complex)
    if isinstance(barrier, Delta):
        p = np.sqrt(2.0 * units.mass * E)
        a = units.mass * barrier.strength / units.hbar
        t = p / (p + 1j * a)
        return t, t - 1.0
    if isinstance(barrier, Rectangular):
        k, kappa, ch, sc = _rect_parts(barrier, E, units)
        k2, q2 = k * k, kappa * kappa
        denom = 2.0 * k * ch - 1j * (k2 - q2) * sc
        t = np.exp(-1j * k * barrier.width) * 2.0 * k / denom
        r = -1j * (k2 + q2) * sc / denom
        return t, r
    raise TypeError(f"unknown barrier model {barrier!r}")


def amplitudes(barrier: Barrier, E: float, units: Units = Units()) -> ScatteringAmplitudes:
    t, r = transmission_reflection(barrier, E, units)
    return ScatteringAmplitudes(complex(t), complex(r), float(E))


def transmission_derivative(barrier: Barrier, E, units: Units = Units()):
    """Analytic dt/dE, broadcast over ``E``."""
    E = _check_energy(E)
    hbar, m = units.hbar, units.mass
    if isinstance(barrier, Free):
        return np.zeros_like(E, dtype=complex)
    if isinstance(barrier, Delta):
        p = np.sqrt(2.0 * m * E)
        a = m * barrier.strength / hbar
        return 1j * a / (p + 1j * a) ** 2 * (m / p)
    if isinstance(barrier, Rectangular):
        L = barrier.width
        k, kappa, ch, sc = _rect_parts(barrier, E, units)
        k2, q2 = k * k, kappa * kappa
        c = m / hbar**2
        dk = c / k
        dch = -c * L * sc
        # (L cosh - sinhc) / kappa^2, removable at kappa = 0
        kl = kappa * L
        small = np.abs(kl) < 1e-3
        safe = np.where(small, 1.0, q2)
        ratio = np.where(small, L**3 * (1.0 / 3.0 + kl * kl / 30.0), (L * ch - sc) / safe)
        dsc = -c * ratio
        denom = 2.0 * k * ch - 1j * (k2 - q2) * sc
        ddenom = 2.0 * dk * ch + 2.0 * k * dch - 4j * c * sc - 1j * (k2 - q2) * dsc
        t = np.exp(-1j * k * L) * 2.0 * k / denom
        return t * (dk / k - 1j * L * dk - ddenom / denom)
    raise TypeError(f"unknown barrier model {barrier!r}")


def eigenfunction(barrier: Barrier, E, direction: int, x, units: Units = Units()):
    """<x|E, direction> for ``direction`` +1 (incident from the left) or -1.

    Broadcasts over ``E`` and ``x``. Inside a rectangular barrier the
    solution is continued from its value and slope at ``x = L``; at the
    delta spike the (continuous) left-hand form is used.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    E = _check_energy(E)
    x = np.asarray(x, dtype=float)
    E, x = np.broadcast_arrays(E, x)
    hbar, m = units.hbar, units.mass
    p = np.sqrt(2.0 * m * E)
    k = p / hbar
    norm = np.sqrt(m / (2.0 * np.pi * hbar * p))
    t, r = transmission_reflection(barrier, E, units)
    L = barrier.width
    fwd = np.exp(1j * k * x)
    bwd = np.exp(-1j * k * x)
    if direction == 1:
        left = fwd + r * bwd
        right_amp = t
        right_back = np.zeros_like(t)
    else:
        left = t * bwd
        # reflection amplitude for incidence from the right
        right_amp = -(t / np.conj(t)) * np.conj(r)
        right_back = np.ones_like(t)
    out = np.where(x <= 0.0, left, right_amp * fwd + right_back * bwd)
    if isinstance(barrier, Rectangular):
        inside = (x > 0.0) & (x < L)
        if np.any(inside):
            ki = k[inside]
            eL = np.exp(1j * ki * L)
            psi_L = right_amp[inside] * eL + right_back[inside] / eL
            dpsi_L = 1j * ki * (right_amp[inside] * eL - right_back[inside] / eL)
            kappa = np.sqrt((2.0 * m * (barrier.height - E[inside])).astype(complex)) / hbar
            s = kappa * (x[inside] - L)
            small = np.abs(s) < 1e-4
            safe = np.where(small, 1.0, kappa)
            d = x[inside] - L
            sinhc = np.where(small, d * (1.0 + s * s / 6.0), np.sinh(s) / safe)
            out = out.copy()
            out[inside] = psi_L * np.cosh(s) + dpsi_L * sinhc
    return norm * out
