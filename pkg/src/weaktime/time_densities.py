"""Dwell, tunneling, correction and reflection time densities.

All densities are t -> infinity limits for a packet that starts far to the
left and contains only right-movers. Outside the barrier they use the
closed forms in the energy representation; under a rectangular barrier
they fall back to the matched eigenfunctions.

Two real densities are usually obtained from a single complex integral:
the real and imaginary parts of one integrand carry e.g. the tunneling
density and its correction, so every grid point costs two quadratures.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, PhysicalDomainError, VanishingProbabilityError
from .numerics import d_dE, integrate
from .scattering import (
    Barrier,
    Free,
    Units,
    eigenfunction,
    transmission_derivative,
    transmission_reflection,
)
from .wavepacket import (
    GaussianPacket,
    energy_amplitude,
    energy_amplitude_derivative,
    packet_quadrature,
)

__all__ = [
    "ScatteringWeights",
    "scattering_weights",
    "dwell_density",
    "tunnel_density",
    "tunnel_correction_density",
    "reflect_density",
    "densities_at",
    "TimeDensityProfile",
    "profile",
    "default_grid",
    "AsymptoticTimes",
    "asymptotic_times",
    "flux_time_moment",
]

# below this T (or R) the conditional densities are not defined
MIN_PROBABILITY = 1e-300


@dataclass(frozen=True)
class ScatteringWeights:
    """Packet-averaged transmission and reflection probabilities."""

    T: float
    R: float


def scattering_weights(packet, barrier, units=Units(), rtol=1e-8) -> ScatteringWeights:
    spec = packet_quadrature(packet, units, rtol=rtol)

    def f(E):
        t, r = transmission_reflection(barrier, E, units)
        w = np.abs(energy_amplitude(packet, E, units)) ** 2
        return w * (np.abs(t) ** 2 + 1j * np.abs(r) ** 2)

    val = integrate(f, spec)
    return ScatteringWeights(float(val.real), float(val.imag))


def _region(barrier: Barrier, x: float) -> str:
    if isinstance(barrier, Free):
        return "left" if x <= 0.0 else "right"
    if x <= 0.0:
        return "left"
    if x >= barrier.width:
        return "right"
    return "inside"


def _pair_integrals(packet, barrier, x, units, rtol):
    """Complex integrals (A, B) at x.

    Re A = T tau_tun, Im A = T tau_corr, Re B = tau_dw, Im B = R tau_refl.
    Inside a barrier Im B is not available in closed form and is left NaN.
    """
    m, hbar = units.mass, units.hbar
    spec = packet_quadrature(packet, units, rtol=rtol, x=x)
    region = _region(barrier, x)

    def weights(E):
        return np.abs(energy_amplitude(packet, E, units)) ** 2

    if region == "left":
        def fa(E):
            t, r = transmission_reflection(barrier, E, units)
            p = np.sqrt(2.0 * m * E)
            w = r * np.exp(-2j * p * x / hbar)
            return m * weights(E) * np.abs(t) ** 2 * (1.0 + w) / p

        def fb(E):
            _, r = transmission_reflection(barrier, E, units)
            p = np.sqrt(2.0 * m * E)
            rw = (r * np.exp(-2j * p * x / hbar)).real
            r2 = np.abs(r) ** 2
            dw = 1.0 + r2 + 2.0 * rw
            refl = 2.0 * r2 + (1.0 + r2) * rw
            return m * weights(E) * (dw + 1j * refl) / p

    elif region == "right":
        def fa(E):
            t, r = transmission_reflection(barrier, E, units)
            p = np.sqrt(2.0 * m * E)
            z = (t / np.conj(t)) * np.conj(r) * np.exp(2j * p * x / hbar)
            return m * weights(E) * np.abs(t) ** 2 * (1.0 - z) / p

        def fb(E):
            t, r = transmission_reflection(barrier, E, units)
            p = np.sqrt(2.0 * m * E)
            z = (t / np.conj(t)) * np.conj(r) * np.exp(2j * p * x / hbar)
            return m * weights(E) * np.abs(t) ** 2 * (1.0 + 1j * z.real) / p

    else:
        def fa(E):
            t, r = transmission_reflection(barrier, E, units)
            plus = eigenfunction(barrier, E, 1, x, units)
            minus = eigenfunction(barrier, E, -1, x, units)
            u = np.abs(t) ** 2 * plus - np.conj(t) * r * minus
            # conjugated so that the imaginary part matches the outside forms
            return 2.0 * np.pi * hbar * weights(E) * plus * np.conj(u)

        def fb(E):
            plus = eigenfunction(barrier, E, 1, x, units)
            return 2.0 * np.pi * hbar * weights(E) * np.abs(plus) ** 2

    A = integrate(fa, spec)
    B = integrate(fb, spec)
    if region == "inside":
        B = complex(B.real, math.nan)
    return A, B


def densities_at(packet: GaussianPacket, barrier: Barrier, x: float, units: Units = Units(),
                 weights: ScatteringWeights | None = None, rtol: float = 1e-8):
    """(dwell, tunnel, correction, reflect) at one point.

    Conditional densities whose probability is below 1e-300 come back NaN;
    the single-density functions raise instead.
    """
    weights = weights or scattering_weights(packet, barrier, units, rtol)
    A, B = _pair_integrals(packet, barrier, x, units, rtol)
    dwell = B.real
    if weights.T > MIN_PROBABILITY:
        tun, corr = A.real / weights.T, A.imag / weights.T
    else:
        tun = corr = math.nan
    if weights.R > MIN_PROBABILITY:
        if math.isnan(B.imag):
            # under the barrier: the decomposition identity is the definition
            refl = (dwell - A.real) / weights.R
        else:
            refl = B.imag / weights.R
    else:
        refl = math.nan
    return dwell, tun, corr, refl


def dwell_density(packet, barrier, x, units=Units(), rtol=1e-8) -> float:
    return _pair_integrals(packet, barrier, x, units, rtol)[1].real


def _require(prob, what):
    if not prob > MIN_PROBABILITY:
        raise VanishingProbabilityError(f"{what} probability {prob:.3g} is too small to condition on")


def tunnel_density(packet, barrier, x, units=Units(), rtol=1e-8) -> float:
    w = scattering_weights(packet, barrier, units, rtol)
    _require(w.T, "transmission")
    return densities_at(packet, barrier, x, units, w, rtol)[1]


def tunnel_correction_density(packet, barrier, x, units=Units(), rtol=1e-8) -> float:
    w = scattering_weights(packet, barrier, units, rtol)
    _require(w.T, "transmission")
    return densities_at(packet, barrier, x, units, w, rtol)[2]


def reflect_density(packet, barrier, x, units=Units(), rtol=1e-8) -> float:
    w = scattering_weights(packet, barrier, units, rtol)
    _require(w.R, "reflection")
    return densities_at(packet, barrier, x, units, w, rtol)[3]


@dataclass
class TimeDensityProfile:
    x: np.ndarray
    dwell: np.ndarray
    tunnel: np.ndarray
    correction: np.ndarray
    reflect: np.ndarray
    T: float
    R: float
    packet: GaussianPacket | None = None
    barrier: Barrier | None = None
    units: Units = field(default_factory=Units)

    def decomposition_residual(self) -> np.ndarray:
        """|tau_dw - T tau_tun - R tau_refl| per grid point."""
        refl = self.R * self.reflect if self.R > MIN_PROBABILITY else 0.0
        return np.abs(self.dwell - self.T * self.tunnel - refl)


def default_grid(start=-40.0, stop=40.0, points=1200) -> np.ndarray:
    return np.linspace(start, stop, points)


def profile(packet: GaussianPacket, barrier: Barrier, grid, units: Units = Units(),
            threads: int | None = None, rtol: float = 1e-8) -> TimeDensityProfile:
    """Evaluate all four densities on ``grid``.

    Points are independent, so they are spread over ``threads`` workers;
    the result does not depend on the worker count.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    weights = scattering_weights(packet, barrier, units, rtol)

    def one(item):
        i, x = item
        try:
            return densities_at(packet, barrier, float(x), units, weights, rtol)
        except (NumericalError, PhysicalDomainError) as exc:
            exc.grid_index = i
            exc.args = (f"grid index {i} (x={x:.17g}): {exc}",) + exc.args[1:]
            raise

    items = list(enumerate(grid))
    if threads == 1:
        rows = [one(it) for it in items]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, items))
    arr = np.array(rows, dtype=float).reshape(len(items), 4)
    return TimeDensityProfile(
        x=grid,
        dwell=arr[:, 0],
        tunnel=arr[:, 1],
        correction=arr[:, 2],
        reflect=arr[:, 3],
        T=weights.T,
        R=weights.R,
        packet=packet,
        barrier=barrier,
        units=units,
    )


def flux_time_moment(packet: GaussianPacket, barrier: Barrier, x: float,
                     units: Units = Units(), rtol: float = 1e-8) -> complex:
    """<N(X) T(x)>: time-weighted flux through x, restricted to transmitted particles.

    Its x-derivative is T * (tau_tun + i tau_corr). Valid behind the barrier
    and in front of it, provided x is well clear of the initial packet.
    """
    m, hbar = units.mass, units.hbar
    region = _region(barrier, x)
    if region == "inside":
        raise ValueError("flux time moment is only available outside the barrier")
    spec = packet_quadrature(packet, units, rtol=rtol, x=x)

    if region == "right":
        def f(E):
            t, r = transmission_reflection(barrier, E, units)
            dt = transmission_derivative(barrier, E, units)
            psi = energy_amplitude(packet, E, units)
            dpsi = energy_amplitude_derivative(packet, E, units)
            p = np.sqrt(2.0 * m * E)
            tp = t * psi
            main = np.conj(tp) * (-1j * hbar) * (dt * psi + t * dpsi)
            flight = m * x * np.abs(tp) ** 2 / p
            fringe = 0.5j * hbar * m * np.abs(psi) ** 2 * np.conj(r) * t * t * np.exp(2j * p * x / hbar) / p**2
            return main + flight + fringe
    else:
        def f(E):
            t, r = transmission_reflection(barrier, E, units)
            psi = energy_amplitude(packet, E, units)
            dpsi = energy_amplitude_derivative(packet, E, units)
            p = np.sqrt(2.0 * m * E)
            t2 = np.abs(t) ** 2
            flight = m * x * t2 * np.abs(psi) ** 2 / p
            fringe = 0.5j * hbar * m * t2 * np.abs(psi) ** 2 * r * np.exp(-2j * p * x / hbar) / p**2
            return flight + fringe - 1j * hbar * t2 * np.conj(psi) * dpsi

    return integrate(f, spec)


@dataclass(frozen=True)
class AsymptoticTimes:
    """Time spent between x1 -> -infinity and x2 by transmitted particles.

    ``tunnel`` is the full asymptotic time and ``free_flight`` the part
    M (x2 - x0) / p_E averaged over the transmitted packet, so
    ``tunnel - free_flight`` is the delay caused by the barrier.
    ``correction`` is the imaginary companion over the same region and
    vanishes when the region holds the initial packet;
    ``correction_near_barrier`` uses a left edge between packet and barrier
    instead and tends to ``-imag_time``.
    """

    x2: float
    tunnel: float
    free_flight: float
    delay: float
    phase_time: float
    imag_time: float
    correction: float
    correction_near_barrier: float
    T: float


def asymptotic_times(packet: GaussianPacket, barrier: Barrier, x2: float,
                     units: Units = Units(), rtol: float = 1e-10,
                     x1: float | None = None) -> AsymptoticTimes:
    if x2 < barrier.width:
        raise ValueError("x2 must lie behind the barrier")
    m, hbar = units.mass, units.hbar
    T = scattering_weights(packet, barrier, units, rtol=1e-8).T
    _require(T, "transmission")
    spec = packet_quadrature(packet, units, rtol=rtol)

    def full(E):
        t = transmission_reflection(barrier, E, units)[0]
        dt = transmission_derivative(barrier, E, units)
        psi = energy_amplitude(packet, E, units)
        dpsi = energy_amplitude_derivative(packet, E, units)
        p = np.sqrt(2.0 * m * E)
        tp = t * psi
        return np.conj(tp) * (m * x2 / p * tp - 1j * hbar * (dt * psi + t * dpsi))

    def parts(E):
        t = transmission_reflection(barrier, E, units)[0]
        dt = transmission_derivative(barrier, E, units)
        w = np.abs(energy_amplitude(packet, E, units)) ** 2
        p = np.sqrt(2.0 * m * E)
        flight = m * (x2 - packet.x0) * np.abs(t) ** 2 * w / p
        delay = hbar * (np.conj(t) * dt).imag * w
        return flight + 1j * delay

    main = integrate(full, spec) / T
    pv = integrate(parts, spec) / T

    E0 = packet.momentum**2 / (2.0 * m)
    def t_of(E):
        return transmission_reflection(barrier, E, units)[0]
    t0 = complex(t_of(E0))
    dt0 = d_dE(t_of, E0)
    phase_time = hbar * (dt0 / t0).imag
    imag_time = hbar * (dt0 / t0).real

    if x1 is None:
        x1 = packet.x0 / 3.0
    near = (flux_time_moment(packet, barrier, x2, units) - flux_time_moment(packet, barrier, x1, units)) / T
    return AsymptoticTimes(
        x2=float(x2),
        tunnel=float(main.real),
        free_flight=float(pv.real),
        delay=float(pv.imag),
        phase_time=float(phase_time),
        imag_time=float(imag_time),
        correction=float(main.imag),
        correction_near_barrier=float(near.imag),
        T=float(T),
    )
