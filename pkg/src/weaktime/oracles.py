"""Independent reference computations used only to check the fast paths.

Nothing here shares code with the closed forms it validates:

* ``transfer_matrix`` propagates (psi, psi') through piecewise-constant
  potentials and delta spikes and solves the edge matching numerically.
* ``delta_as_thin_rectangle`` approaches a delta spike through tall thin
  rectangles and Richardson-extrapolates in the width.
* ``density_from_eigenfunctions`` evaluates time densities straight from
  the eigenfunctions, bypassing the region-specific closed forms.
* ``pi_element_2d`` integrates the arrival projector sandwich in
  position space with tensor Gauss-Legendre.
"""

from __future__ import annotations

import numpy as np

from .scattering import Units, eigenfunction, transmission_reflection

__all__ = [
    "transfer_matrix",
    "delta_as_thin_rectangle",
    "density_from_eigenfunctions",
    "pi_element_2d",
]


def _segment(k, d):
    """(psi, psi') propagator across width d at complex wavenumber k."""
    kd = k * d
    sinc = d if abs(kd) < 1e-12 else np.sin(kd) / k
    return np.array([[np.cos(kd), sinc], [-k * np.sin(kd), np.cos(kd)]], dtype=complex)


def transfer_matrix(E: float, segments=(), spikes=(), units: Units = Units()):
    """Amplitudes (t, r) for a potential built from pieces.

    ``segments`` holds ``(start, stop, V)`` rectangles and ``spikes`` holds
    ``(position, strength)`` delta terms, all inside ``[0, L]`` where L is the
    rightmost edge. Outside the pieces the potential is zero.
    """
    hbar, m = units.hbar, units.mass
    k0 = np.sqrt(2.0 * m * E) / hbar
    events = []
    for a, b, v in segments:
        events += [(a, "V", v), (b, "V", -v)]
    for x, s in spikes:
        events.append((x, "D", s))
    events.sort(key=lambda e: (e[0], e[1] == "V"))
    edge = max([0.0] + [e[0] for e in events])
    prop = np.eye(2, dtype=complex)
    x_now, level = 0.0, 0.0
    for x, kind, val in events:
        if x > x_now:
            kk = np.sqrt(complex(2.0 * m * (E - level))) / hbar
            prop = _segment(kk, x - x_now) @ prop
            x_now = x
        if kind == "V":
            level += val
        else:
            jump = np.array([[1.0, 0.0], [2.0 * m * val / hbar**2, 1.0]], dtype=complex)
            prop = jump @ prop
    # left: psi(0) = 1 + r, psi'(0) = i k (1 - r)
    # right: psi(edge) = t e^{ik edge}, psi'(edge) = i k t e^{ik edge}
    ph = np.exp(1j * k0 * edge)
    in_vec = prop @ np.array([1.0, 1j * k0])
    r_vec = prop @ np.array([1.0, -1j * k0])
    # in_vec + r * r_vec = t * ph * [1, i k]
    lhs = np.array([[r_vec[0], -ph], [r_vec[1], -1j * k0 * ph]])
    r, t = np.linalg.solve(lhs, -in_vec)
    return complex(t), complex(r)


def delta_as_thin_rectangle(E: float, strength: float, widths=(1e-4, 5e-5, 2.5e-5),
                            units: Units = Units()):
    """Delta-spike amplitudes as the limit of rectangles of area ``strength``.

    Each rectangle sits on [-w/2, w/2]; the error is a power series in w, so
    halving w twice and extrapolating removes the first two orders.
    """
    vals = []
    for w in widths:
        # built on [0, w]; moving it left by w/2 leaves t alone and
        # multiplies r by exp(-i k w)
        t, r = transfer_matrix(E, segments=[(0.0, w, strength / w)], units=units)
        k = np.sqrt(2.0 * units.mass * E) / units.hbar
        vals.append(np.array([t, r * np.exp(-1j * k * w)]))
    v1, v2, v3 = vals
    r1 = 2.0 * v2 - v1
    r2 = 2.0 * v3 - v2
    best = (4.0 * r2 - r1) / 3.0
    return complex(best[0]), complex(best[1])


def density_from_eigenfunctions(barrier, packet, x: float, spec, units: Units = Units()):
    """(dwell, tunnel, correction) densities from eigenfunctions at one point.

    Uses u(x) = |t|^2 <x|E,+> - t* r <x|E,-> for the part of <x|E,+> that
    ends up transmitted, which is valid for any x including under a barrier.
    """
    from .numerics import integrate
    from .wavepacket import energy_amplitude, transmission_probability

    hbar = units.hbar

    def weights(E):
        return np.abs(energy_amplitude(packet, E, units)) ** 2

    def dwell(E):
        return 2 * np.pi * hbar * weights(E) * np.abs(eigenfunction(barrier, E, 1, x, units)) ** 2

    def tunnel(E):
        t, r = transmission_reflection(barrier, E, units)
        plus = eigenfunction(barrier, E, 1, x, units)
        minus = eigenfunction(barrier, E, -1, x, units)
        u = np.abs(t) ** 2 * plus - np.conj(t) * r * minus
        return 2 * np.pi * hbar * weights(E) * np.conj(plus) * u

    T = transmission_probability(packet, barrier, units, spec=spec)
    dw = integrate(dwell, spec).real
    tc = integrate(tunnel, spec) / T
    return dw, tc.real, -tc.imag


def pi_element_2d(p1: float, p2: float, X: float, dt: float, units: Units = Units(),
                  order: int = 120, extent: float = 9.0):
    """<p1|P1 P2~|p2> / dt by direct position-space quadrature.

    The sandwich is an integral over x1 < X < x2 of the backward free
    propagator sqrt(i m / (2 pi hbar dt)) exp(-i m (x2 - x1)^2 / (2 hbar dt)).
    Substituting u = X - x1, w = x2 - X and rotating both contours by
    exp(-i pi/4) turns the Fresnel factor into a decaying Gaussian in
    (u + w), so plain Gauss-Legendre converges. Plane waves are
    normalised as <x|p> = exp(i p x / hbar).
    """
    hbar, m = units.hbar, units.mass
    scale = np.sqrt(2.0 * hbar * dt / m)
    # the Gaussian exp(-m (u+w)^2 / (2 hbar dt)) plus the linear terms in p
    shift = dt * (abs(p1) + abs(p2)) / m
    top = extent * scale + 2.0 * shift
    xs, ws = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * top * (xs + 1.0)
    wts = 0.5 * top * ws
    u, w = np.meshgrid(nodes, nodes, indexing="ij")
    wu, ww = np.meshgrid(wts, wts, indexing="ij")
    rot = np.exp(1j * np.pi / 4)
    expo = rot * (p1 * u + p2 * w) / hbar - m * (u + w) ** 2 / (2.0 * hbar * dt)
    body = np.sum(wu * ww * np.exp(expo))
    pref = (
        np.exp(1j * (p2 - p1) * X / hbar)
        * np.exp(-1j * p2**2 * dt / (2.0 * m * hbar))
        * np.sqrt(m / (2.0 * np.pi * hbar * dt))
        * np.exp(1j * np.pi / 4)
        * (-1j)
        / dt
    )
    return complex(pref * body)
