"""Quick invariant suite behind ``weaktime validate``.

Each check compares two independent routes (or an identity) on a handful
of random inputs drawn from ``seed`` and reports the worst deviation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import arrival, oracles, two_level, weak_sim
from .time_densities import profile
from .errors import SingularTimeError
from .numerics import erfc
from .scattering import Delta, Rectangular, transmission_reflection
from .wavepacket import GaussianPacket

__all__ = ["Check", "run_checks"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


def _unitarity(rng):
    E = rng.uniform(0.05, 5.0, 50)
    worst = 0.0
    for b in (Delta(2.0), Rectangular(2.0, 1.5)):
        t, r = transmission_reflection(b, E)
        worst = max(worst, np.max(np.abs(np.abs(t) ** 2 + np.abs(r) ** 2 - 1.0)))
    return Check("unitarity |t|^2 + |r|^2 = 1", float(worst), 1e-10)


def _transfer(rng):
    worst = 0.0
    for E in rng.uniform(0.05, 5.0, 10):
        t, r = transmission_reflection(Rectangular(2.0, 1.5), E)
        to, ro = oracles.transfer_matrix(E, segments=[(0.0, 1.5, 2.0)])
        worst = max(worst, abs(t - to), abs(r - ro))
    return Check("rectangular amplitudes vs transfer matrix", float(worst), 1e-8)


def _erfc_symmetry(rng):
    z = rng.uniform(-5, 5, 200) + 1j * rng.uniform(-5, 5, 200)
    dev = np.abs(erfc(z) + erfc(-z) - 2.0)
    return Check("erfc(z) + erfc(-z) = 2", float(dev.max()), 1e-12)


def _decomposition():
    pk = GaussianPacket(1.0, 0.01)
    prof = profile(pk, Delta(2.0), np.linspace(-10.0, 10.0, 11), threads=1)
    return Check("dwell = T tun + R refl (delta barrier)", float(prof.decomposition_residual().max()), 1e-6)


def _two_level(rng):
    worst = 0.0
    for _ in range(50):
        cfg = two_level.TwoLevelConfig(rng.uniform(-3, 3), rng.uniform(0.1, 3.0))
        t = rng.uniform(0.0, 10.0)
        tau0, tau1 = two_level.dwell_times(cfg, t)
        P0, P1 = two_level.final_probabilities(cfg, t)
        try:
            c0 = two_level.conditional_components(cfg, t, 0)
            c1 = two_level.conditional_components(cfg, t, 1)
        except SingularTimeError:
            continue
        worst = max(
            worst,
            abs(tau0 + tau1 - t),
            abs(P0 * c0.first_level0 + P1 * c1.first_level0 - tau0),
            abs(P0 * c0.second_level0 + P1 * c1.second_level0),
        )
    return Check("two-level completeness and weighted averages", float(worst), 1e-10)


def _weak_route():
    system = weak_sim.two_level_system(2.0, np.sqrt(3.0), 0, 0)
    det = weak_sim.DetectorState.gaussian(1.0, 0.3)
    cfg = weak_sim.CouplingConfig(1e-2, 1.0)
    post = weak_sim.level_projector(0)
    fo = weak_sim.first_order(system, 1.0, post)
    analytic = fo.symmetric + 2.0 * det.coefficient * fo.commutator
    _, sim = weak_sim.extrapolate_to_weak(system, det, cfg, post)
    return Check("pointer simulation vs first-order formula", abs(sim - analytic) / abs(analytic), 1e-3)


def _arrival(rng):
    worst = 0.0
    for _ in range(5):
        p1, p2 = rng.uniform(-3, 3, 2)
        X, dt = rng.uniform(-2, 2), rng.uniform(0.2, 2.0)
        a = arrival.pi_matrix_element(p1, p2, arrival.ArrivalConfig(X, dt))
        b = oracles.pi_element_2d(p1, p2, X, dt)
        worst = max(worst, abs(a - b) / abs(a))
    return Check("arrival element vs position-space quadrature", float(worst), 1e-6)


def run_checks(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    return [
        _unitarity(rng),
        _transfer(rng),
        _erfc_symmetry(rng),
        _decomposition(),
        _two_level(rng),
        _weak_route(),
        _arrival(rng),
    ]
