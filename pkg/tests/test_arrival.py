import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from weaktime.arrival import (
    ArrivalConfig,
    ComplexArrival,
    GaussianEnsemble,
    MomentumAtoms,
    MomentumGaussian,
    PhaseSpaceDensity,
    arrival_distribution,
    classical_arrival,
    expectation,
    flux_element,
    flux_expectation,
    pi_matrix_element,
    pi_minus_element,
    resolution_bound,
)
from weaktime.errors import PhysicalDomainError, ResolutionWarning
from weaktime.oracles import pi_element_2d
from weaktime.scattering import Units

UNIT = ArrivalConfig(0.0, 1.0)


def gaussian_j_plus(X, t, x0, pbar, sx, sp, m=1.0):
    """Closed-form J+ for a freely moving uncorrelated Gaussian ensemble."""
    a = t / m
    prec = a * a / sx**2 + 1.0 / sp**2
    s = 1.0 / math.sqrt(prec)
    mu = s * s * (a * (X - x0) / sx**2 + pbar / sp**2)
    K = math.exp(-0.5 * ((X - x0) ** 2 / sx**2 + pbar**2 / sp**2 - mu**2 / s**2)) / (2 * math.pi * sx * sp)
    return K * math.sqrt(2 * math.pi) * s * (mu * norm.cdf(mu / s) + s * norm.pdf(mu / s)) / m


# ---------------------------------------------------------------- classical


def test_left_moving_support_gives_zero():
    rho = PhaseSpaceDensity(lambda x, p, t: np.exp(-(p + 2.0) ** 2) / math.sqrt(math.pi), (-4.0, -0.5))
    assert classical_arrival(rho, 0.0, 0.0) == 0.0
    assert classical_arrival(rho, 0.0, 0.0, side=-1) > 0


def test_sifting():
    atoms = MomentumAtoms(((1.7, 1.0),), mass=2.0)
    assert classical_arrival(atoms, 0.0, 0.0) == pytest.approx(0.85)
    assert classical_arrival(atoms, 0.0, 0.0, side=-1) == 0.0


@pytest.mark.parametrize("t", [0.0, 3.0, 10.0])
def test_gaussian_beam_closed_form(t):
    ens = GaussianEnsemble(-10.0, 1.0, 2.0, 0.1)
    assert classical_arrival(ens, 0.0, t) == pytest.approx(gaussian_j_plus(0.0, t, -10.0, 1.0, 2.0, 0.1), rel=1e-9)


def test_total_crossing_measure():
    # a slow, wide ensemble has a visible left-moving part
    ens = GaussianEnsemble(-3.0, 0.3, 1.0, 0.4)

    def total(side):
        f = lambda t: classical_arrival(ens, 0.0, t, side=side)  # noqa: E731
        # slow particles arrive late: 1/t^2 tails, so integrate to infinity
        parts = [(-np.inf, -50.0), (-50.0, 50.0), (50.0, np.inf)]
        return sum(quad(f, a, b, limit=400, epsabs=1e-12, epsrel=1e-10)[0] for a, b in parts)

    plus, minus = total(1), total(-1)
    assert minus > 0.1
    assert plus + minus == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------- matrix elements


def test_diagonal_at_zero_momentum():
    assert pi_matrix_element(0.0, 0.0, UNIT) == pytest.approx(0.2820947917738782 * (1 - 1j), rel=1e-14)


def test_diagonal_limits():
    big = 40.0
    assert pi_matrix_element(big, big, UNIT).real == pytest.approx(big, rel=1e-3)
    assert abs(pi_matrix_element(-big, -big, UNIT)) < 1e-3


def test_near_diagonal_is_continuous():
    base = pi_matrix_element(1.0, 1.0, UNIT)
    for d in (1e-2, 1e-3, 1e-4, 1e-6, 1e-9):
        v = pi_matrix_element(1.0, 1.0 + d, UNIT)
        assert abs(v - base) < 5 * d
    # both sides of the Taylor switch agree
    a = pi_matrix_element(0.5, 0.5 + 2.0e-3, UNIT)
    b = pi_matrix_element(0.5, 0.5 + 1.9e-3, UNIT)
    assert abs(a - b) < 1e-3


def test_broadcasting():
    p = np.array([-1.0, 0.0, 2.0])
    m = pi_matrix_element(p[:, None], p[None, :], UNIT)
    assert m.shape == (3, 3)
    assert m[2, 1] == pytest.approx(pi_matrix_element(2.0, 0.0, UNIT))


def test_matches_position_space_oracle(rng):
    for _ in range(8):
        p1, p2 = rng.uniform(-3, 3, 2)
        X, dt = rng.uniform(-2, 2), rng.uniform(0.2, 2)
        u = Units(hbar=rng.uniform(0.5, 2), mass=rng.uniform(0.5, 2))
        a = pi_matrix_element(p1, p2, ArrivalConfig(X, dt, u))
        b = pi_element_2d(p1, p2, X, dt, u)
        assert abs(a - b) <= 1e-8 * abs(a)


def test_reduces_to_flux_element():
    # small dt (p^2 dt / 2m hbar << 1) but p sqrt(dt / 2 hbar m) > 1
    cfg = ArrivalConfig(0.7, 1e-2)
    p1, p2 = 30.0, 30.2
    el = pi_matrix_element(p1, p2, cfg)
    assert el == pytest.approx(flux_element(p1, p2, cfg), rel=0.05)


def test_minus_is_mirror():
    cfg = ArrivalConfig(0.4, 0.7)
    assert pi_minus_element(1.2, -0.3, cfg) == pi_matrix_element(-1.2, 0.3, ArrivalConfig(-0.4, 0.7))


def test_resolution_bound():
    assert resolution_bound(0.5) == 2.0
    assert resolution_bound(1e300) < 1e-299
    assert resolution_bound(1.0**2 / 2.0) == 2.0
    with pytest.raises(PhysicalDomainError):
        resolution_bound(0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ArrivalConfig(0.0, 0.0)
    with pytest.raises(ValueError):
        ArrivalConfig(np.nan, 1.0)


# ---------------------------------------------------------------- packets


def test_wavefunction_normalised_and_flux_routes_agree():
    pk = MomentumGaussian(1.0, 0.2, x0=-3.0, time=2.0)
    cfg = ArrivalConfig(0.5, 1.0)
    x = np.linspace(-40, 40, 20001)
    assert np.trapezoid(np.abs(pk.wavefunction(x)) ** 2, x) == pytest.approx(1.0, abs=1e-10)
    assert expectation(flux_element, pk, cfg).real == pytest.approx(flux_expectation(pk, cfg), rel=1e-10)


def test_flux_identity_small_resolution():
    pk = MomentumGaussian(1.0, 0.1, x0=-5.0, time=5.0)
    cfg = ArrivalConfig(0.0, 1e-4)
    diff = expectation(pi_matrix_element, pk, cfg) - expectation(pi_minus_element, pk, cfg)
    J = flux_expectation(pk, cfg)
    assert abs(diff.real - J) <= 1e-3 * abs(J)
    assert abs(diff.imag) <= 1e-3 * abs(J)


def test_classical_limit_matches_window_average():
    pk = MomentumGaussian(5.0, 0.05, x0=-50.0, time=10.0)
    dt = 2.0
    res = arrival_distribution(pk, ArrivalConfig(0.0, dt))
    ens = GaussianEnsemble(-50.0, 5.0, 10.0, 0.05)
    avg = quad(lambda t: classical_arrival(ens, 0.0, t), 10.0, 10.0 + dt, epsrel=1e-12)[0] / dt
    assert res.real == pytest.approx(avg, rel=1e-3)
    assert abs(res.imag) < 1e-3 * res.real


def test_left_moving_packet_mirror():
    cfg = ArrivalConfig(0.0, 2.0)
    right = MomentumGaussian(5.0, 0.05, x0=-50.0, time=10.0)
    left = MomentumGaussian(-5.0, 0.05, x0=50.0, time=10.0)
    plus = expectation(pi_matrix_element, left, cfg)
    minus = expectation(pi_minus_element, left, cfg)
    assert abs(plus.real) < 1e-2 * minus.real
    assert minus == pytest.approx(expectation(pi_matrix_element, right, cfg), rel=1e-9)


def test_resolution_warning():
    pk = MomentumGaussian(1.0, 0.1, x0=-5.0, time=5.0)
    with pytest.warns(ResolutionWarning):
        arrival_distribution(pk, ArrivalConfig(0.0, 0.5))
    with warnings.catch_warnings():
        warnings.simplefilter("error", ResolutionWarning)
        arrival_distribution(pk, ArrivalConfig(0.0, 3.0))


@given(st.floats(-5, 5))
def test_joint_probability_reconstruction(coef):
    c = ComplexArrival(0.3, -0.02)
    dt = 1.5
    w = c.joint_probability(coef, dt)
    assert w == pytest.approx(0.3 * dt - 2 * dt * coef * (-0.02))
    # linear in the detector coefficient, anchored at the symmetric part
    assert c.joint_probability(0.0, dt) == pytest.approx(c.real * dt)
    assert c.value == complex(0.3, -0.02)
