import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from weaktime.errors import ErfcOverflowError, PhysicalDomainError, QuadratureError
from weaktime.numerics import QuadratureSpec, d_dE, erfc, erfc_complex, faddeeva, integrate

mp.mp.dps = 30


def _ref_erfc(z):
    return complex(mp.erfc(mp.mpc(z.real, z.imag)))


def test_erfc_matches_mpmath_in_disc(rng):
    r = 30 * np.sqrt(rng.uniform(0, 1, 600))
    z = r * np.exp(1j * rng.uniform(0, 2 * np.pi, 600))
    worst = 0.0
    for zi in z:
        ref = _ref_erfc(zi)
        if not (1e-300 < abs(ref) < 1e300):
            continue
        try:
            v = erfc_complex(zi)
        except ErfcOverflowError:
            continue
        worst = max(worst, abs(v - ref) / abs(ref))
    assert worst < 1e-12


def test_erfc_real_axis_relative():
    x = np.linspace(-6, 6, 401)
    ref = np.array([float(mp.erfc(t)) for t in x])
    assert np.max(np.abs(erfc(x) - ref) / ref) < 1e-13


def test_faddeeva_on_region_boundary():
    # |z| exactly on the switch between series and continued fraction
    for z in (4.4j, 6.3 + 0j, 4.4 + 0j):
        ref = complex(mp.exp(-mp.mpc(z) ** 2) * mp.erfc(-1j * mp.mpc(z)))
        assert abs(faddeeva(np.array([z]))[0] - ref) < 1e-13 * abs(ref)


def test_erfc_simple_values():
    assert erfc_complex(0.0) == pytest.approx(1.0, abs=1e-15)
    # erfc(i) = 1 - i erfi(1)
    assert erfc_complex(1j) == pytest.approx(1 - 1.6504257587975428j, rel=1e-14)


def test_faddeeva_against_mpmath(rng):
    z = rng.uniform(-8, 8, 200) + 1j * rng.uniform(0, 8, 200)
    ref = np.array([complex(mp.exp(-mp.mpc(q) ** 2) * mp.erfc(-1j * mp.mpc(q))) for q in z])
    assert np.max(np.abs(faddeeva(z) - ref) / np.abs(ref)) < 1e-12


def test_erfc_overflow_and_domain():
    with pytest.raises(ErfcOverflowError):
        erfc_complex(0.5 + 30j)  # exp(-z^2) with Re(-z^2) ~ 900
    with pytest.raises(ErfcOverflowError):
        erfc_complex(40.0)  # underflows
    with pytest.raises(PhysicalDomainError):
        erfc_complex(2e6)
    with pytest.raises(PhysicalDomainError):
        erfc(np.array([np.nan]))


@given(st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False))
def test_erfc_reflection(z):
    assert abs(erfc_complex(z) + erfc_complex(-z) - 2.0) < 1e-12 * max(1.0, abs(erfc_complex(z)))


@given(st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False))
def test_erfc_conjugate_symmetry(z):
    a, b = erfc_complex(z.conjugate()), erfc_complex(z).conjugate()
    assert abs(a - b) <= 1e-14 * max(1.0, abs(a))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(1.0, 1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(0.0, 1.0, rtol=1.5)
    with pytest.raises(ValueError):
        QuadratureSpec(0.0, 1.0, max_panels=0)


def test_integrate_polynomial_exact():
    v = integrate(lambda x: 5 * x**4 - 3 * x**2 + 1, QuadratureSpec(-1.0, 2.0))
    assert v.real == pytest.approx(32 + 1 - 8 - (-1 + 1 + 1) + 2 + 1, rel=1e-14)


def test_integrate_oscillatory():
    # int_0^50 cos(20 x) dx
    v = integrate(lambda x: np.cos(20 * x), QuadratureSpec(0.0, 50.0, rtol=1e-10, max_width=0.05))
    assert v.real == pytest.approx(math.sin(1000.0) / 20.0, abs=1e-11)


def test_integrate_peak_with_breakpoint():
    v = integrate(lambda x: np.exp(-((x - 0.3) ** 2) / 1e-6), QuadratureSpec(-1, 1, rtol=1e-10), breakpoints=[0.3])
    assert v.real == pytest.approx(math.sqrt(math.pi * 1e-6), rel=1e-9)


def test_integrate_raises_with_best_effort():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1e4 * x) + 1.0, QuadratureSpec(0.0, 100.0, rtol=1e-12, max_panels=8))
    assert info.value.panels >= 8
    assert np.isfinite(info.value.value)


@given(
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.floats(-2, 2),
    st.floats(-2, 2),
)
def test_integrate_linear(c1, c2, alpha, beta):
    spec = QuadratureSpec(-1.3, 0.7, rtol=1e-10, atol=1e-14)
    f = np.polynomial.Polynomial(c1)
    g = np.polynomial.Polynomial(c2)
    lhs = integrate(lambda x: alpha * f(x) + beta * g(x), spec)
    rhs = alpha * integrate(f, spec) + beta * integrate(g, spec)
    assert abs(lhs - rhs) <= 10 * (1e-10 * max(abs(lhs), abs(rhs)) + 1e-14)


def test_d_dE():
    assert d_dE(lambda E: np.exp(2j * E), 0.7) == pytest.approx(2j * np.exp(1.4j), rel=1e-9)
    with pytest.raises(PhysicalDomainError):
        d_dE(np.sqrt, 1e-7)
