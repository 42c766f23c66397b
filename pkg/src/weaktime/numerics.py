"""Complex error function, adaptive quadrature and numerical differentiation.

Everything here is a pure function of its inputs. Integrands and the
functions passed to :func:`d_dE` are evaluated on whole numpy arrays of
abscissae at once, so they must broadcast.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ErfcOverflowError, PhysicalDomainError, QuadratureError

__all__ = [
    "faddeeva",
    "erfc",
    "erfc_complex",
    "QuadratureSpec",
    "integrate",
    "d_dE",
]

_TWO_OVER_SQRT_PI = 1.12837916709551257388
# log of the largest / smallest normal double
_LOG_MAX = 709.782712893384
_LOG_MIN_NORMAL = -708.3964185322641
_Z_LIMIT = 1.0e6


def _w_upper(x, y):
    """Faddeeva w(z) for z = x + iy with y >= 0 (elementwise).

    Poppe & Wijers (ACM TOMS 680) region switching: Taylor series of
    erfc(-iz) near the origin, Laplace continued fraction far away and
    Gautschi's truncated Taylor/continued-fraction hybrid in between.
    """
    xabs = np.abs(x)
    yabs = np.asarray(y, dtype=float)
    xs = xabs / 6.3
    ys = yabs / 4.4
    qrho = xs * xs + ys * ys
    xquad = (xabs - yabs) * (xabs + yabs)
    yquad = 2.0 * xabs * yabs

    u = np.empty_like(xabs)
    v = np.empty_like(xabs)

    series = qrho < 0.085264
    if np.any(series):
        xa, ya = xabs[series], yabs[series]
        xq, yq = xquad[series], yquad[series]
        q = (1.0 - 0.85 * ys[series]) * np.sqrt(qrho[series])
        n_max = int(np.max(np.rint(6.0 + 72.0 * q)))
        j = 2 * n_max + 1
        xsum = np.full_like(xa, 1.0 / j)
        ysum = np.zeros_like(xa)
        for i in range(n_max, 0, -1):
            j -= 2
            xaux = (xsum * xq - ysum * yq) / i
            ysum = (xsum * yq + ysum * xq) / i
            xsum = xaux + 1.0 / j
        u1 = 1.0 - _TWO_OVER_SQRT_PI * (xsum * ya + ysum * xa)
        v1 = _TWO_OVER_SQRT_PI * (xsum * xa - ysum * ya)
        daux = np.exp(-xq)
        u2 = daux * np.cos(yq)
        v2 = -daux * np.sin(yq)
        u[series] = u1 * u2 - v1 * v2
        v[series] = u1 * v2 + v1 * u2

    rest = ~series
    if np.any(rest):
        xa, ya = xabs[rest], yabs[rest]
        q2 = qrho[rest]
        far = q2 > 1.0
        qf = np.sqrt(np.where(far, q2, 1.0))
        qn = (1.0 - ys[rest]) * np.sqrt(np.clip(1.0 - q2, 0.0, None))
        h = np.where(far, 0.0, 1.88 * qn)
        kapn = np.where(far, 0, np.rint(7.0 + 34.0 * qn)).astype(int)
        nu = np.where(
            far, (3.0 + 1442.0 / (26.0 * qf + 77.0)).astype(int), np.rint(16.0 + 26.0 * qn)
        ).astype(int)
        h2 = 2.0 * h
        with np.errstate(divide="ignore", invalid="ignore"):
            qlambda = np.where(far, 0.0, h2 ** kapn)
        # the continued fraction alone is used when h vanishes (qrho == 1)
        # or h^kapn underflows, as in the reference algorithm
        use_r = far | ~(qlambda >= np.finfo(float).tiny)
        rx = np.zeros_like(xa)
        ry = np.zeros_like(xa)
        sx = np.zeros_like(xa)
        sy = np.zeros_like(xa)
        for n in range(int(nu.max()), -1, -1):
            act = n <= nu
            np1 = n + 1
            tx = ya + h + np1 * rx
            ty = xa - np1 * ry
            c = 0.5 / (tx * tx + ty * ty)
            rx = np.where(act, c * tx, rx)
            ry = np.where(act, c * ty, ry)
            upd = (~use_r) & (n <= kapn)
            if np.any(upd):
                tx = qlambda + sx
                sx_new = rx * tx - ry * sy
                sy_new = ry * tx + rx * sy
                sx = np.where(upd, sx_new, sx)
                sy = np.where(upd, sy_new, sy)
                qlambda = np.where(upd, qlambda / np.where(h2 > 0, h2, 1.0), qlambda)
        ur = np.where(use_r, _TWO_OVER_SQRT_PI * rx, _TWO_OVER_SQRT_PI * sx)
        vr = np.where(use_r, _TWO_OVER_SQRT_PI * ry, _TWO_OVER_SQRT_PI * sy)
        ur = np.where(ya == 0.0, np.exp(-xa * xa), ur)
        u[rest] = ur
        v[rest] = vr

    v = np.where(x < 0.0, -v, v)
    return u + 1j * v


def faddeeva(z):
    """Faddeeva function w(z) = exp(-z^2) erfc(-iz), elementwise.

    Accurate to about 1e-13 relative in the closed upper half plane. Below
    the real axis it is continued through w(z) = 2 exp(-z^2) - w(-z) and
    overflows to inf like the true function does.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    out = np.empty_like(z)
    upper = z.imag >= 0.0
    if np.any(upper):
        out[upper] = _w_upper(z.real[upper], z.imag[upper])
    if np.any(~upper):
        zl = z[~upper]
        with np.errstate(over="ignore", invalid="ignore"):
            out[~upper] = 2.0 * np.exp(-zl * zl) - _w_upper(-zl.real, -zl.imag)
    return out.reshape(shape)


def _scaled_exp(e, w):
    """exp(e) * w without intermediate overflow when |w| <= 1."""
    big = np.abs(e.real) > 600.0
    out = np.exp(np.where(big, 0.0, e)) * w
    if np.any(big):
        with np.errstate(divide="ignore"):
            out = np.where(big, np.exp(e + np.log(w)), out)
    return out


def erfc(z, *, check=True):
    """Complementary error function of complex argument, elementwise.

    Only the upper-half-plane branch of :func:`faddeeva` is used:
    erfc(z) = exp(-z^2) w(iz) for Re z >= 0 and 2 - erfc(-z) otherwise,
    which keeps the real-axis values accurate in relative terms.

    Raises :class:`ErfcOverflowError` when ``check`` is set and some result
    overflows or underflows the normal double range.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(~np.isfinite(z)) or np.any(np.abs(z) >= _Z_LIMIT):
        raise PhysicalDomainError("erfc argument must be finite with |z| < 1e6")
    x, y = z.real, z.imag
    right = x >= 0.0
    # iz for Re z >= 0, -iz otherwise; both lie in the upper half plane
    zeta = np.where(right, 1j * z, -1j * z)
    w = _w_upper(np.atleast_1d(zeta.real).ravel(), np.atleast_1d(zeta.imag).ravel())
    w = w.reshape(z.shape)
    expo = (y - x) * (y + x) - 2j * x * y
    log_mag = expo.real + np.log(np.abs(w))
    if check:
        if np.any(log_mag > _LOG_MAX):
            raise ErfcOverflowError("erfc(z) overflows double range")
        if np.any(right & (log_mag < _LOG_MIN_NORMAL)):
            raise ErfcOverflowError("erfc(z) underflows double range")
    with np.errstate(over="ignore", under="ignore"):
        tail = _scaled_exp(expo, w)
    return np.where(right, tail, 2.0 - tail)


def erfc_complex(z: complex) -> complex:
    """Scalar wrapper around :func:`erfc`."""
    return complex(erfc(np.asarray([z], dtype=complex))[0])


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration interval and accuracy target for :func:`integrate`.

    ``atol`` is an absolute floor on the error budget; it matters for
    integrals whose value may legitimately be zero. ``max_width`` caps the
    initial panel width, which is how oscillatory integrands get enough
    panels from the start.
    """

    lower: float
    upper: float
    rtol: float = 1e-8
    max_panels: int = 4000
    atol: float = 0.0
    max_width: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("quadrature limits must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if not 0.0 < self.rtol < 1.0:
            raise ValueError("rtol must lie in (0, 1)")
        if self.max_panels < 1:
            raise ValueError("max_panels must be >= 1")
        if self.atol < 0.0:
            raise ValueError("atol must be non-negative")
        if self.max_width is not None and not self.max_width > 0.0:
            raise ValueError("max_width must be positive")


_LOW_X, _LOW_W = np.polynomial.legendre.leggauss(12)
_HIGH_X, _HIGH_W = np.polynomial.legendre.leggauss(25)
_N_LOW = _LOW_X.size


def _eval_panels(f, a, b):
    """Gauss-Legendre 12/25 estimates on panels [a_i, b_i] in one call."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = np.concatenate(
        [mid[:, None] + half[:, None] * _LOW_X, mid[:, None] + half[:, None] * _HIGH_X],
        axis=1,
    )
    vals = np.asarray(f(nodes.ravel()), dtype=complex).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise PhysicalDomainError("integrand is not finite on the integration interval")
    low = half * (vals[:, :_N_LOW] @ _LOW_W)
    high = half * (vals[:, _N_LOW:] @ _HIGH_W)
    return high, np.abs(high - low)


def integrate(f, spec: QuadratureSpec, breakpoints=()) -> complex:
    """Adaptive Gauss-Legendre integral of ``f`` over ``[spec.lower, spec.upper]``.

    Panels are bisected worst-first until the summed error estimate drops
    below ``max(spec.rtol * |result|, spec.atol)``.

    Raises
    ------
    QuadratureError
        If ``spec.max_panels`` is reached first; the exception carries the
        best-effort value, residual and panel count.
    """
    edges = [spec.lower, spec.upper]
    edges += [p for p in breakpoints if spec.lower < p < spec.upper]
    edges = np.unique(edges)
    if spec.max_width is not None:
        refined = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            n = max(1, math.ceil((hi - lo) / spec.max_width))
            refined.append(np.linspace(lo, hi, n + 1)[:-1])
        refined.append(edges[-1:])
        edges = np.concatenate(refined)
    a, b = edges[:-1], edges[1:]
    q, err = _eval_panels(f, a, b)
    heap = [(-e, float(lo), float(hi), complex(v)) for e, lo, hi, v in zip(err, a, b, q)]
    heapq.heapify(heap)
    total = complex(np.sum(q))
    total_err = float(np.sum(err))
    while total_err > max(spec.rtol * abs(total), spec.atol):
        if len(heap) >= spec.max_panels:
            raise QuadratureError(total, total_err, len(heap))
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # interval exhausted at double precision: accept what we have
            break
        qs, es = _eval_panels(f, np.array([lo, mid]), np.array([mid, hi]))
        total += complex(qs[0] + qs[1]) - v
        total_err += float(es[0] + es[1]) + neg_e
        heapq.heappush(heap, (-float(es[0]), lo, mid, complex(qs[0])))
        heapq.heappush(heap, (-float(es[1]), mid, hi, complex(qs[1])))
        if len(heap) % 64 == 0:
            # re-sum to stop drift from the incremental updates
            total = complex(sum(item[3] for item in heap))
            total_err = float(-sum(item[0] for item in heap))
    return total


def d_dE(f, E: float, h: float | None = None) -> complex:
    """Derivative of ``f`` at energy ``E`` by Richardson-extrapolated central differences.

    The default step is ``max(E, 1) * 1e-6``; the stencil uses h, h/2 and
    h/4 and must stay inside E > 0.
    """
    if h is None:
        h = max(E, 1.0) * 1e-6
    if not h > 0.0:
        raise ValueError("step must be positive")
    if E - h <= 0.0:
        raise PhysicalDomainError(f"difference stencil around E={E} crosses E <= 0")
    steps = np.array([h, h / 2.0, h / 4.0])
    vals = np.asarray(f(np.concatenate([E + steps, E - steps])), dtype=complex)
    d = (vals[:3] - vals[3:]) / (2.0 * steps)
    r1 = (4.0 * d[1] - d[0]) / 3.0
    r2 = (4.0 * d[2] - d[1]) / 3.0
    return complex((16.0 * r2 - r1) / 15.0)
