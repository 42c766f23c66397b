"""Exception and warning types shared across the package.

The CLI maps these onto exit codes, so every failure raised by a physics
module derives from one of the three families below.
"""


class WeakTimeError(Exception):
    """Base class for all package errors."""


class ConfigError(WeakTimeError, ValueError):
    """Invalid run configuration. ``key`` names the offending dotted key."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class NumericalError(WeakTimeError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge.

    The best-effort estimate is kept in ``value`` so callers that can live
    with a looser answer may still use it.
    """

    def __init__(self, value, residual, panels):
        self.value = value
        self.residual = residual
        self.panels = panels
        super().__init__(
            f"quadrature did not converge: residual {residual:.3e} "
            f"after {panels} panels (estimate {value!r})"
        )


class ErfcOverflowError(NumericalError, OverflowError):
    """erfc(z) is not representable as a normal double."""


class PhysicalDomainError(WeakTimeError, ValueError):
    """Inputs outside the physical domain (E <= 0, T = 0, ...)."""


class VanishingProbabilityError(PhysicalDomainError):
    """A normalising probability is too small to divide by."""


class SingularTimeError(PhysicalDomainError):
    """Conditional time evaluated where the postselection probability is zero.

    ``n`` is the integer with Omega*t = 2*pi*n and ``order`` the order of the
    pole in the diverging component.
    """

    def __init__(self, message, n, order=1):
        self.n = n
        self.order = order
        super().__init__(message)


class RarePostselectionError(PhysicalDomainError):
    """Postselection probability below the weak-measurement threshold."""


class WeaknessError(PhysicalDomainError):
    """Second-order back-action exceeds 10% of the first-order pointer shift."""


class WeaknessWarning(UserWarning):
    """Coupling parameter lambda*tau*sqrt(var q)*||A||/hbar above 0.1."""


class ResolutionWarning(UserWarning):
    """Arrival-time resolution below hbar/E_k."""
