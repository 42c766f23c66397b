"""Weak-measurement time observables for one-dimensional quantum systems.

Submodules: ``numerics`` (complex erfc, adaptive quadrature), ``scattering``
(barrier amplitudes), ``wavepacket``, ``time_densities`` (tunneling and
reflection time densities), ``two_level``, ``weak_sim`` (pointer
simulation), ``arrival`` and ``cli``.
"""

from .errors import (
    ConfigError,
    NumericalError,
    PhysicalDomainError,
    QuadratureError,
    ResolutionWarning,
    SingularTimeError,
    VanishingProbabilityError,
    WeakTimeError,
    WeaknessError,
    WeaknessWarning,
)
from .scattering import Delta, Free, Rectangular, Units, amplitudes, transmission_reflection
from .wavepacket import GaussianPacket
from .time_densities import asymptotic_times, densities_at, profile
from .two_level import TwoLevelConfig, conditional_components, dwell_times
from .arrival import ArrivalConfig, arrival_distribution, classical_arrival, pi_matrix_element
from .table import ResultTable

__version__ = "0.1.0"
