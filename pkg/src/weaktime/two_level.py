"""Closed-form level-occupation times for a driven two-level system.

H = hbar omega sigma_3 / 2 + v sigma_+ + v* sigma_-, starting in the lower
level |0>. Only |v| matters for every quantity here; the phase of a complex
coupling is accepted and ignored.

With w = omega^2 / Omega^2 and D = (1 + w) + (1 - w) cos(Omega t), the
probability to end in |0> is D / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SingularTimeError
from .table import ResultTable

__all__ = [
    "TwoLevelConfig",
    "ConditionalComponents",
    "dwell_times",
    "final_probabilities",
    "conditional_components",
    "figures_data",
    "SINGULAR_WINDOW",
]

SINGULAR_WINDOW = 1e-6


@dataclass(frozen=True)
class TwoLevelConfig:
    omega: float
    coupling: complex = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.omega):
            raise ValueError("omega must be finite")
        if not (self.hbar > 0):
            raise ValueError("hbar must be positive")
        if not np.isfinite(abs(self.coupling)):
            raise ValueError("coupling must be finite")

    @classmethod
    def from_frequencies(cls, omega: float, Omega: float, hbar: float = 1.0):
        """Config with the given Rabi frequency; needs Omega >= |omega|."""
        if Omega < abs(omega):
            raise ValueError("Omega must be at least |omega|")
        return cls(omega, hbar * math.sqrt(Omega**2 - omega**2) / 2.0, hbar)

    @property
    def Omega(self) -> float:
        return math.sqrt(self.omega**2 + 4.0 * (abs(self.coupling) / self.hbar) ** 2)

    @property
    def w(self) -> float:
        """omega^2 / Omega^2, taken as 1 when both vanish."""
        O = self.Omega
        return 1.0 if O == 0.0 else self.omega**2 / O**2


class ConditionalComponents(NamedTuple):
    """Symmetric (1) and commutator (2) parts of the time in each level."""

    first_level0: float
    second_level0: float
    first_level1: float
    second_level1: float


def dwell_times(cfg: TwoLevelConfig, t):
    """(tau(0,t), tau(1,t)): time spent in each level up to t, no postselection."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    O, w = cfg.Omega, cfg.w
    if O == 0.0:
        tau0 = t.copy()
    else:
        tau0 = 0.5 * (1.0 + w) * t + np.sin(O * t) * (1.0 - w) / (2.0 * O)
    return tau0, t - tau0


def final_probabilities(cfg: TwoLevelConfig, t):
    """(P0, P1): probabilities to find the system in |0>, |1> at t."""
    t = np.asarray(t, dtype=float)
    p1 = (1.0 - cfg.w) * np.sin(0.5 * cfg.Omega * t) ** 2
    return 1.0 - p1, p1


def _nearest_multiple(phase, period):
    n = round(phase / period)
    return n, abs(phase - n * period)


def conditional_components(cfg: TwoLevelConfig, t: float, final: int) -> ConditionalComponents:
    """Time in levels 0 and 1 given the system is found in ``final`` at t.

    Raises SingularTimeError where the postselection probability vanishes:
    for final = 1 at Omega t = 2 pi n (and always when v = 0), for final = 0
    at Omega t = (2n + 1) pi when omega = 0.
    """
    if final not in (0, 1):
        raise ValueError("final must be 0 or 1")
    if t < 0:
        raise ValueError("t must be non-negative")
    om, O, w = cfg.omega, cfg.Omega, cfg.w
    phase = O * t
    if final == 1:
        n, dist = _nearest_multiple(phase, 2.0 * math.pi)
        if dist < SINGULAR_WINDOW or w >= 1.0:
            raise SingularTimeError(
                f"final level 1 is unreachable at Omega*t = {phase:.6g} (n = {n})", n=n, order=1
            )
        first0 = 0.5 * t
        second0 = om / (2.0 * O) * (2.0 / O - t / math.tan(0.5 * phase))
        return ConditionalComponents(first0, second0, t - first0, -second0)

    D = (1.0 + w) + (1.0 - w) * math.cos(phase)
    if D < 2.0 * SINGULAR_WINDOW**2:
        n, _ = _nearest_multiple(phase - math.pi, 2.0 * math.pi)
        raise SingularTimeError(
            f"final level 0 is unreachable at Omega*t = {phase:.6g}", n=n, order=1
        )
    s, c = math.sin(phase), math.cos(phase)
    first0 = ((1.0 + 3.0 * w) * t + (1.0 - w) * (2.0 / O * s + t * c)) / (2.0 * D) if O else t
    first1 = (1.0 - w) * (t + t * c - 2.0 / O * s) / (2.0 * D) if O else 0.0
    if O:
        half = 0.5 * phase
        second0 = (
            om / O * (1.0 - w) * math.sin(half) * (t * math.cos(half) - 2.0 / O * math.sin(half)) / D
        )
    else:
        second0 = 0.0
    return ConditionalComponents(first0, second0, first1, -second0)


def figures_data(cfg: TwoLevelConfig, t_grid) -> ResultTable:
    """Unconditional and conditional times on ``t_grid``.

    Entries that are undefined because the postselection probability is zero
    are NaN and listed in ``#singular`` comment lines.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("time grid must be a non-empty 1-D array")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    tau0, tau1 = dwell_times(cfg, t_grid)
    rows, comments = [], []
    for i, t in enumerate(t_grid):
        try:
            c1 = conditional_components(cfg, float(t), 1).first_level0
        except SingularTimeError as exc:
            c1 = math.nan
            comments.append(f"singular t={t:.17g} final=1 n={exc.n} order={exc.order}")
        try:
            c0 = conditional_components(cfg, float(t), 0)
            row0 = (c0.first_level0, c0.first_level1, c0.second_level0)
        except SingularTimeError as exc:
            row0 = (math.nan,) * 3
            comments.append(f"singular t={t:.17g} final=0 n={exc.n} order={exc.order}")
        rows.append((t, tau0[i], tau1[i], c1) + row0)
    return ResultTable(
        columns=["t", "tau0", "tau1", "tau1_c1", "tau0_c1_level0", "tau0_c1_level1", "tau0_c2"],
        units=["time"] * 7,
        rows=np.array(rows),
        metadata=[
            ("omega", "%.17g" % cfg.omega),
            ("Omega", "%.17g" % cfg.Omega),
            ("derived", "second_level1 components follow from completeness"),
        ],
        comments=comments,
    )
