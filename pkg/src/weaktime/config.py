"""Flat ``section.key = value`` run configuration.

Lines starting with ``#`` and blank lines are ignored. Every key must be
known; values are converted and the physical objects built from them are
validated when requested, so errors carry the dotted key that caused them.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .scattering import Delta, Free, Rectangular, Units

__all__ = ["RunConfig", "SCHEMA", "parse_config", "load_config"]


def _choice(*options):
    def conv(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s
    return conv


def _level(s):
    if s == "none":
        return None
    v = int(s)
    if v not in (0, 1):
        raise ValueError("level must be 0, 1 or none")
    return v


# key -> (converter, default); None defaults mean "derived" or "absent"
SCHEMA = {
    "units.hbar": (float, 1.0),
    "units.mass": (float, 1.0),
    "barrier.type": (_choice("free", "delta", "rectangular"), "delta"),
    "barrier.strength": (float, 2.0),
    "barrier.height": (float, 2.0),
    "barrier.width": (float, 5.0),
    "packet.momentum": (float, 1.0),
    "packet.sigma": (float, 0.001),
    "packet.x0": (float, None),
    "grid.start": (float, -40.0),
    "grid.stop": (float, 40.0),
    "grid.points": (int, 1200),
    "quadrature.rtol": (float, 1e-8),
    "asymptotic.x2": (float, 1.0e4),
    "asymptotic.x1": (float, None),
    "arrival.position": (float, 0.0),
    "arrival.resolution": (float, 1.0),
    "arrival.momentum": (float, 1.0),
    "arrival.sweep": (_choice("momentum", "resolution", "time"), "momentum"),
    "arrival.spacing": (_choice("linear", "log"), "linear"),
    "arrival.start": (float, -4.0),
    "arrival.stop": (float, 4.0),
    "arrival.points": (int, 161),
    "two_level.omega": (float, 2.0),
    "two_level.coupling": (float, None),
    "two_level.rabi": (float, None),
    "two_level.t_start": (float, 0.0),
    "two_level.t_stop": (float, 10.0),
    "two_level.t_points": (int, 401),
    "weak_sim.time": (float, 1.0),
    "weak_sim.final": (_level, 0),
    "weak_sim.observed_level": (_level, 0),
    "weak_sim.strength": (float, 1e-2),
    "weak_sim.var_q": (float, 1.0),
    "weak_sim.chirp": (float, 0.0),
    "weak_sim.post_delay": (float, 0.0),
    "weak_sim.points": (int, 2048),
    "output.path": (str, None),
    "output.format": (_choice("csv"), "csv"),
}


def parse_config(text: str) -> "RunConfig":
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key", key)
        if key in values:
            raise ConfigError("given more than once", key)
        conv = SCHEMA[key][0]
        try:
            values[key] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", key) from None
        if isinstance(values[key], float) and not math.isfinite(values[key]):
            raise ConfigError("value must be finite", key)
    return RunConfig(values)


def load_config(path) -> "RunConfig":
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return parse_config(text)


@contextmanager
def _guard(key):
    """Re-raise ValueError from a constructor as ConfigError naming ``key``."""
    try:
        yield
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), key) from exc


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def get(self, key):
        if key not in SCHEMA:
            raise KeyError(key)
        return self.values.get(key, SCHEMA[key][1])

    def is_set(self, key) -> bool:
        return key in self.values

    def override(self, key, value) -> "RunConfig":
        if key not in SCHEMA:
            raise ConfigError("unknown key", key)
        return RunConfig({**self.values, key: value})

    # builders ---------------------------------------------------------

    def units(self) -> Units:
        with _guard("units"):
            return Units(self.get("units.hbar"), self.get("units.mass"))

    def barrier(self):
        kind = self.get("barrier.type")
        if kind == "free":
            return Free()
        if kind == "delta":
            with _guard("barrier.strength"):
                return Delta(self.get("barrier.strength"))
        with _guard("barrier.height"):
            return Rectangular(self.get("barrier.height"), self.get("barrier.width"))

    def packet(self):
        from .wavepacket import GaussianPacket

        with _guard("packet"):
            return GaussianPacket(
                self.get("packet.momentum"), self.get("packet.sigma"), self.get("packet.x0"),
                hbar=self.get("units.hbar"),
            )

    def grid(self) -> np.ndarray:
        n = self.get("grid.points")
        lo, hi = self.get("grid.start"), self.get("grid.stop")
        if n < 1:
            raise ConfigError("grid needs at least one point", "grid.points")
        if n > 1 and not hi > lo:
            raise ConfigError("grid.stop must exceed grid.start", "grid.stop")
        return np.linspace(lo, hi, n)

    def rtol(self) -> float:
        r = self.get("quadrature.rtol")
        if not 0 < r < 1:
            raise ConfigError("tolerance must lie in (0, 1)", "quadrature.rtol")
        return r

    def sweep(self, prefix: str, spacing: str = "linear") -> np.ndarray:
        """Points from ``<prefix>start``, ``<prefix>stop``, ``<prefix>points``."""
        n = self.get(prefix + "points")
        lo, hi = self.get(prefix + "start"), self.get(prefix + "stop")
        if n < 1:
            raise ConfigError("sweep needs at least one point", prefix + "points")
        if n > 1 and not hi > lo:
            raise ConfigError("stop must exceed start", prefix + "stop")
        if spacing == "log":
            if not lo > 0:
                raise ConfigError("log spacing needs a positive start", prefix + "start")
            return np.geomspace(lo, hi, n)
        return np.linspace(lo, hi, n)

    def two_level(self):
        from .two_level import TwoLevelConfig

        omega = self.get("two_level.omega")
        hbar = self.get("units.hbar")
        coupling, rabi = self.get("two_level.coupling"), self.get("two_level.rabi")
        if coupling is not None and rabi is not None:
            raise ConfigError("give either two_level.coupling or two_level.rabi", "two_level.rabi")
        if coupling is None:
            with _guard("two_level.rabi"):
                return TwoLevelConfig.from_frequencies(omega, 4.0 if rabi is None else rabi, hbar)
        with _guard("two_level.coupling"):
            return TwoLevelConfig(omega, coupling, hbar)
