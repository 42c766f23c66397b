"""Command-line front end: ``weaktime <command> --config PATH``.

Each command builds a ResultTable and writes it as CSV to ``--out`` (or
stdout). Exit status: 0 success, 2 bad configuration, 3 numerical
non-convergence, 4 inputs outside the physical domain.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import arrival, time_densities, two_level, weak_sim
from .config import RunConfig, load_config
from .errors import ConfigError, NumericalError, PhysicalDomainError, VanishingProbabilityError
from .numerics import d_dE
from .scattering import AmplitudeOverflowError, transmission_reflection
from .table import ResultTable, format_real

__all__ = [
    "main",
    "cmd_times",
    "cmd_asymptotic",
    "cmd_twolevel",
    "cmd_arrival",
    "cmd_weak_sim",
    "cmd_validate",
]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_DOMAIN = 0, 2, 3, 4


def _phase_times(cfg: RunConfig):
    """(t_T^Ph, t_T^Im) at the packet's central energy."""
    units, barrier, packet = cfg.units(), cfg.barrier(), cfg.packet()
    E0 = packet.momentum**2 / (2.0 * units.mass)

    def t_of(E):
        return transmission_reflection(barrier, E, units)[0]

    ratio = d_dE(t_of, E0) / complex(t_of(E0))
    return units.hbar * ratio.imag, units.hbar * ratio.real


def _opaque(exc):
    return VanishingProbabilityError(f"transmission amplitude below double range ({exc})")


def cmd_times(cfg: RunConfig, threads=None) -> ResultTable:
    units, barrier, packet = cfg.units(), cfg.barrier(), cfg.packet()
    grid = cfg.grid()
    try:
        prof = time_densities.profile(packet, barrier, grid, units, threads=threads, rtol=cfg.rtol())
    except AmplitudeOverflowError as exc:
        raise _opaque(exc) from exc
    if not prof.T > time_densities.MIN_PROBABILITY:
        raise VanishingProbabilityError(f"transmission probability {prof.T:.3g} is zero")
    phase, imag = _phase_times(cfg)
    rows = np.column_stack([prof.x, prof.dwell, prof.tunnel, prof.correction, prof.reflect])
    return ResultTable(
        columns=["x", "tau_dw", "tau_tun", "tau_corr", "tau_refl"],
        units=["length", "time/length", "time/length", "time/length", "time/length"],
        rows=rows,
        metadata=[
            ("T", format_real(prof.T)),
            ("R", format_real(prof.R)),
            ("t_T^Ph", format_real(phase)),
            ("t_T^Im", format_real(imag)),
        ],
    )


def cmd_asymptotic(cfg: RunConfig, threads=None) -> ResultTable:
    units, barrier, packet = cfg.units(), cfg.barrier(), cfg.packet()
    x2 = cfg.get("asymptotic.x2")
    try:
        res = time_densities.asymptotic_times(packet, barrier, x2, units, x1=cfg.get("asymptotic.x1"))
    except AmplitudeOverflowError as exc:
        raise _opaque(exc) from exc
    names = ["x2", "tunnel", "free_flight", "delay", "phase_time", "imag_time",
             "correction", "correction_near_barrier", "T"]
    return ResultTable(
        columns=names,
        units=["length"] + ["time"] * 7 + ["1"],
        rows=np.array([[getattr(res, n) for n in names]]),
    )


def cmd_twolevel(cfg: RunConfig, threads=None) -> ResultTable:
    tl = cfg.two_level()
    t = cfg.sweep("two_level.t_")
    if t[0] < 0:
        raise ConfigError("times must be non-negative", "two_level.t_start")
    return two_level.figures_data(tl, t)


def cmd_arrival(cfg: RunConfig, threads=None) -> ResultTable:
    """Diagonal elements swept over p or dt, or a packet swept over time.

    For the momentum and resolution sweeps ``re_pi``/``im_pi`` are the
    diagonal element <p|Pi_+|p> and ``classical_j_plus`` the classical
    value p/m (zero for p <= 0). The time sweep evaluates Pi_C for the
    configured packet and the instantaneous classical J+ of the Gaussian
    ensemble with the same phase-space moments.
    """
    units = cfg.units()
    X = cfg.get("arrival.position")
    mode = cfg.get("arrival.sweep")
    values = cfg.sweep("arrival.", cfg.get("arrival.spacing"))
    rows, metadata = [], [("sweep", mode), ("X", format_real(X))]
    try:
        if mode == "momentum":
            acfg = arrival.ArrivalConfig(X, cfg.get("arrival.resolution"), units)
            d = arrival.pi_matrix_element(values, values, acfg)
            cl = np.where(values > 0, values / units.mass, 0.0)
            rows = np.column_stack([values, d.real, d.imag, cl])
            metadata.append(("resolution", format_real(acfg.resolution)))
            unit0 = "momentum"
        elif mode == "resolution":
            p = cfg.get("arrival.momentum")
            if values[0] <= 0:
                raise ConfigError("resolution must be positive", "arrival.start")
            d = np.array([arrival.pi_matrix_element(p, p, arrival.ArrivalConfig(X, dt, units)) for dt in values])
            rows = np.column_stack([values, d.real, d.imag, np.full(values.size, max(p, 0.0) / units.mass)])
            metadata.append(("momentum", format_real(p)))
            unit0 = "time"
        else:
            acfg = arrival.ArrivalConfig(X, cfg.get("arrival.resolution"), units)
            p0, s = cfg.get("packet.momentum"), cfg.get("packet.sigma")
            x0 = cfg.get("packet.x0")
            x0 = -10.0 * units.hbar / s if x0 is None else x0
            ens = arrival.GaussianEnsemble(x0, p0, units.hbar / (2.0 * s), s, units.mass)
            out = []
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", arrival.ResolutionWarning)
                for t in values:
                    pk = arrival.MomentumGaussian(p0, s, x0, float(t))
                    c = arrival.arrival_distribution(pk, acfg, rtol=cfg.rtol())
                    out.append((t, c.real, c.imag, arrival.classical_arrival(ens, X, float(t))))
            rows = np.array(out)
            bound = arrival.resolution_bound(pk.kinetic_energy(units), units.hbar)
            metadata += [("resolution", format_real(acfg.resolution)), ("resolution_bound", format_real(bound))]
            if values.size > 1:
                norm = np.trapezoid(rows[:, 3], values)
                metadata.append(("classical_norm", format_real(norm)))
            unit0 = "time"
    except ValueError as exc:
        if isinstance(exc, (ConfigError, PhysicalDomainError)):
            raise
        raise ConfigError(str(exc), "arrival") from exc
    return ResultTable(
        columns=[mode, "re_pi", "im_pi", "classical_j_plus"],
        units=[unit0, "1/time", "1/time", "1/time"],
        rows=rows,
        metadata=metadata,
    )


def _weak_setup(cfg: RunConfig):
    tl = cfg.two_level()
    hbar = tl.hbar
    level = cfg.get("weak_sim.observed_level")
    if level is None:
        raise ConfigError("an observed level is required", "weak_sim.observed_level")
    system = weak_sim.two_level_system(tl.omega, tl.coupling, level, 0, hbar)
    try:
        det = weak_sim.DetectorState.gaussian(cfg.get("weak_sim.var_q"), cfg.get("weak_sim.chirp"), hbar=hbar)
        cc = weak_sim.CouplingConfig(cfg.get("weak_sim.strength"), cfg.get("weak_sim.time"))
    except ValueError as exc:
        raise ConfigError(str(exc), "weak_sim") from exc
    final = cfg.get("weak_sim.final")
    post = None if final is None else weak_sim.level_projector(final)
    return system, det, cc, post


def cmd_weak_sim(cfg: RunConfig, threads=None) -> ResultTable:
    """Grid-simulated time at lambda, lambda/2, lambda/4 and the lambda -> 0 row."""
    system, det, cc, post = _weak_setup(cfg)
    delay = cfg.get("weak_sim.post_delay")
    fo = weak_sim.first_order(system, cc.duration, post, delay)
    analytic = fo.symmetric + 2.0 / system.hbar * det.coefficient * fo.commutator
    runs, limit = weak_sim.extrapolate_to_weak(system, det, cc, post, delay, cfg.get("weak_sim.points"))
    rows = [(r.strength, r.time, analytic, abs(r.time - analytic)) for r in runs]
    rows.append((0.0, limit, analytic, abs(limit - analytic)))
    rows.sort(key=lambda r: r[0])
    return ResultTable(
        columns=["lambda", "simulated", "analytic", "abs_error"],
        units=["1/(length*time)", "time", "time", "time"],
        rows=np.array(rows),
        metadata=[
            ("postselection_probability", format_real(fo.probability)),
            ("symmetric", format_real(fo.symmetric)),
            ("commutator", format_real(fo.commutator)),
            ("detector_coefficient", format_real(det.coefficient)),
        ],
    )


def cmd_validate(cfg: RunConfig, threads=None, seed: int = 0) -> ResultTable:
    from .validation import run_checks

    checks = run_checks(seed=seed)
    rows = [(i, c.value, c.tolerance, float(c.passed)) for i, c in enumerate(checks)]
    return ResultTable(
        columns=["check", "value", "tolerance", "passed"],
        units=["1", "1", "1", "1"],
        rows=np.array(rows),
        comments=[f"check {i}: {c.name}" for i, c in enumerate(checks)],
    )


COMMANDS = {
    "times": cmd_times,
    "asymptotic": cmd_asymptotic,
    "two-level": cmd_twolevel,
    "arrival": cmd_arrival,
    "weak-sim": cmd_weak_sim,
    "validate": cmd_validate,
}

_FIGURE_OPTIONS = {
    "times": dict(columns=["tau_dw", "tau_tun", "tau_corr", "tau_refl"]),
    "two-level": dict(columns=["tau0", "tau1_c1", "tau0_c1_level0", "tau0_c2"]),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weaktime", description="Weak-measurement time observables in 1D.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat key = value configuration file")
    ap.add_argument("--out", help="output CSV path (default stdout)")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default all cores)")
    ap.add_argument("--tolerance", type=float, default=None, help="override quadrature.rtol")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomised validation systems")
    ap.add_argument("--figure", help="also write a PNG line plot of the table")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("must be at least 1", "--threads")
        cfg = load_config(args.config)
        if args.tolerance is not None:
            cfg = cfg.override("quadrature.rtol", args.tolerance)
        cfg.rtol()
        func = COMMANDS[args.command]
        if args.command == "validate":
            table = func(cfg, args.threads, seed=args.seed)
        else:
            table = func(cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PhysicalDomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    text = table.to_csv()
    out = args.out or cfg.get("output.path")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.figure:
        from .plotting import plot_table

        opts = dict(_FIGURE_OPTIONS.get(args.command, {}))
        if args.command == "arrival" and cfg.get("arrival.spacing") == "log":
            opts["logx"] = True
        plot_table(table, args.figure, title=args.command, **opts)
    if args.command == "validate" and not np.all(table.column("passed") == 1.0):
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
