"""Acceptance criteria 1-10, one test each.

Every criterion records a PASS/FAIL line that is printed in the pytest
terminal summary; running this file directly prints the same lines.
Tolerances are the ones stated by the criteria.
"""

import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from weaktime.arrival import (
    ArrivalConfig,
    MomentumGaussian,
    expectation,
    flux_expectation,
    pi_matrix_element,
    pi_minus_element,
)
from weaktime.cli import run
from weaktime.time_densities import asymptotic_times, default_grid, profile
from weaktime.errors import SingularTimeError
from weaktime.oracles import delta_as_thin_rectangle, pi_element_2d, transfer_matrix
from weaktime.scattering import Delta, Rectangular, transmission_reflection
from weaktime.two_level import TwoLevelConfig, conditional_components, dwell_times, final_probabilities
from weaktime.wavepacket import GaussianPacket
from weaktime.weak_sim import (
    CouplingConfig,
    DetectorState,
    extrapolate_to_weak,
    first_order,
    level_projector,
    two_level_system,
)

RESULTS = {}
PACKET = GaussianPacket(1.0, 0.001)
DELTA = Delta(2.0)
RECT = Rectangular(2.0, 5.0)


def record(n, passed, detail):
    RESULTS[n] = (bool(passed), detail)
    assert passed, detail


def test_1_unitarity_and_transfer_oracle():
    rng = np.random.default_rng(1)
    E = rng.uniform(0.01, 10.0, 200)
    unit, oracle = 0.0, 0.0
    for b in (DELTA, RECT):
        t, r = transmission_reflection(b, E)
        unit = max(unit, np.max(np.abs(np.abs(t) ** 2 + np.abs(r) ** 2 - 1.0)))
        for Ei, ti, ri in zip(E, t, r):
            if isinstance(b, Delta):
                refs = [transfer_matrix(Ei, spikes=[(0.0, 2.0)]), delta_as_thin_rectangle(Ei, 2.0)]
            else:
                refs = [transfer_matrix(Ei, segments=[(0.0, 5.0, 2.0)])]
            for to, ro in refs:
                oracle = max(oracle, abs(ti - to), abs(ri - ro))
    record(1, unit <= 1e-10 and oracle <= 1e-8, f"max unitarity defect {unit:.2e}, max oracle deviation {oracle:.2e}")


def test_2_dwell_decomposition():
    worst = {}
    for name, b in (("delta", DELTA), ("rectangular", RECT)):
        prof = profile(PACKET, b, default_grid())
        worst[name] = float(prof.decomposition_residual().max())
    ok = max(worst.values()) <= 1e-6
    record(2, ok, ", ".join(f"{k} residual {v:.2e}" for k, v in worst.items()))


def test_3_far_field_limits():
    # fringes decay as exp(-2 sigma^2 x^2); at sigma = 0.001 they are gone by |x| ~ 2000
    left = np.linspace(-3000.0, -2000.0, 6)
    right = np.linspace(2000.0, 3000.0, 6)
    prof = profile(PACKET, DELTA, np.concatenate([left, right]))
    tun_r = prof.tunnel[6:]
    refl_l, refl_r = prof.reflect[:6], prof.reflect[6:]
    ok = (
        np.all(np.abs(tun_r - 1.0) <= 0.05)
        and np.all(np.abs(refl_l - 2.0) <= 0.1)
        and np.all(np.abs(refl_r) <= 0.05)
    )
    record(3, ok, f"tun right {tun_r.mean():.5f}, refl left {refl_l.mean():.5f}, refl right {np.abs(refl_r).max():.2e}")


def test_4_hartman():
    grid = np.linspace(0.0, 5.0, 102)[1:-1]
    prof = profile(PACKET, RECT, grid)
    mean = float(prof.tunnel.mean())
    record(4, mean <= 0.1 * 1.0 / PACKET.momentum, f"mean under-barrier tunnel density {mean:.4f} (limit 0.1)")


def test_5_asymptotic_times():
    parts, ok = [], True
    for name, b in (("delta", DELTA), ("rectangular", RECT)):
        a = asymptotic_times(PACKET, b, 1e4)
        rel = abs(a.tunnel - a.free_flight - a.phase_time) / abs(a.phase_time)
        corr = abs(a.correction) / abs(a.phase_time)
        ok &= rel <= 1e-2 and corr <= 1e-2
        parts.append(f"{name}: delay rel err {rel:.1e}, correction/t_Ph {corr:.1e}")
    record(5, ok, "; ".join(parts))


def test_6_two_level_identities():
    rng = np.random.default_rng(6)
    worst = 0.0
    half_exact = True
    for _ in range(1000):
        cfg = TwoLevelConfig(rng.uniform(-5, 5), rng.uniform(0.05, 5))
        t = rng.uniform(0, 20)
        tau0, tau1 = dwell_times(cfg, t)
        worst = max(worst, abs(tau0 + tau1 - t))
        P0, P1 = final_probabilities(cfg, t)
        try:
            c0 = conditional_components(cfg, t, 0)
            c1 = conditional_components(cfg, t, 1)
        except SingularTimeError:
            continue
        half_exact &= c1.first_level0 == t / 2
        worst = max(
            worst,
            abs(P0 * c0.first_level0 + P1 * c1.first_level0 - tau0),
            abs(P0 * c0.first_level1 + P1 * c1.first_level1 - tau1),
        )
    cfg = TwoLevelConfig.from_frequencies(2.0, 4.0)
    detected = 0
    for n in (1, 2, 3):
        try:
            conditional_components(cfg, 2 * math.pi * n / cfg.Omega, 1)
        except SingularTimeError as exc:
            detected += exc.n == n
    ok = worst <= 1e-10 and half_exact and detected == 3
    record(6, ok, f"max identity defect {worst:.2e}, t/2 exact {half_exact}, singularities detected {detected}/3")


def test_7_weak_sim_equivalence():
    cfg = TwoLevelConfig.from_frequencies(2.0, 4.0)
    det = DetectorState.gaussian(1.0)  # unchirped: coefficient 0
    worst, comm = 0.0, 0.0
    for t in (0.5, 1.0, 2.0):
        for level, final, attr in ((0, 0, "first_level0"), (1, 0, "first_level1"), (0, 1, "first_level0")):
            system = two_level_system(cfg.omega, cfg.coupling, observed_level=level)
            expected = getattr(conditional_components(cfg, t, final), attr)
            _, sim = extrapolate_to_weak(system, det, CouplingConfig(1e-2, t), level_projector(final))
            worst = max(worst, abs(sim - expected) / abs(expected))
            fo = first_order(system, t, level_projector(final))
            comm = max(comm, abs(fo.commutator))
    # the commutator parts are far from zero, yet the unchirped pointer does not see them
    ok = worst <= 1e-3 and comm > 0.1
    record(7, ok, f"max relative deviation {worst:.2e} (commutator parts up to {comm:.3f} suppressed)")


def test_8_arrival_limits():
    dt = 1.0
    p = 6.0 * math.sqrt(2.0 / dt)
    cfg = ArrivalConfig(0.0, dt)
    pos = pi_matrix_element(p, p, cfg)
    neg = pi_matrix_element(-p, -p, cfg)
    pos_err = abs(pos.real - p) / p
    # relative to the classical scale |p|/m (unit choice fixes the absolute value)
    neg_rel = abs(neg) / p
    dts = np.logspace(-4, -2, 9)
    mags = [abs(pi_matrix_element(1.0, 1.0, ArrivalConfig(0.0, d))) for d in dts]
    slope = np.polyfit(np.log(dts), np.log(mags), 1)[0]
    pk = MomentumGaussian(1.0, 0.1, x0=-5.0, time=5.0)
    small = ArrivalConfig(0.0, 1e-4 * 1.0 * 1.0 / pk.momentum**2)
    diff = expectation(pi_matrix_element, pk, small) - expectation(pi_minus_element, pk, small)
    J = flux_expectation(pk, small)
    cur = abs(diff - J) / abs(J)
    ok = pos_err <= 1e-2 and neg_rel <= 1e-3 and abs(slope + 0.5) <= 0.02 and cur <= 1e-3
    record(8, ok, f"diag rel err {pos_err:.1e}, mirrored |value|/(p/m) {neg_rel:.1e}, slope {slope:.4f}, current rel err {cur:.1e}")


def test_9_arrival_cross_oracle():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        p1, p2 = rng.uniform(-4, 4, 2)
        X, dt = rng.uniform(-3, 3), rng.uniform(0.1, 3.0)
        a = pi_matrix_element(p1, p2, ArrivalConfig(X, dt))
        b = pi_element_2d(p1, p2, X, dt)
        worst = max(worst, abs(a - b) / abs(b))
    record(9, worst <= 1e-6, f"max relative deviation {worst:.2e} over 20 pairs")


def test_10_cli_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "d.cfg"
        cfg.write_text("barrier.type = delta\nbarrier.strength = 2\n")
        outs = []
        for threads in ("1", "7"):
            out = tmp / f"o{threads}.csv"
            assert run(["times", "--config", str(cfg), "--threads", threads, "--out", str(out)]) == 0
            outs.append(out.read_bytes())
    record(10, outs[0] == outs[1], f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}")


def summary_lines():
    names = {
        1: "unitarity + transfer-matrix oracle",
        2: "dwell decomposition",
        3: "far-field limits",
        4: "Hartman property",
        5: "asymptotic-time consistency",
        6: "two-level identities",
        7: "weak-sim oracle equivalence",
        8: "arrival limits",
        9: "arrival cross-oracle",
        10: "CLI determinism",
    }
    lines = []
    for n in sorted(names):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            lines.append(f"ACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}  {names[n]}: {detail}")
        else:
            lines.append(f"ACCEPTANCE {n:2d} FAIL  {names[n]}: not run or errored")
    return lines


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) and len(RESULTS) == 10 else 1)
