"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from rfsense import closed_form as cf
from rfsense import measurement as ms
from rfsense import optimize as op
from rfsense import scattering as sc
from rfsense.model import SystemParams, ThermalOccupancies, Topology, thermal_occupancy
from rfsense.validate import (
    crossover_scan,
    drift_and_ports,
    epsilon_residual_ratios,
    nonreciprocal_params,
    random_scenario,
    run_checks,
    temperature_profile,
)

TOPOLOGIES = list(Topology)
T4 = Topology.FOUR_MODE


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
        assert ok, detail
    return emit


def test_01_occupancy_anchor(verdict):
    t0 = time.perf_counter()
    got = [thermal_occupancy(w, 0.1) for w in (5e6, 2e6, 8e6)]
    elapsed = time.perf_counter() - t0
    ok = all(abs(g - want) <= 1 for g, want in zip(got, (2618, 6545, 1636))) and elapsed < 1e-3
    verdict(1, "occupancy anchor", ok,
            f"n = ({got[0]:.2f}, {got[1]:.2f}, {got[2]:.2f}) in {elapsed * 1e6:.0f} us")


def test_02_threshold_constant(verdict):
    t0 = time.perf_counter()
    radical = cf.xi_bar()
    root = op.find_xi_bar_numeric()
    elapsed = time.perf_counter() - t0
    ok = abs(radical - 0.0973) <= 2e-4 and abs(radical - root) <= 1e-10 and elapsed < 1e-2
    verdict(2, "threshold constant", ok,
            f"xi_bar = {radical:.10f}, |radical - root| = {abs(radical - root):.1e}, "
            f"{elapsed * 1e3:.2f} ms")


def test_03_matching_point(verdict):
    at_bar = cf.w_opt(cf.XI_BAR * (1 - 1e-12))  # left limit; w_opt drops to 0 at xi_bar
    near0 = cf.w_opt(1e-9)
    ok = abs(at_bar - 0.52) <= 0.01 and abs(near0 - 1.0) <= 1e-6
    verdict(3, "matching point", ok, f"w_opt(xi_bar) = {at_bar:.5f}, w_opt(1e-9) = {near0:.10f}")


def test_04_impedance_matching(verdict):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(1000):
        topo = TOPOLOGIES[k % 3]
        p = random_scenario(rng, topo)
        M, L = drift_and_ports(p, topo)
        s22 = sc.scattering_zeroth(M, L)[1, 1]
        w = cf.noise_params(p, topo).w
        worst = max(worst, abs(s22 - (w - 1) / (w + 1)))
    matched = 0.0
    for topo in TOPOLOGIES:
        for _ in range(10):
            p = random_scenario(rng, topo, w_range=(1.0, 1.0))
            M, L = drift_and_ports(p, topo)
            matched = max(matched, abs(sc.scattering_zeroth(M, L)[1, 1]))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and matched < 1e-9 and elapsed < 1.0
    verdict(4, "impedance matching", ok,
            f"max |S22 - (w-1)/(w+1)| = {worst:.1e}, max |S22| at w=1 = {matched:.1e}, {elapsed:.2f} s")


def test_05_closed_form_matrix_equivalence(verdict):
    # draws stay in the sensing regime, 0 <= w <= 2
    rng = np.random.default_rng(5)
    worst = 0.0
    worst_bound = 0.0
    for k in range(100):
        topo = TOPOLOGIES[k % 3]
        p = random_scenario(rng, topo, w_range=(0.0, 2.0))
        occ = ThermalOccupancies.from_params(p)
        n = cf.noise_params(p, topo, occ)
        s = cf.small_params(p, topo)
        matrix = ms.snr_value(p, topo, "full", occ)
        worst = max(worst, abs(matrix / cf.snr_closed(p, n.u, n.w, s.X, s.Y, occ.n_a2) - 1))
        gap = abs(matrix / cf.snr_closed(p, n.u, n.w, 0.0, 0.0, occ.n_a2) - 1)
        worst_bound = max(worst_bound, gap / (10 * p.gamma_lc / p.omega_lc))
    ok = worst < 1e-9 and worst_bound < 1
    verdict(5, "closed-form/matrix equivalence", ok,
            f"max rel. gap {worst:.1e}; X=Y=0 gap at most {worst_bound:.3f} x (10 gamma_lc/omega_lc)")


def test_06_optimization_oracle(verdict):
    rng = np.random.default_rng(6)
    worst_r = worst_w = 0.0
    done = 0
    while done < 100:
        topo = TOPOLOGIES[done % 3]
        p = random_scenario(rng, topo, loop_phase=False)
        xi = cf.noise_params(p, topo).xi
        if not xi < cf.XI_BAR:
            continue
        best = op.maximize_over_gamma2(p, topo)
        worst_r = max(worst_r, abs(best.r / cf.r_max(xi) - 1))
        worst_w = max(worst_w, abs(best.w - cf.w_opt(xi)))
        done += 1
    ok = worst_r < 5e-3 and worst_w < 1e-3
    verdict(6, "optimization oracle", ok,
            f"100 draws: max rel. r gap {worst_r:.1e}, max |w - w_opt| {worst_w:.1e}")


def test_07_anchor_values(verdict):
    p = SystemParams()
    t0 = time.perf_counter()
    best = {t: op.maximize_over_gamma2(p, t) for t in TOPOLOGIES}
    elapsed = time.perf_counter() - t0
    want = {T4: 4.43, Topology.THREE_MODE_HIGH: 5.33, Topology.THREE_MODE_LOW: 1.74}
    ok = elapsed < 1.0
    parts = []
    for t in TOPOLOGIES:
        closed = cf.r_max(cf.noise_params(p, t).xi)
        ok &= abs(best[t].r / want[t] - 1) <= 0.01 and abs(closed / best[t].r - 1) <= 0.01
        parts.append(f"{t.value} {best[t].r:.4f} (closed {closed:.4f})")
    ok &= best[Topology.THREE_MODE_HIGH].r > best[T4].r > best[Topology.THREE_MODE_LOW].r
    verdict(7, "anchor values", ok, ", ".join(parts) + f", {elapsed:.2f} s")


def test_08_impedance_matching_limit(verdict):
    n = cf.noise_params(SystemParams(), T4)
    rim = cf.r_im(n.rho, n.sigma)
    xis = np.linspace(0, cf.XI_BAR, 202)[1:-1]
    gap = min(cf.r_max(x) - 1 / (16 * x) for x in xis)
    ok = abs(rim / 4.17 - 1) <= 0.01 and gap >= 0
    verdict(8, "impedance-matching limit", ok, f"r_im = {rim:.4f}, min(r_max - r_im) = {gap:.3f}")


def test_09_nonreciprocity(verdict):
    ok = True
    parts = []
    for gamma in (1.0, 10.0, 60.0):
        p = nonreciprocal_params(gamma)
        M, L = drift_and_ports(p, T4)
        S0 = sc.scattering_zeroth(M, L)
        w = cf.noise_params(p, T4).w
        ok &= abs(S0[0, 1]) < 1e-10 and abs(S0[1, 0]) > 0 and abs(w - 1) <= 1e-12
        parts.append(f"G={gamma:g}: |S12|={abs(S0[0, 1]):.0e}, |S21|={abs(S0[1, 0]):.3f}, "
                     f"w-1={w - 1:.0e}")
    verdict(9, "nonreciprocity", ok, "; ".join(parts))


def test_10_crossover_law(verdict):
    rows = crossover_scan(points=200, omega_1=2e6, temperature=0.1, gamma1=1e3)
    bad = [r for r, direct, pred in rows if direct != pred]
    verdict(10, "crossover law", not bad,
            f"{len(rows)} ratios in [1.5, 10], disagreements: {len(bad)}")


def test_11_temperature_robustness(verdict):
    band = temperature_profile(np.geomspace(0.05, 5.0, 100), zeta=100.0, gamma1=60.0)
    spread = max(band) / min(band)
    cold = temperature_profile([1e-4], zeta=100.0, gamma1=60.0)[0]
    ok = spread < 2.0 and cold == 1.0
    verdict(11, "temperature robustness", ok,
            f"r_max in [{min(band):.3f}, {max(band):.3f}] over [0.05, 5] K, r_max(1e-4 K) = {cold}")


def test_12_epsilon_order(verdict):
    ok = True
    parts = []
    for t in TOPOLOGIES:
        p = op.apply_gamma2_rule(SystemParams(), t, "w_opt")
        vals = epsilon_residual_ratios(p, t, (1e-6, 1e-5, 1e-4, 1e-3))
        spread = max(vals) / min(vals)
        ok &= spread <= 1.5
        parts.append(f"{t.value} x{spread:.3f}")
    verdict(12, "epsilon-order check", ok, "residual/eps^2 spread " + ", ".join(parts))


def test_validate_suite_runtime(verdict):
    t0 = time.perf_counter()
    results = run_checks()
    elapsed = time.perf_counter() - t0
    failed = [r.name for r in results if not r.passed]
    verdict("V", "full validate suite", not failed and elapsed < 60,
            f"{len(results)} checks, failures {failed}, {elapsed:.1f} s")
