"""Named invariant checks run by ``rf-sense validate``.

Every check calls library functions through their module attribute (for
example ``sc.build_drift``) so that a deliberately broken implementation
patched into a module is seen by the checks.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from . import closed_form as cf
from . import measurement as ms
from . import model as md
from . import optimize as op
from . import scattering as sc
from .model import SystemParams, Topology

TOPOLOGIES = (Topology.FOUR_MODE, Topology.THREE_MODE_HIGH, Topology.THREE_MODE_LOW)


class CheckFailure(AssertionError):
    pass


def require(ok: bool, message: str) -> None:
    if not ok:
        raise CheckFailure(message)


# --- random scenarios --------------------------------------------------------

def _loguniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_scenario(rng: np.random.Generator, topology: Topology, *,
                    w_range=None, loop_phase: bool = True) -> SystemParams:
    """Random parameter set with equal mechanical dampings.

    ``w_range=(lo, hi)`` draws the matching parameter uniformly and sets
    ``gamma2`` accordingly; otherwise ``gamma2`` is log-uniform. Four-mode
    draws include a random detuning and loop phase unless ``loop_phase`` is
    false. The rf drive frequency always stays at least 20% away from the LC
    frequency, where the perturbative corrections are no longer small.
    """
    omega_1 = _loguniform(rng, 5e5, 5e6)
    omega_2 = omega_1 * rng.uniform(1.5, 6.0)
    if topology is Topology.FOUR_MODE:
        omega_lc = 0.5 * (omega_1 + omega_2)
    elif topology is Topology.THREE_MODE_HIGH:
        # stay clear of omega_X = omega_lc, where the small corrections blow up
        x = rng.uniform(0.3, 0.75)
        omega_lc = omega_2 * (x if x < 0.45 else x + 0.15)
    else:
        omega_lc = omega_1 * rng.uniform(1.2, 4.0)
    gamma_m = _loguniform(rng, 20.0, 2e3)
    delta = phi = 0.0
    if topology is Topology.FOUR_MODE and loop_phase:
        phi = float(rng.uniform(-math.pi, math.pi))
        delta = float(rng.normal(0.0, 2.0 * gamma_m))
    params = SystemParams(
        omega_lc=omega_lc,
        gamma_lc=omega_lc / _loguniform(rng, 200.0, 5e3),
        omega_1=omega_1,
        omega_2=omega_2,
        gamma_m1=gamma_m,
        gamma_m2=gamma_m,
        kappa=_loguniform(rng, 1e4, 1e6),
        delta=delta,
        phi=phi,
        temperature=_loguniform(rng, 0.01, 1.0),
        gamma1=_loguniform(rng, 0.5, 300.0),
        gamma2=_loguniform(rng, 0.01, 300.0),
        eta=float(rng.uniform(0.01, 1.0)),
    )
    if w_range is not None:
        w = float(rng.uniform(*w_range))
        params = params.replace(gamma2=cf.gamma2_for_w(w, params, topology))
    return params


def drift_and_ports(params: SystemParams, topology: Topology, couplings=None):
    couplings = couplings or md.couplings_for(params, topology)
    M = sc.build_drift(params, couplings, topology)
    L = sc.coupling_matrix(params, topology)
    return M, L


def s22_zeroth(params: SystemParams, topology: Topology) -> complex:
    M, L = drift_and_ports(params, topology)
    return complex(sc.scattering_zeroth(M, L)[1, 1])


# --- checks ------------------------------------------------------------------

def check_occupancies() -> str:
    p = SystemParams()
    got = [md.thermal_occupancy(w, 0.1) for w in (p.omega_lc, p.omega_1, p.omega_2)]
    for g, want in zip(got, (2618, 6545, 1636)):
        require(abs(g - want) <= 1.0, f"occupancy {g:.2f} differs from {want}")
    return "n = " + ", ".join(f"{g:.1f}" for g in got)


def check_xi_bar() -> str:
    radical = cf.xi_bar()
    numeric = op.find_xi_bar_numeric()
    require(abs(radical - 0.0973) <= 2e-4, f"xi_bar = {radical}")
    require(abs(radical - numeric) <= 1e-10, f"radical {radical} vs root {numeric}")
    return f"xi_bar = {radical:.12f}, |radical - root| = {abs(radical - numeric):.1e}"


def check_w_opt_limits() -> str:
    w_bar = cf.w_opt_local(cf.XI_BAR)
    require(abs(w_bar - 0.52) <= 0.01, f"w_opt(xi_bar) = {w_bar}")
    w0 = cf.w_opt(1e-9)
    require(abs(w0 - 1.0) <= 1e-6, f"w_opt(1e-9) = {w0}")
    require(cf.w_opt(cf.XI_BAR + 1e-9) == 0.0, "w_opt must vanish above xi_bar")
    return f"w_opt(xi_bar) = {w_bar:.4f}, w_opt(1e-9) = {w0:.9f}"


def check_s22_closed_form(draws: int = 1000, seed: int = 1) -> str:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(draws):
        topo = TOPOLOGIES[k % 3]
        p = random_scenario(rng, topo)
        w = cf.noise_params(p, topo).w
        worst = max(worst, abs(s22_zeroth(p, topo) - sc.rf_reflection_closed(w)))
    require(worst < 1e-9, f"max |S0_22 - (w-1)/(w+1)| = {worst:.3e}")
    matched = 0.0
    for topo in TOPOLOGIES:
        for _ in range(5):
            p = random_scenario(rng, topo, w_range=(1.0, 1.0))
            matched = max(matched, abs(s22_zeroth(p, topo)))
    require(matched < 1e-9, f"|S0_22| at w = 1 is {matched:.3e}")
    return f"max deviation {worst:.1e} over {draws} draws; matched |S0_22| <= {matched:.1e}"


def epsilon_residual_ratios(params: SystemParams, topology: Topology,
                            epsilons=(1e-6, 1e-5, 1e-4, 1e-3), perturbation: str = "full"):
    M, L = drift_and_ports(params, topology)
    small = cf.small_params(params, topology) if perturbation == "full" else None
    V = sc.build_perturbation(params, topology, small)
    pair = sc.scattering_pair(M, V, L)
    out = []
    for eps in epsilons:
        S = sc.scattering_exact(M, V, L, eps)
        out.append(float(np.linalg.norm(S - pair.S0 - eps * pair.S1) / eps ** 2))
    return out


def check_epsilon_order() -> str:
    worst = 1.0
    for topo in TOPOLOGIES:
        p = SystemParams()
        p = op.apply_gamma2_rule(p, topo, "w_opt")
        vals = epsilon_residual_ratios(p, topo)
        spread = max(vals) / min(vals)
        worst = max(worst, spread)
        require(spread <= 1.5, f"{topo.value}: second-order residual spread {spread:.3f}")
    return f"residual/eps^2 spread <= {worst:.3f}"


def check_closed_vs_matrix(draws: int = 100, seed: int = 2) -> str:
    rng = np.random.default_rng(seed)
    worst_full = 0.0
    worst_bare = 0.0
    for k in range(draws):
        topo = TOPOLOGIES[k % 3]
        p = random_scenario(rng, topo, w_range=(0.0, 2.0))
        occ = md.ThermalOccupancies.from_params(p)
        noise = cf.noise_params(p, topo, occ)
        small = cf.small_params(p, topo)
        matrix = ms.snr_value(p, topo, "full", occ)
        closed = cf.snr_closed(p, noise.u, noise.w, small.X, small.Y, occ.n_a2)
        closed0 = cf.snr_closed(p, noise.u, noise.w, 0.0, 0.0, occ.n_a2)
        worst_full = max(worst_full, abs(matrix / closed - 1.0))
        gap = abs(matrix / closed0 - 1.0)
        bound = 10.0 * p.gamma_lc / p.omega_lc
        worst_bare = max(worst_bare, gap / bound)
    require(worst_full < 1e-9, f"matrix vs closed form (with X, Y): {worst_full:.3e}")
    require(worst_bare < 1.0, f"X = Y = 0 gap reaches {worst_bare:.3f} of its bound")
    return f"max rel. gap {worst_full:.1e}; without X, Y at most {worst_bare:.2f} of 10*gamma_lc/omega_lc"


def check_oracle_maxima(draws: int = 100, seed: int = 3) -> str:
    rng = np.random.default_rng(seed)
    worst_r = worst_w = 0.0
    done = 0
    while done < draws:
        topo = TOPOLOGIES[done % 3]
        p = random_scenario(rng, topo, loop_phase=False)
        noise = cf.noise_params(p, topo)
        if not noise.xi < cf.XI_BAR:
            continue
        best = op.maximize_over_gamma2(p, topo)
        w_star = cf.noise_params(p.replace(gamma2=best.gamma2), topo).w
        worst_r = max(worst_r, abs(best.r / cf.r_max(noise.xi) - 1.0))
        worst_w = max(worst_w, abs(w_star - cf.w_opt(noise.xi)))
        done += 1
    require(worst_r < 5e-3, f"r* vs r_max: {worst_r:.3e}")
    require(worst_w < 1e-3, f"w(gamma2*) vs w_opt: {worst_w:.3e}")
    return f"{draws} draws: rel. r gap <= {worst_r:.1e}, |w - w_opt| <= {worst_w:.1e}"


ANCHORS = {
    Topology.FOUR_MODE: 4.43,
    Topology.THREE_MODE_HIGH: 5.33,
    Topology.THREE_MODE_LOW: 1.74,
}


def check_anchor_values() -> str:
    p = SystemParams()
    got = {}
    for topo, want in ANCHORS.items():
        best = op.maximize_over_gamma2(p, topo)
        closed = cf.r_max(cf.noise_params(p, topo).xi)
        require(abs(best.r / want - 1.0) <= 0.01, f"{topo.value}: r* = {best.r:.4f}, expected {want}")
        require(abs(closed / best.r - 1.0) <= 0.01, f"{topo.value}: closed {closed:.4f} vs oracle {best.r:.4f}")
        got[topo] = best.r
    order = got[Topology.THREE_MODE_HIGH] > got[Topology.FOUR_MODE] > got[Topology.THREE_MODE_LOW]
    require(order, "expected ordering ThreeModeHigh > FourMode > ThreeModeLow")
    return ", ".join(f"{t.value} {r:.4f}" for t, r in got.items())


def check_impedance_limit(points: int = 200) -> str:
    p = SystemParams()
    noise = cf.noise_params(p, Topology.FOUR_MODE)
    rim = cf.r_im(noise.rho, noise.sigma)
    require(abs(rim / 4.17 - 1.0) <= 0.01, f"r_im = {rim:.4f}")
    xis = np.linspace(0.0, cf.XI_BAR, points + 2)[1:-1]
    gaps = [cf.r_max(x) - 1.0 / (16.0 * x) for x in xis]
    require(min(gaps) >= 0.0, f"r_max < r_im at some xi (min gap {min(gaps):.3e})")
    return f"r_im = {rim:.4f}; min(r_max - r_im) = {min(gaps):.2e}"


def nonreciprocal_params(gamma: float, base: Optional[SystemParams] = None) -> SystemParams:
    base = base or SystemParams()
    delta, phi = cf.nonreciprocal_point(gamma, base.gamma_m)
    return base.replace(gamma1=gamma, gamma2=gamma, delta=delta, phi=phi)


def check_nonreciprocity() -> str:
    topo = Topology.FOUR_MODE
    parts = []
    for gamma in (1.0, 10.0, 60.0):
        p = nonreciprocal_params(gamma)
        M, L = drift_and_ports(p, topo)
        S0 = sc.scattering_zeroth(M, L)
        w = cf.noise_params(p, topo).w
        require(abs(S0[0, 1]) < 1e-10, f"Gamma={gamma}: |S12| = {abs(S0[0, 1]):.3e}")
        require(abs(S0[1, 0]) > 0, f"Gamma={gamma}: |S21| vanishes")
        require(abs(w - 1.0) <= 1e-12, f"Gamma={gamma}: w = {w!r}")
        parts.append(f"G={gamma:g}: |S12|={abs(S0[0, 1]):.0e} |S21|={abs(S0[1, 0]):.3f}")
    return "; ".join(parts)


def crossover_scan(points: int = 200, omega_1: float = 2e6, temperature: float = 0.1,
                   gamma1: float = 1e3):
    """Compare the predicate with direct noise evaluations over omega_2/omega_1."""
    rows = []
    for ratio in np.linspace(1.5, 10.0, points):
        omega_2 = omega_1 * ratio
        omega_lc = 0.5 * (omega_1 + omega_2)
        n_b1 = md.thermal_occupancy(omega_1, temperature)
        n_b2 = md.thermal_occupancy(omega_2, temperature)
        u3, _ = cf.uw_three(gamma1, 0.0, n_b2)
        u4, _ = cf.uw_four(gamma1, 0.0, 0.0, 0.0, 1.0, n_b1, n_b2)
        rows.append((float(ratio), u3 < u4, cf.crossover_3v4(omega_lc, omega_2)))
    return rows


def check_crossover() -> str:
    bad = [r for r, direct, predicted in crossover_scan() if direct != predicted]
    require(not bad, f"predicate disagrees at omega_2/omega_1 = {bad[:5]}")
    return "predicate matches direct comparison on 200 ratios"


def temperature_profile(temperatures, zeta: float = 100.0, gamma1: float = 60.0,
                        topology: Topology = Topology.FOUR_MODE):
    base = SystemParams(gamma1=gamma1, eta=None, zeta=zeta)
    return [cf.r_max(cf.noise_params(base.replace(temperature=float(T)), topology).xi)
            for T in temperatures]


def check_temperature_robustness() -> str:
    rm = temperature_profile(np.geomspace(0.05, 5.0, 60))
    spread = max(rm) / min(rm)
    require(spread < 2.0, f"r_max varies by x{spread:.3f} over [0.05, 5] K")
    low = temperature_profile([1e-4])[0]
    require(low == 1.0, f"r_max at 1e-4 K is {low}")
    return f"spread x{spread:.3f} over [0.05, 5] K; r_max(1e-4 K) = {low}"


def gauge_snr(params: SystemParams, topology: Topology, phases) -> float:
    """Matrix SNR with the loop phase distributed over the couplings as ``phases``."""
    c = md.couplings_for(params, topology)
    mags = [abs(c.g11), abs(c.g12), abs(c.g21), abs(c.g22)]
    g = [m * np.exp(1j * t) for m, t in zip(mags, phases)]
    M, L = drift_and_ports(params, topology, md.Couplings(*g))
    V = sc.build_perturbation(params, topology)
    pair = sc.scattering_pair(M, V, L)
    occ = md.ThermalOccupancies.from_params(params)
    dm = ms.signal_delta_m(pair.S1, params.beta, params.epsilon, params.tau, params.efficiency)
    sx = ms.output_noise_spectrum(pair.S0, occ.port_vector(topology))
    return dm * dm / ms.measurement_variance(sx, params.efficiency, params.tau)


def check_gauge_invariance(draws: int = 20, seed: int = 4) -> str:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(draws):
        topo = TOPOLOGIES[k % 3]
        p = random_scenario(rng, topo)
        ref = ms.snr_value(p, topo)
        t11, t12, t21 = rng.uniform(-math.pi, math.pi, 3)
        # keep arg g11 + arg g21 - arg g12 - arg g22 equal to phi
        t22 = t11 + t21 - t12 - p.phi
        worst = max(worst, abs(gauge_snr(p, topo, (t11, t12, t21, t22)) / ref - 1.0))
    require(worst < 1e-9, f"gauge changes the SNR by {worst:.3e}")
    return f"max rel. change {worst:.1e}"


def check_variance_floor(draws: int = 50, seed: int = 5) -> str:
    rng = np.random.default_rng(seed)
    for k in range(draws):
        topo = TOPOLOGIES[k % 3]
        p = random_scenario(rng, topo)
        rep = ms.snr_matrix(p, topo)
        require(rep.sigma2 >= p.tau * (1.0 - p.efficiency) * (1 - 1e-12), "variance below floor")
        require(rep.snr >= 0.0, "negative SNR")
    # vacuum inputs with no couplings give the bare detection-normalized variance
    p = SystemParams(gamma2=0.0, gamma1=0.0)
    M, L = drift_and_ports(p, Topology.FOUR_MODE)
    S0 = sc.scattering_zeroth(M, L)
    sx = ms.output_noise_spectrum(S0, (0, 0, 0, 0))
    var = ms.measurement_variance(sx, p.efficiency, p.tau)
    require(abs(var - p.tau) < 1e-12, f"vacuum variance {var} != tau")
    return "floor and vacuum normalization hold"


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[], str]


CHECKS: List[Check] = [
    Check("occupancies", check_occupancies),
    Check("xi_bar", check_xi_bar),
    Check("w_opt_limits", check_w_opt_limits),
    Check("s22_closed_form", check_s22_closed_form),
    Check("epsilon_order", check_epsilon_order),
    Check("closed_vs_matrix", check_closed_vs_matrix),
    Check("oracle_maxima", check_oracle_maxima),
    Check("anchor_values", check_anchor_values),
    Check("impedance_limit", check_impedance_limit),
    Check("nonreciprocity", check_nonreciprocity),
    Check("crossover", check_crossover),
    Check("temperature_robustness", check_temperature_robustness),
    Check("gauge_invariance", check_gauge_invariance),
    Check("variance_floor", check_variance_floor),
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def run_checks(name_filter: Optional[str] = None) -> List[CheckResult]:
    """Run all checks whose name contains ``name_filter``."""
    results = []
    for check in CHECKS:
        if name_filter and name_filter not in check.name:
            continue
        t0 = time.perf_counter()
        try:
            detail, ok = check.run(), True
        except CheckFailure as exc:
            detail, ok = str(exc), False
        except Exception as exc:  # a crash is a failure, not an abort
            detail, ok = f"{type(exc).__name__}: {exc}", False
        results.append(CheckResult(check.name, ok, detail, time.perf_counter() - t0))
    return results


def check_names() -> Dict[str, Check]:
    return {c.name: c for c in CHECKS}
