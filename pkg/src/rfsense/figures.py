"""Figure data generators.

Each generator takes a base parameter set and a point count and returns a
list of ``(stem, Table)`` pairs; the CLI writes one CSV per pair. Axis ranges
not fixed by the physics are chosen to bracket the analytic optimum and are
echoed in the comment header of every table.
"""
from __future__ import annotations

import math
from dataclasses import asdict
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import closed_form as cf
from .measurement import snr_matrix
from .model import SystemParams, Topology, ThermalOccupancies
from .optimize import Axis, SweepSpec, run_sweep, source_revision
from .tables import Table

TOPOLOGIES = (Topology.FOUR_MODE, Topology.THREE_MODE_HIGH, Topology.THREE_MODE_LOW)

DEFAULT_POINTS = {
    "r-vs-gamma2": 200,
    "rmax-vs-gamma1": 200,
    "rmax-heatmap-eta": 60,
    "rmax-heatmap-zeta": 60,
    "snr-vs-zeta": 200,
    "snr-vs-temperature": 200,
    "r-vs-phi": 201,
    "rmax-vs-xi": 200,
}

DEFAULT_ZETA = 100.0  # 1/K


def _header(name: str, base: SystemParams, notes: List[str]) -> List[str]:
    echo = ", ".join(f"{k}={v!r}" for k, v in asdict(base).items())
    return [f"figure: {name}", f"revision: {source_revision()}", f"base: {echo}"] + notes


def _scan_table(result, drop=()) -> Table:
    keep = [i for i, c in enumerate(result.columns) if c not in drop]
    return Table(columns=[result.columns[i] for i in keep],
                 rows=[tuple(row[i] for i in keep) for row in result.rows])


def _per_topology(axis: Axis, base: SystemParams, quantities, topologies=TOPOLOGIES,
                  workers: int = 1, **spec_kw) -> Table:
    """Run one sweep per topology and join the results column-wise."""
    columns: List[str] = [axis.name]
    data: List[List[float]] = []
    for topo in topologies:
        res = run_sweep(SweepSpec(axis1=axis, quantities=tuple(quantities), topology=topo,
                                  base=base, **spec_kw), workers=workers)
        if not data:
            data.append(list(res.column(axis.name)))
        for q in list(quantities) + ["stable"]:
            columns.append(f"{q}_{topo.value}")
            data.append(list(res.column(q)))
    return Table(columns=columns, rows=list(zip(*data)))


# --- individual figures -------------------------------------------------------

def r_vs_gamma2(base: SystemParams, points: int, workers: int = 1):
    axis = Axis("gamma2", 0.1, 1e3, points, "log")
    table = _per_topology(axis, base, ("r", "r_closed", "w"), workers=workers)
    peaks = []
    for topo in TOPOLOGIES:
        xi = cf.noise_params(base, topo).xi
        peaks.append(f"{topo.value}={cf.gamma2_for_w(cf.w_opt(xi), base, topo):.6g}")
    table.comments = _header("r-vs-gamma2", base, [
        "x axis: gamma2 log-spaced over [0.1, 1e3], brackets the analytic peaks",
        "analytic peak gamma2: " + ", ".join(peaks),
        "r: matrix route; r_closed: closed form without small corrections",
    ])
    return [("r-vs-gamma2", table)]


def rmax_vs_gamma1(base: SystemParams, points: int, workers: int = 1):
    axis = Axis("gamma1", 1.0, 1e3, points, "log")
    lines = _per_topology(axis, base, ("r_max", "xi", "gamma2_w_opt"), workers=workers)
    lines.comments = _header("rmax-vs-gamma1", base, [
        "x axis: gamma1 log-spaced over [1, 1e3]; closed-form maximum over gamma2",
    ])
    n_dots = max(1, min(points, 12))
    dots_axis = Axis("gamma1", 1.0, 1e3, n_dots, "log") if n_dots > 1 else Axis("gamma1", base.gamma1, base.gamma1, 1)
    dots = _per_topology(dots_axis, base, ("r_opt_numeric", "gamma2_opt_numeric", "r_max"),
                         workers=workers)
    dots.comments = _header("rmax-vs-gamma1-numeric", base, [
        "numerical maximization of the matrix-route SNR ratio over gamma2",
        f"x axis: gamma1 log-spaced over [1, 1e3], {n_dots} points",
    ])
    return [("rmax-vs-gamma1", lines), ("rmax-vs-gamma1-numeric", dots)]


def _heatmap(name: str, base: SystemParams, second: Axis, quantities, topology: Topology,
             points: int, workers: int, notes: List[str]):
    axis = Axis("temperature", 1e-3, 10.0, points, "log")
    res = run_sweep(SweepSpec(axis1=axis, axis2=second, quantities=tuple(quantities),
                              topology=topology, base=base), workers=workers)
    table = _scan_table(res)
    table.comments = _header(name, base, [
        f"topology: {topology.value}",
        "long format; rows ordered with the second axis as the outer loop",
        "x axis: temperature log-spaced over [1e-3, 10] K",
    ] + notes)
    return [(name, table)]


def rmax_heatmap_eta(base: SystemParams, points: int, workers: int = 1,
                     topology: Topology = Topology.FOUR_MODE):
    second = Axis("eta", 1e-4, 1.0, points, "log")
    return _heatmap("rmax-heatmap-eta", base, second, ("r_max", "xi", "eta_threshold"),
                    topology, points, workers,
                    ["y axis: eta log-spaced over [1e-4, 1]",
                     "eta_threshold: enhancement requires eta above this value"])


def rmax_heatmap_zeta(base: SystemParams, points: int, workers: int = 1,
                      topology: Topology = Topology.FOUR_MODE):
    second = Axis("zeta", 1.0, 1e4, points, "log")
    return _heatmap("rmax-heatmap-zeta", base, second,
                    ("r_max", "xi", "eta", "zeta_threshold"), topology, points, workers,
                    ["y axis: zeta log-spaced over [1, 1e4] 1/K",
                     "zeta_threshold: enhancement requires zeta below this value"])


def _snr_curves(name: str, axis: Axis, base: SystemParams, workers: int, notes):
    quantities = ("snr_max_per_unit", "r_max", "snr0_closed_per_unit", "eta")
    table = _per_topology(axis, base, quantities, workers=workers)
    table.comments = _header(name, base, [
        "snr values are divided by tau*|beta|^2*epsilon^2",
        "snr_max: gamma2 at its closed-form optimum; snr0_closed: bare LC resonator",
    ] + notes)
    return [(name, table)]


def snr_vs_zeta(base: SystemParams, points: int, workers: int = 1):
    axis = Axis("zeta", 0.1, 1e4, points, "log")
    return _snr_curves("snr-vs-zeta", axis, base, workers,
                       ["x axis: zeta log-spaced over [0.1, 1e4] 1/K"])


def snr_vs_temperature(base: SystemParams, points: int, workers: int = 1):
    if base.zeta is None:
        base = base.replace(zeta=DEFAULT_ZETA)
    axis = Axis("temperature", 1e-4, 10.0, points, "log")
    return _snr_curves("snr-vs-temperature", axis, base, workers,
                       ["x axis: temperature log-spaced over [1e-4, 10] K",
                        f"detection noise: zeta = {base.zeta!r} 1/K"])


def _r_matrix(params: SystemParams, topology: Topology) -> float:
    try:
        return snr_matrix(params, topology).r
    except (ArithmeticError, ValueError, RuntimeError):
        return math.nan


def r_vs_phi(base: SystemParams, points: int, workers: int = 1):
    """Relative SNR against the loop phase (four-mode model only).

    Three curves: fixed detuning zero, detuning tracking its optimum, and the
    nonreciprocal configuration (equal cooperativities with the matching
    detuning) whose marker row sits exactly at the nonreciprocal phase.
    """
    topo = Topology.FOUR_MODE
    base = base.replace(delta=0.0, phi=0.0)
    gamma_m = base.gamma_m
    xi0 = cf.noise_params(base, topo).xi
    g2_fixed = cf.gamma2_for_w(cf.w_opt(xi0), base, topo)
    gamma = base.gamma1
    delta_nr, phi_nr = cf.nonreciprocal_point(gamma, gamma_m)

    phis = np.linspace(-math.pi, math.pi, max(points, 1) + 2)[1:-1]
    phis = np.unique(np.append(phis, phi_nr))
    occ = ThermalOccupancies.from_params(base)

    rows = []
    for phi in phis:
        phi = float(phi)
        fixed = base.replace(phi=phi, gamma2=g2_fixed)
        r0 = _r_matrix(fixed, topo)
        d_opt = cf.delta_opt(gamma, gamma_m, phi)
        tracked = fixed.replace(delta=d_opt)
        r_opt = _r_matrix(tracked, topo)
        rmax_opt = cf.r_max(cf.noise_params(tracked, topo, occ).xi)
        nr = base.replace(phi=phi, delta=delta_nr, gamma2=gamma)
        r_nr = _r_matrix(nr, topo)
        noise_nr = cf.noise_params(nr, topo, occ)
        r_im_nr = cf.r_im(noise_nr.rho, noise_nr.sigma)
        try:
            s12 = abs(snr_matrix(nr, topo).S0[0, 1])
        except (ArithmeticError, ValueError, RuntimeError):
            s12 = math.nan
        rows.append((phi, r0, d_opt, r_opt, rmax_opt, r_nr, noise_nr.w, r_im_nr, s12,
                     1.0 if phi == phi_nr else 0.0))
    table = Table(
        columns=["phi", "r_delta0", "delta_opt", "r_delta_opt", "r_max_delta_opt",
                 "r_nonreciprocal", "w_nonreciprocal", "r_im_nonreciprocal",
                 "s12_abs_nonreciprocal", "nr_marker"],
        rows=rows,
        comments=_header("r-vs-phi", base, [
            "topology: FourMode",
            "x axis: phi evenly spaced inside (-pi, pi) plus the nonreciprocal phase",
            f"r_delta0, r_delta_opt: gamma2 fixed at {g2_fixed!r} (optimum at phi = 0)",
            f"nonreciprocal curves: gamma1 = gamma2 = {gamma!r}, delta = {delta_nr!r} rad/s",
            f"nonreciprocal phase: {phi_nr!r} rad (nr_marker = 1)",
        ]),
    )
    return [("r-vs-phi", table)]


def rmax_vs_xi(base: SystemParams, points: int, workers: int = 1):
    from .optimize import minimize_denominator

    xb = cf.XI_BAR
    xis = np.linspace(0.0, xb, max(points, 1) + 2)[1:-1]
    rows = []
    for xi in xis:
        xi = float(xi)
        w_num, d_num = minimize_denominator(xi)
        rm = cf.r_max(xi)
        ri = 1.0 / (16.0 * xi)
        rows.append((xi, cf.w_opt(xi), w_num, rm, 1.0 / d_num, ri, rm - ri))
    table = Table(
        columns=["xi", "w_opt", "w_numeric", "r_max", "r_max_numeric", "r_im", "r_max_minus_r_im"],
        rows=rows,
        comments=_header("rmax-vs-xi", base, [
            f"x axis: xi evenly spaced inside (0, xi_bar), xi_bar = {xb!r}",
            "r_im = 1/(16 xi) is the impedance-matched value",
        ]),
    )
    return [("rmax-vs-xi", table)]


FIGURES: Dict[str, Callable] = {
    "r-vs-gamma2": r_vs_gamma2,
    "rmax-vs-gamma1": rmax_vs_gamma1,
    "rmax-heatmap-eta": rmax_heatmap_eta,
    "rmax-heatmap-zeta": rmax_heatmap_zeta,
    "snr-vs-zeta": snr_vs_zeta,
    "snr-vs-temperature": snr_vs_temperature,
    "r-vs-phi": r_vs_phi,
    "rmax-vs-xi": rmax_vs_xi,
}


def make_figure(name: str, base: Optional[SystemParams] = None, points: Optional[int] = None,
                workers: int = 1) -> List[Tuple[str, Table]]:
    if name not in FIGURES:
        raise KeyError(name)
    base = base or SystemParams()
    points = points or DEFAULT_POINTS[name]
    return FIGURES[name](base, points, workers=workers)
