"""Numerical oracles for the closed-form optima and the parameter-sweep engine."""
from __future__ import annotations

import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from . import closed_form as cf
from .measurement import snr_matrix, snr_value
from .model import (
    ConfigurationError,
    SystemParams,
    ThermalOccupancies,
    Topology,
    check_params,
)
from .scattering import UnstableModelError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-8,
                   atol: float = 0.0, maximize: bool = False) -> Tuple[float, float]:
    """Golden-section search for an extremum of a unimodal ``f`` on ``[a, b]``.

    Stops once the bracket is narrower than ``rtol*max(|a|, |b|) + atol``.
    Returns ``(x, f(x))``.
    """
    sign = -1.0 if maximize else 1.0
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    while (b - a) > rtol * max(abs(a), abs(b)) + atol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = sign * f(d)
    if fc < fd:
        return c, sign * fc
    return d, sign * fd


def _grid_then_golden(f, grid: np.ndarray, rtol: float, maximize: bool):
    """Coarse scan of ``f`` on ``grid`` followed by golden refinement around the best point.

    Non-finite values (e.g. unstable points) are skipped.
    """
    values = np.array([f(x) for x in grid], dtype=float)
    finite = np.isfinite(values)
    if not finite.any():
        raise UnstableModelError(math.nan)
    masked = np.where(finite, values, -np.inf if maximize else np.inf)
    i = int(np.argmax(masked) if maximize else np.argmin(masked))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    x, fx = golden_section(f, lo, hi, rtol=rtol, atol=rtol * (grid[-1] - grid[0]) * 1e-6,
                           maximize=maximize)
    better = (fx > masked[i]) if maximize else (fx < masked[i])
    if not (np.isfinite(fx) and better):
        x, fx = float(grid[i]), float(masked[i])
    return x, fx


@dataclass(frozen=True)
class Gamma2Optimum:
    gamma2: float
    snr: float
    r: float
    w: float


def maximize_over_gamma2(params: SystemParams, topology: Topology,
                         bracket: Optional[Tuple[float, float]] = None,
                         perturbation: str = "full", points: int = 256,
                         rtol: float = 1e-8) -> Gamma2Optimum:
    """Numerically maximize the matrix-route SNR over the electrical cooperativity.

    The objective is the full scattering-matrix SNR; no closed form is used.
    Unstable points are excluded from the search.
    """
    check_params(params, topology)
    floor = 10.0 * (params.gamma1 + 1.0)
    if bracket is None:
        hi = floor
        if topology is Topology.FOUR_MODE:
            hi = max(hi, 10.0 * cf.gamma2_for_w(1.0, params, topology))
        bracket = (0.0, hi)
    lo, hi = bracket
    if lo != 0.0 or hi < floor:
        raise ValueError(f"bracket must be [0, G] with G >= 10*(gamma1+1) = {floor}")
    occ = ThermalOccupancies.from_params(params)

    def snr_at(g2: float) -> float:
        try:
            return snr_value(params.replace(gamma2=g2), topology, perturbation, occ)
        except UnstableModelError:
            return math.nan

    snr0 = snr_at(0.0)
    grid = np.linspace(lo, hi, points)
    g2, best = _grid_then_golden(snr_at, grid, rtol, maximize=True)
    w = cf.uw(params.replace(gamma2=g2), topology, occ)[1] if _equal_damping(params) else math.nan
    return Gamma2Optimum(gamma2=float(g2), snr=float(best), r=float(best / snr0), w=float(w))


def _equal_damping(params: SystemParams) -> bool:
    return math.isclose(params.gamma_m1, params.gamma_m2, rel_tol=1e-9)


def _denominator_slope(w: float, xi: float) -> float:
    b = 1.0 - 2.0 * xi
    return 2.0 * (1.0 + w) * (w * w - 2.0 * b * w + 1.0) + (1.0 + w) ** 2 * (2.0 * w - 2.0 * b)


def minimize_denominator(xi: float, w_max: float = 4.0, points: int = 401) -> Tuple[float, float]:
    """Global minimum of the normalized SNR denominator over ``0 <= w <= w_max``.

    A coarse scan locates the basin, golden-section search narrows it, and the
    stationary point is polished by bisection on the polynomial derivative.
    """
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi!r}")

    def d(w):
        return cf.denominator(w, xi)

    grid = np.linspace(0.0, w_max, points)
    w, dw = _grid_then_golden(d, grid, 1e-10, maximize=False)
    if w > 0:
        step = grid[1] - grid[0]
        a, b = max(w - step, 0.0), min(w + step, w_max)
        if _denominator_slope(a, xi) < 0 < _denominator_slope(b, xi):
            w = bisect(_denominator_slope, a, b, args=(xi,), xtol=1e-15, rtol=1e-15, maxiter=200)
            dw = d(w)
    if d(0.0) <= dw:
        return 0.0, d(0.0)
    return float(w), float(dw)


def find_xi_bar_numeric() -> float:
    """Threshold xi located by bisection on ``d(w_opt(xi)) = 1``."""
    def g(xi):
        return cf.denominator(cf.w_opt_local(xi), xi) - 1.0
    return float(bisect(g, 1e-6, 1.0 / 9.0 - 1e-6, xtol=1e-12, rtol=1e-15, maxiter=200))


# --- sweeps ------------------------------------------------------------------

PARAM_NAMES = tuple(f.name for f in fields(SystemParams)) + ("gamma_m",)
GAMMA2_RULES = ("w_opt", "matched")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in PARAM_NAMES:
            raise ConfigurationError(f"unknown sweep parameter {self.name!r}")
        if self.points < 1:
            raise ConfigurationError("an axis needs at least one point")
        if self.points >= 2 and not self.start < self.stop:
            raise ConfigurationError(f"axis {self.name}: start must be below stop")
        if self.scale not in ("linear", "log"):
            raise ConfigurationError(f"axis scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.start <= 0:
            raise ConfigurationError("log axes need a positive start")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([float(self.start)])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """Declarative 1D/2D sweep.

    ``gamma2_rule`` optionally re-tunes the electrical cooperativity at every
    point: ``"w_opt"`` to the closed-form optimum, ``"matched"`` to w = 1.
    """

    axis1: Axis
    quantities: Tuple[str, ...]
    axis2: Optional[Axis] = None
    topology: Topology = Topology.FOUR_MODE
    base: SystemParams = field(default_factory=SystemParams)
    overrides: Tuple[Tuple[str, object], ...] = ()
    gamma2_rule: Optional[str] = None
    perturbation: str = "dominant"

    def __post_init__(self):
        unknown = [q for q in self.quantities if q not in QUANTITIES]
        if unknown:
            raise ConfigurationError(f"unknown quantities {unknown}; known: {sorted(QUANTITIES)}")
        if self.gamma2_rule is not None and self.gamma2_rule not in GAMMA2_RULES:
            raise ConfigurationError(f"gamma2_rule must be one of {GAMMA2_RULES}")


@dataclass
class ScanResult:
    columns: List[str]
    rows: List[Tuple[float, ...]]
    metadata: Dict[str, object]

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)


def point_params(base: SystemParams, topology: Topology, values: Dict[str, float],
                 gamma2_rule: Optional[str] = None) -> SystemParams:
    """Apply sweep coordinates, keeping the 4-mode resonance condition intact."""
    params = base.replace(**values)
    if topology is Topology.FOUR_MODE and ({"omega_1", "omega_2"} & set(values)):
        params = params.replace(omega_lc=0.5 * (params.omega_1 + params.omega_2))
    if gamma2_rule is not None:
        params = apply_gamma2_rule(params, topology, gamma2_rule)
    return params


def apply_gamma2_rule(params: SystemParams, topology: Topology, rule: str) -> SystemParams:
    if rule == "matched":
        target = 1.0
    elif rule == "w_opt":
        target = cf.w_opt(cf.noise_params(params, topology).xi)
    else:
        raise ConfigurationError(f"unknown gamma2 rule {rule!r}")
    return params.replace(gamma2=cf.gamma2_for_w(target, params, topology))


class Point:
    """Lazily evaluated quantities at one parameter point."""

    def __init__(self, params: SystemParams, topology: Topology, perturbation: str):
        self.params = params
        self.topology = topology
        self.perturbation = perturbation

    @cached_property
    def occ(self):
        return ThermalOccupancies.from_params(self.params)

    @cached_property
    def report(self):
        return snr_matrix(self.params, self.topology, self.perturbation)

    @cached_property
    def noise(self):
        return cf.noise_params(self.params, self.topology, self.occ)

    @cached_property
    def optimum(self):
        return maximize_over_gamma2(self.params, self.topology)

    @property
    def unit_scale(self):
        p = self.params
        return p.tau * abs(p.beta) ** 2 * p.epsilon ** 2


def _per_unit(value, point):
    return value / point.unit_scale


QUANTITIES: Dict[str, Callable[[Point], float]] = {
    # matrix route
    "r": lambda p: p.report.r,
    "snr_per_unit": lambda p: p.report.snr_per_unit,
    "snr0_per_unit": lambda p: p.report.snr0_per_unit,
    "s22_abs": lambda p: abs(p.report.S0[1, 1]),
    "s12_abs": lambda p: abs(p.report.S0[0, 1]),
    "s21_abs": lambda p: abs(p.report.S0[1, 0]),
    "sx_out": lambda p: p.report.sx_out,
    "stability_margin": lambda p: p.report.stability_margin,
    "homodyne_phase": lambda p: p.report.homodyne_phase,
    # closed forms
    "u": lambda p: p.noise.u,
    "w": lambda p: p.noise.w,
    "xi": lambda p: p.noise.xi,
    "rho": lambda p: p.noise.rho,
    "sigma": lambda p: p.noise.sigma,
    "eta": lambda p: p.params.efficiency,
    "w_opt": lambda p: cf.w_opt(p.noise.xi),
    "gamma2": lambda p: p.params.gamma2,
    "gamma2_w_opt": lambda p: cf.gamma2_for_w(cf.w_opt(p.noise.xi), p.params, p.topology),
    "r_closed": lambda p: cf.r_relative(p.noise.u, p.noise.w, p.params.efficiency, p.occ.n_a2),
    "r_max": lambda p: cf.r_max(p.noise.xi),
    "r_im": lambda p: cf.r_im(p.noise.rho, p.noise.sigma),
    "snr_max_per_unit": lambda p: _per_unit(cf.snr_max(p.params, p.noise.rho, p.noise.sigma), p),
    "snr_im_per_unit": lambda p: _per_unit(cf.snr_matched(p.params, p.noise.rho), p),
    "snr0_closed_per_unit": lambda p: _per_unit(cf.snr_bare(p.params, p.noise.sigma), p),
    "eta_threshold": lambda p: cf.eta_threshold(p.noise.u, p.occ.n_a2),
    "zeta_threshold": lambda p: cf.zeta_threshold(p.params, p.topology),
    "delta_opt": lambda p: cf.delta_opt(p.params.gamma1, p.params.gamma_m, p.params.phi),
    # numerical oracle
    "r_opt_numeric": lambda p: p.optimum.r,
    "gamma2_opt_numeric": lambda p: p.optimum.gamma2,
}


def evaluate_point(params: SystemParams, topology: Topology, quantities: Sequence[str],
                   perturbation: str = "dominant") -> Tuple[Tuple[float, ...], bool]:
    """Evaluate ``quantities`` at one point; failures give NaNs and ``False``."""
    point = Point(params, topology, perturbation)
    try:
        check_params(params, topology)
        values = tuple(float(QUANTITIES[q](point)) for q in quantities)
    except (ArithmeticError, ValueError, RuntimeError):
        return tuple(math.nan for _ in quantities), False
    return values, not any(math.isnan(v) for v in values)


def _evaluate_task(task):
    coords, spec = task
    names = [spec.axis1.name] + ([spec.axis2.name] if spec.axis2 else [])
    try:
        params = point_params(spec.base.replace(**dict(spec.overrides)), spec.topology,
                              dict(zip(names, coords)), spec.gamma2_rule)
    except (ArithmeticError, ValueError, RuntimeError):
        return tuple(math.nan for _ in spec.quantities), False
    return evaluate_point(params, spec.topology, spec.quantities, spec.perturbation)


def source_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
            capture_output=True, text=True, timeout=5, check=True,
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def run_sweep(spec: SweepSpec, workers: int = 1) -> ScanResult:
    """Evaluate a sweep; rows are ordered with axis2 as the outer loop."""
    xs = spec.axis1.values()
    ys = spec.axis2.values() if spec.axis2 is not None else [None]
    coords = []
    for y in ys:
        for x in xs:
            coords.append((float(x),) if y is None else (float(x), float(y)))
    tasks = [(c, spec) for c in coords]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_evaluate_task(t) for t in tasks]

    columns = [spec.axis1.name] + ([spec.axis2.name] if spec.axis2 else [])
    columns += list(spec.quantities) + ["stable"]
    rows = [c + values + (1.0 if ok else 0.0,) for c, (values, ok) in zip(coords, results)]
    metadata = {
        "revision": source_revision(),
        "topology": spec.topology.value,
        "perturbation": spec.perturbation,
        "gamma2_rule": spec.gamma2_rule,
        "overrides": dict(spec.overrides),
        "axis1": (spec.axis1.name, spec.axis1.start, spec.axis1.stop, spec.axis1.points, spec.axis1.scale),
    }
    if spec.axis2 is not None:
        a = spec.axis2
        metadata["axis2"] = (a.name, a.start, a.stop, a.points, a.scale)
    return ScanResult(columns=columns, rows=rows, metadata=metadata)
