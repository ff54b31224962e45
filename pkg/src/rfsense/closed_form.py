"""Closed-form expressions for the symmetric (equal couplings, equal dampings) system.

Notation: ``u`` is the residual mechanical noise after laser cooling, ``w`` the
impedance-matching parameter, ``rho = 1 + eta*u/2``, ``sigma = 1 + 2*eta*n_a2``
and ``xi = rho/sigma``. SNR values carry the common factor
``|beta|^2 eps^2 tau`` explicitly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .model import (
    HBAR,
    K_B,
    ConfigurationError,
    DomainError,
    PreconditionError,
    SystemParams,
    ThermalOccupancies,
    Topology,
    couplings_for,
    drive_frequency,
)


@dataclass(frozen=True)
class NoiseParams:
    u: float
    w: float
    rho: float
    sigma: float

    @property
    def xi(self) -> float:
        return self.rho / self.sigma


@dataclass(frozen=True)
class SmallParams:
    """First-order corrections induced by the capacitance perturbation.

    ``omega_lc_shift`` and ``delta_shift`` are the extra rf and optical frequency
    shifts, ``g21``/``g22`` the coupling corrections. ``X`` and ``Y`` are the
    resulting signal corrections; they are ``None`` when the mechanical
    dampings differ.
    """

    v: complex
    g21: complex
    g22: complex
    omega_lc_shift: float
    delta_shift: float
    X: Optional[float]
    Y: Optional[float]


# --- matching and noise parameters -------------------------------------------

def uw_four(gamma1, gamma2, delta, phi, gamma_m, n_b1, n_b2) -> Tuple[float, float]:
    """``(u, w)`` of the 4-mode model."""
    if gamma1 < 0 or gamma2 < 0:
        raise DomainError("cooperativities must be non-negative")
    c = 1.0 + gamma1 * (1.0 - math.cos(phi))
    den = gamma1 + 0.5 + 2.0 * delta ** 2 / gamma_m ** 2
    mismatch = gamma1 * math.sin(phi) - 2.0 * delta / gamma_m
    u = (n_b1 + n_b2) / den * (c + mismatch ** 2 / c)
    w = gamma2 * c / den
    return u, w


def uw_three(gamma1, gamma2, n_b) -> Tuple[float, float]:
    """``(u, w)`` of a 3-mode model with mechanical occupation ``n_b``."""
    if gamma1 < 0 or gamma2 < 0:
        raise DomainError("cooperativities must be non-negative")
    return 4.0 * n_b / (gamma1 + 1.0), gamma2 / (gamma1 + 1.0)


def uw(params: SystemParams, topology: Topology, occ: Optional[ThermalOccupancies] = None):
    occ = occ or ThermalOccupancies.from_params(params)
    if topology is Topology.FOUR_MODE:
        return uw_four(
            params.gamma1, params.gamma2, params.delta, params.phi,
            params.gamma_m, occ.n_b1, occ.n_b2,
        )
    params.gamma_m  # equal-damping precondition
    (j,) = topology.mechanical_modes
    return uw_three(params.gamma1, params.gamma2, occ.mechanical(j))


def noise_params(params: SystemParams, topology: Topology,
                 occ: Optional[ThermalOccupancies] = None) -> NoiseParams:
    occ = occ or ThermalOccupancies.from_params(params)
    u, w = uw(params, topology, occ)
    eta = params.efficiency
    return NoiseParams(u=u, w=w, rho=1.0 + eta * u / 2.0, sigma=1.0 + 2.0 * eta * occ.n_a2)


def gamma2_for_w(w: float, params: SystemParams, topology: Topology) -> float:
    """Electrical cooperativity that realizes the matching parameter ``w``."""
    if topology is Topology.FOUR_MODE:
        _, w_unit = uw_four(params.gamma1, 1.0, params.delta, params.phi, params.gamma_m, 0.0, 0.0)
        return w / w_unit
    return w * (params.gamma1 + 1.0)


def delta_opt(gamma1: float, gamma_m: float, phi: float) -> float:
    """Two-tone detuning that minimizes ``u`` at loop phase ``phi``."""
    c = 1.0 + math.cos(phi)
    if abs(c) < 1e-15:
        raise DomainError("optimal detuning is undefined at phi = pi")
    return gamma_m * (0.5 + gamma1) * math.sin(phi) / c


def nonreciprocal_point(gamma: float, gamma_m: float) -> Tuple[float, float]:
    """``(delta, phi)`` at which rf-to-optical transmission vanishes for Gamma1 = Gamma2 = gamma."""
    if 2.0 * gamma - 1.0 < 0:
        raise DomainError("nonreciprocal point requires gamma >= 1/2")
    delta = 0.5 * gamma_m * math.sqrt(2.0 * gamma - 1.0)
    z = -(gamma_m - 2j * delta) / (gamma_m + 2j * delta)
    return delta, cmath.phase(z)


def output_noise_closed(w: float, u: float, n_a2: float) -> float:
    """Zero-frequency rf output quadrature spectrum of the unperturbed system."""
    return ((w - 1.0) / (w + 1.0)) ** 2 * (1.0 + 2.0 * n_a2) + 2.0 * w * (2.0 + u) / (w + 1.0) ** 2


# --- small corrections -------------------------------------------------------

def small_params(params: SystemParams, topology: Topology) -> SmallParams:
    """Corrections of the full perturbation model.

    The bare rf frequency is approximated by the dressed ``omega_lc``; the two
    differ only at second order in the bare couplings.
    """
    couplings = couplings_for(params, topology)
    omega_x = drive_frequency(params, topology)
    z = params.gamma_lc / 2.0 + 1j * omega_x
    v = 0.25 - z * z / (params.omega_lc ** 2 + z * z)
    pref = 0.5 + 2.0 * v.real

    bare1 = {1: params.g0_11, 2: params.g0_12}
    bare2 = {1: params.g0_21, 2: params.g0_22}
    lc_sum = 0.0
    opt_sum = 0.0
    for j in topology.mechanical_modes:
        g2 = couplings.electrical(j)
        if g2 == 0:
            continue
        if not bare2[j] > 0:
            raise DomainError(f"bare electromechanical coupling g0_2{j} must be positive")
        gm = params.mechanical_damping(j)
        beta_dc = 1j * abs(g2) ** 2 / (2.0 * bare2[j] * (gm / 2.0 + 1j * params.mechanical_frequency(j)))
        lc_sum += bare2[j] * beta_dc.real
        opt_sum += bare1[j] * beta_dc.real
    omega_lc_shift = 4.0 * pref * lc_sum
    delta_shift = 2.0 * pref * opt_sum

    g21 = couplings.g21 * v
    g22 = couplings.g22 * v.conjugate()

    X = Y = None
    if math.isclose(params.gamma_m1, params.gamma_m2, rel_tol=1e-9):
        X, Y = _xy(params, topology, v, omega_lc_shift, delta_shift)
    return SmallParams(v=v, g21=g21, g22=g22, omega_lc_shift=omega_lc_shift,
                       delta_shift=delta_shift, X=X, Y=Y)


def _xy(params, topology, v, omega_lc_shift, delta_shift):
    g1, g2 = params.gamma1, params.gamma2
    lc, gl = params.omega_lc, params.gamma_lc
    if topology is Topology.FOUR_MODE:
        phi = params.phi
        c = 1.0 + g1 * (1.0 - math.cos(phi))
        den = g1 + 0.5 + 2.0 * params.delta ** 2 / params.gamma_m ** 2
        w = g2 * c / den
        w_per_g2 = c / den
        X = 2.0 * omega_lc_shift / lc - (
            w * g1 * gl * delta_shift / (params.kappa * lc)
            * (w_per_g2 + math.cos(phi) - 1.0) / c
        )
        Y = 2.0 * w * gl / lc * (v.real + v.imag * g1 * math.sin(phi) / c)
    else:
        w = g2 / (g1 + 1.0)
        X = 2.0 * omega_lc_shift / lc - w * g1 * gl * delta_shift / ((g1 + 1.0) * params.kappa * lc)
        Y = 2.0 * w * gl / lc * v.real
    return X, Y


# --- signal-to-noise ratios --------------------------------------------------

def _snr_scale(params: SystemParams) -> float:
    return (abs(params.beta) ** 2 * params.epsilon ** 2 * params.tau * params.efficiency
            * (params.omega_lc / params.gamma_lc) ** 2)


def snr_closed(params: SystemParams, u: float, w: float, X: float = 0.0, Y: float = 0.0,
               n_a2: Optional[float] = None) -> float:
    """Signal-to-noise ratio of the symmetric system at matching parameter ``w``."""
    if n_a2 is None:
        n_a2 = ThermalOccupancies.from_params(params).n_a2
    eta = params.efficiency
    num = 16.0 * _snr_scale(params) * ((1.0 + X) ** 2 + Y ** 2)
    den = (1.0 + w) ** 2 * ((1.0 + w) ** 2 + 2.0 * eta * ((1.0 - w) ** 2 * n_a2 + u * w))
    return num / den


def snr_bare(params: SystemParams, sigma: float) -> float:
    """SNR of a bare LC resonator (no electromechanical coupling)."""
    return 16.0 * _snr_scale(params) / sigma


def snr_matched(params: SystemParams, rho: float) -> float:
    """SNR at perfect impedance matching, w = 1."""
    return _snr_scale(params) / rho


def snr_max(params: SystemParams, rho: float, sigma: float) -> float:
    """SNR maximized over w (X and Y neglected)."""
    return snr_bare(params, sigma) * r_max(rho / sigma)


def r_relative(u: float, w: float, eta: float, n_a2: float) -> float:
    """SNR relative to the bare LC resonator, neglecting X and Y."""
    sigma = 1.0 + 2.0 * eta * n_a2
    return sigma / ((1.0 + w) ** 2 * ((1.0 + w) ** 2 + 2.0 * eta * ((1.0 - w) ** 2 * n_a2 + u * w)))


def r_im(rho: float, sigma: float) -> float:
    """Relative SNR at perfect impedance matching."""
    return sigma / (16.0 * rho)


# --- optimization over w -----------------------------------------------------

def denominator(w: float, xi: float) -> float:
    """Normalized SNR denominator ``(1+w)^2 [w^2 - 2(1-2xi)w + 1]``."""
    return (1.0 + w) ** 2 * (w * w - 2.0 * (1.0 - 2.0 * xi) * w + 1.0)


def xi_bar() -> float:
    """Threshold of ``xi`` below which the coupled system beats a bare LC circuit."""
    a = 23.0 * 277.0
    b = (8.0 * 3.0 * 13.0) ** 1.5
    return (37.0 - (a - b) ** (1.0 / 3.0) - (a + b) ** (1.0 / 3.0)) / 48.0


XI_BAR = xi_bar()


def w_opt_local(xi: float) -> float:
    """Local minimizer of :func:`denominator`, defined for ``0 <= xi <= 1/9``."""
    if xi < 0 or xi > 1.0 / 9.0:
        raise DomainError(f"local optimum exists only for 0 <= xi <= 1/9, got {xi!r}")
    return 1.5 * (1.0 / 3.0 - xi + math.sqrt(max((1.0 - xi) * (1.0 / 9.0 - xi), 0.0)))


def w_opt(xi: float) -> float:
    """Matching parameter that maximizes the SNR; zero above the threshold."""
    if xi < 0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    if xi >= XI_BAR:
        return 0.0
    return w_opt_local(xi)


def denominator_min(xi: float) -> float:
    """Value of :func:`denominator` at the local optimum."""
    s = 1.0 / 9.0 - xi
    if s < 0 or xi < 0:
        raise DomainError(f"local optimum exists only for 0 <= xi <= 1/9, got {xi!r}")
    # s*(1 + sqrt((1-xi)/s)), finite at s = 0
    bracket = 2.25 * (s + math.sqrt(s * (1.0 - xi)))
    return 4.0 / 3.0 * (1.0 - xi) ** 2 * (1.0 - bracket ** 2)


def r_max(xi: float) -> float:
    """Relative SNR maximized over w."""
    if xi < 0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    if xi >= XI_BAR:
        return 1.0
    return 1.0 / denominator_min(xi)


# --- detection efficiency ----------------------------------------------------

def detection_efficiency(zeta: float, temperature: float) -> float:
    if zeta < 0:
        raise DomainError("zeta must be non-negative")
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    return 1.0 / (1.0 + zeta * temperature)


def eta_threshold(u: float, n_a2: float) -> float:
    """Smallest detection efficiency for which ``xi < xi_bar``.

    Returns ``inf`` when no efficiency can satisfy the condition.
    """
    den = 2.0 * XI_BAR * n_a2 - u / 2.0
    if den <= 0:
        return math.inf
    return (1.0 - XI_BAR) / den


def u_check(params: SystemParams, topology: Topology) -> float:
    """Coefficient of ``k_B T/hbar`` in the high-temperature limit of ``u``."""
    if topology is Topology.FOUR_MODE:
        if params.delta != 0 or params.phi != 0:
            raise PreconditionError("high-temperature u is only tabulated for delta = phi = 0")
        return 2.0 * params.omega_lc / ((params.gamma1 + 0.5) * params.omega_1 * params.omega_2)
    (j,) = topology.mechanical_modes
    return 4.0 / ((params.gamma1 + 1.0) * params.mechanical_frequency(j))


def zeta_threshold(params: SystemParams, topology: Topology) -> float:
    """Largest detection-noise coefficient (1/K) that still gives enhanced sensing."""
    xb = XI_BAR
    uc = u_check(params, topology)
    lead = 2.0 * K_B / (HBAR * params.omega_lc) * xb / (1.0 - xb)
    return lead * (1.0 - params.omega_lc * uc / (4.0 * xb)) - 1.0 / params.temperature


def crossover_3v4(omega_lc: float, omega_2: float) -> bool:
    """True when the 3-mode model on the upper mechanical mode beats the 4-mode model."""
    if omega_lc <= 0 or omega_2 <= 0:
        raise ConfigurationError("frequencies must be positive")
    return omega_lc < 2.0 * omega_2 / 3.0
