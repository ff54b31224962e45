"""Homodyne signal, rf output noise and the matrix-route signal-to-noise ratio."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import closed_form as cf
from . import scattering as sc
from .model import SystemParams, ThermalOccupancies, Topology, check_params, couplings_for

PERTURBATION_MODES = ("dominant", "full")

TAU_NOTE = (
    "stationary result; valid for detection times much longer than "
    "1/gamma_lc and 1/gamma_m"
)


class SignalNullError(RuntimeError):
    """The perturbation leaves the measured rf reflection unchanged."""


@dataclass(frozen=True)
class SensingReport:
    """Matrix-route sensing figures of merit for one scenario.

    ``snr0`` is the SNR of the same scenario with the electromechanical
    coupling switched off, so ``r = snr / snr0``. ``noise`` and ``w_opt`` come
    from the closed forms and are ``None`` when the mechanical dampings differ.
    """

    delta_m: float
    sigma2: float
    snr: float
    snr0: float
    r: float
    homodyne_phase: float
    S0: np.ndarray
    sx_out: float
    stability_margin: float
    condition: float
    noise: Optional[cf.NoiseParams] = None
    w_opt: Optional[float] = None
    metadata: dict = field(default_factory=lambda: {"tau_validity": TAU_NOTE})

    @property
    def s22(self) -> complex:
        """rf reflection coefficient of the unperturbed system."""
        return complex(self.S0[1, 1])

    @property
    def snr_per_unit(self) -> float:
        return self.snr / self._unit

    @property
    def snr0_per_unit(self) -> float:
        return self.snr0 / self._unit

    @property
    def _unit(self) -> float:
        return self.metadata.get("unit") or math.nan


def optimal_homodyne_phase(S1: np.ndarray, beta: complex) -> float:
    """Homodyne phase that turns the whole first-order rf response into signal."""
    z = complex(beta) * complex(S1[1, 1])
    if z == 0:
        raise SignalNullError("first-order rf reflection vanishes; perturbation is invisible")
    return -cmath.phase(z)


def signal_at_phase(S1: np.ndarray, beta: complex, epsilon: float, tau: float, eta: float,
                    phase: float) -> float:
    """Signal change at an arbitrary homodyne phase (diagnostics only)."""
    return 2.0 * epsilon * tau * math.sqrt(eta) * (
        complex(beta) * cmath.exp(1j * phase) * complex(S1[1, 1])
    ).real


def signal_delta_m(S1: np.ndarray, beta: complex, epsilon: float, tau: float, eta: float) -> float:
    """Signal change at the optimal homodyne phase, ``2 eps tau sqrt(eta) |beta| |S1_22|``."""
    return 2.0 * epsilon * tau * math.sqrt(eta) * abs(beta) * abs(S1[1, 1])


def output_noise_spectrum(S0: np.ndarray, occupations) -> float:
    """Zero-frequency spectrum of the rf output quadrature.

    ``occupations`` lists the bath occupations in port order, see
    :meth:`ThermalOccupancies.port_vector`.
    """
    n = np.asarray(occupations, dtype=float)
    return float(np.sum(np.abs(S0[1, :]) ** 2 * (1.0 + 2.0 * n)))


def measurement_variance(sx_out: float, eta: float, tau: float) -> float:
    """Variance of the integrated homodyne record (unit detection noise)."""
    return tau * (eta * sx_out + (1.0 - eta))


def _pieces(params: SystemParams, topology: Topology, perturbation: str,
            occ: ThermalOccupancies):
    if perturbation not in PERTURBATION_MODES:
        raise ValueError(f"perturbation must be one of {PERTURBATION_MODES}, got {perturbation!r}")
    couplings = couplings_for(params, topology)
    M = sc.build_drift(params, couplings, topology)
    L = sc.coupling_matrix(params, topology)
    small = cf.small_params(params, topology) if perturbation == "full" else None
    V = sc.build_perturbation(params, topology, small)
    pair = sc.scattering_pair(M, V, L)
    eta = params.efficiency
    dm = signal_delta_m(pair.S1, params.beta, params.epsilon, params.tau, eta)
    sx = output_noise_spectrum(pair.S0, occ.port_vector(topology))
    sigma2 = measurement_variance(sx, eta, params.tau)
    return pair, dm, sx, sigma2


def snr_value(params: SystemParams, topology: Topology, perturbation: str = "dominant",
              occ: Optional[ThermalOccupancies] = None) -> float:
    """Matrix-route SNR only; the fast path used by the optimizer."""
    occ = occ or ThermalOccupancies.from_params(params)
    _, dm, _, sigma2 = _pieces(params, topology, perturbation, occ)
    return dm * dm / sigma2


def snr_matrix(params: SystemParams, topology: Topology,
               perturbation: str = "dominant") -> SensingReport:
    """Assemble the full sensing report from the scattering matrices."""
    check_params(params, topology)
    occ = ThermalOccupancies.from_params(params)
    pair, dm, sx, sigma2 = _pieces(params, topology, perturbation, occ)
    snr = dm * dm / sigma2
    snr0 = snr_value(params.replace(gamma2=0.0), topology, perturbation, occ)
    try:
        phase = optimal_homodyne_phase(pair.S1, params.beta)
    except SignalNullError:
        phase = math.nan

    noise = w_best = None
    if math.isclose(params.gamma_m1, params.gamma_m2, rel_tol=1e-9):
        noise = cf.noise_params(params, topology, occ)
        w_best = cf.w_opt(noise.xi)

    unit = params.tau * abs(params.beta) ** 2 * params.epsilon ** 2
    return SensingReport(
        delta_m=dm,
        sigma2=sigma2,
        snr=snr,
        snr0=snr0,
        r=snr / snr0 if snr0 > 0 else math.nan,
        homodyne_phase=phase,
        S0=pair.S0,
        sx_out=sx,
        stability_margin=pair.stability_margin,
        condition=pair.condition,
        noise=noise,
        w_opt=w_best,
        metadata={"tau_validity": TAU_NOTE, "perturbation": perturbation,
                  "topology": topology.value, "unit": unit},
    )
