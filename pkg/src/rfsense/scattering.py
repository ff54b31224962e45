"""Drift, perturbation and input-coupling matrices and the scattering matrices.

Modes are ordered ``(a1, a2, b1, b2)``; the 3-mode topologies drop the
inactive mechanical mode and work with genuine 3x3 matrices.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .model import Couplings, SystemParams, Topology

log = logging.getLogger(__name__)

COND_WARN = 1e8


class UnstableModelError(RuntimeError):
    """The drift matrix has an eigenvalue with non-negative real part."""

    def __init__(self, margin: float):
        super().__init__(f"drift matrix is unstable: max Re(eig) = {margin:.6g} >= 0")
        self.margin = margin


class SingularModelError(RuntimeError):
    """The drift matrix cannot be inverted numerically."""


@dataclass(frozen=True)
class ScatteringPair:
    """Zeroth-order scattering matrix and its first-order correction.

    ``S0 + epsilon * S1`` approximates the scattering matrix of the perturbed
    system. ``condition`` is the 1-norm condition number of the drift matrix.
    """

    S0: np.ndarray
    S1: np.ndarray
    condition: float
    stability_margin: float

    @property
    def ill_conditioned(self) -> bool:
        return self.condition > COND_WARN


def build_drift(params: SystemParams, couplings: Couplings, topology: Topology) -> np.ndarray:
    """Drift matrix M of the linearized Langevin equations."""
    g = {
        (1, 1): couplings.g11, (1, 2): couplings.g12,
        (2, 1): couplings.g21, (2, 2): couplings.g22,
    }
    modes = topology.mechanical_modes
    n = topology.size
    A = np.zeros((n, n), dtype=complex)
    A[0, 0] = params.kappa
    A[1, 1] = params.gamma_lc / 2
    for k, j in enumerate(modes, start=2):
        sign = -1.0 if j == 1 else 1.0
        A[k, k] = params.mechanical_damping(j) / 2 + sign * 1j * params.delta
        A[0, k] = 1j * g[1, j]
        A[1, k] = -1j * np.conj(g[2, j])
        A[k, 0] = 1j * np.conj(g[1, j])
        A[k, 1] = -1j * g[2, j]
    return -A


def build_perturbation(params: SystemParams, topology: Topology, small=None) -> np.ndarray:
    """Perturbation matrix V (rates, rad/s).

    With ``small=None`` only the dominant rf frequency shift ``omega_LC/2`` is
    kept. Otherwise ``small`` is a :class:`~rfsense.closed_form.SmallParams`
    supplying the frequency shifts and coupling corrections.
    """
    n = topology.size
    B = np.zeros((n, n), dtype=complex)
    B[1, 1] = params.omega_lc / 2
    if small is not None:
        B[0, 0] = -small.delta_shift
        B[1, 1] += small.omega_lc_shift
        gt = {1: small.g21, 2: small.g22}
        for k, j in enumerate(topology.mechanical_modes, start=2):
            B[1, k] = np.conj(gt[j])
            B[k, 1] = gt[j]
    return 1j * B


def coupling_matrix(params: SystemParams, topology: Topology) -> np.ndarray:
    """Diagonal input-coupling matrix L."""
    diag = [np.sqrt(2 * params.kappa), np.sqrt(params.gamma_lc)]
    diag += [np.sqrt(params.mechanical_damping(j)) for j in topology.mechanical_modes]
    return np.diag(diag).astype(complex)


def stability_check(M: np.ndarray) -> float:
    """Largest real part among the eigenvalues of M; negative means stable."""
    return float(np.max(np.linalg.eigvals(M).real))


def _factor(M: np.ndarray):
    margin = stability_check(M)
    if margin >= 0:
        raise UnstableModelError(margin)
    lu = lu_factor(M, check_finite=True)
    if np.any(np.diag(lu[0]) == 0):
        raise SingularModelError("drift matrix is singular")
    Minv = lu_solve(lu, np.eye(M.shape[0], dtype=complex))
    cond = float(np.linalg.norm(M, 1) * np.linalg.norm(Minv, 1))
    if cond > COND_WARN:
        log.warning("drift matrix is ill-conditioned (cond_1 = %.3e)", cond)
    return lu, margin, cond


def scattering_zeroth(M: np.ndarray, L: np.ndarray) -> np.ndarray:
    """S0 = 1 + L M^-1 L, via an LU solve."""
    lu, _, _ = _factor(M)
    return np.eye(M.shape[0]) + L @ lu_solve(lu, L)


def scattering_first_order(M: np.ndarray, V: np.ndarray, L: np.ndarray) -> np.ndarray:
    """S1 = -L M^-1 V M^-1 L."""
    lu, _, _ = _factor(M)
    return -L @ lu_solve(lu, V @ lu_solve(lu, L))


def scattering_pair(M: np.ndarray, V: Optional[np.ndarray], L: np.ndarray) -> ScatteringPair:
    """Both scattering orders from a single factorization of M."""
    lu, margin, cond = _factor(M)
    X = lu_solve(lu, L)
    S0 = np.eye(M.shape[0]) + L @ X
    if V is None:
        S1 = np.zeros_like(S0)
    else:
        S1 = -L @ lu_solve(lu, V @ X)
    return ScatteringPair(S0=S0, S1=S1, condition=cond, stability_margin=margin)


def scattering_exact(M: np.ndarray, V: np.ndarray, L: np.ndarray, epsilon: float) -> np.ndarray:
    """Scattering matrix of the perturbed drift ``M + epsilon*V`` (no expansion)."""
    return scattering_zeroth(M + epsilon * V, L)


def rf_reflection_closed(w: float) -> float:
    """rf reflection coefficient ``(w-1)/(w+1)`` of the symmetric system."""
    if w < 0:
        raise ValueError(f"w must be non-negative, got {w!r}")
    return (w - 1.0) / (w + 1.0)
