"""Parameter sets, thermal occupancies and coupling/cooperativity conversions.

All frequencies and rates are angular (rad/s). The default parameter set is
the cryogenic MHz scenario used throughout the package (omega_LC = 5e6 rad/s,
omega_1 = 2e6 rad/s, omega_2 = 8e6 rad/s, T = 0.1 K).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

DEFAULT_BARE_COUPLING = 2 * math.pi * 10.0  # rad/s

# relative tolerance for the equal-coupling precondition of the closed forms
EQUAL_COUPLING_RTOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A parameter combination does not describe a valid scenario."""


class PreconditionError(ValueError):
    """The symmetric assumptions behind a closed-form expression do not hold."""


class Topology(enum.Enum):
    """Which mechanical modes mediate the optical/rf interaction."""

    FOUR_MODE = "FourMode"
    THREE_MODE_HIGH = "ThreeModeHigh"
    THREE_MODE_LOW = "ThreeModeLow"

    @classmethod
    def parse(cls, text: str) -> "Topology":
        raw = str(text).strip().lower()
        key = raw if raw in ("3+", "3-") else raw.replace("-", "_")
        aliases = {
            "fourmode": cls.FOUR_MODE,
            "four_mode": cls.FOUR_MODE,
            "four": cls.FOUR_MODE,
            "4": cls.FOUR_MODE,
            "threemodehigh": cls.THREE_MODE_HIGH,
            "three_mode_high": cls.THREE_MODE_HIGH,
            "three_high": cls.THREE_MODE_HIGH,
            "3+": cls.THREE_MODE_HIGH,
            "threemodelow": cls.THREE_MODE_LOW,
            "three_mode_low": cls.THREE_MODE_LOW,
            "three_low": cls.THREE_MODE_LOW,
            "3-": cls.THREE_MODE_LOW,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ConfigurationError(
                f"unknown topology {text!r}; expected one of "
                + ", ".join(t.value for t in cls)
            ) from None

    @property
    def mechanical_modes(self) -> Tuple[int, ...]:
        """Indices (1 and/or 2) of the participating mechanical modes."""
        if self is Topology.FOUR_MODE:
            return (1, 2)
        if self is Topology.THREE_MODE_HIGH:
            return (2,)
        return (1,)

    @property
    def size(self) -> int:
        return 2 + len(self.mechanical_modes)

    @property
    def is_three_mode(self) -> bool:
        return self is not Topology.FOUR_MODE


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one sensing scenario.

    Exactly one of ``eta`` (detection efficiency) and ``zeta`` (detection-noise
    coefficient, 1/K) must be given; the efficiency is then ``1/(1 + zeta*T)``.
    ``gamma1`` and ``gamma2`` are the optical and electrical cooperativities.
    Bare couplings only enter the small corrections of the full perturbation
    model, never the dominant physics.
    """

    omega_lc: float = 5e6
    gamma_lc: float = 6e3
    omega_1: float = 2e6
    omega_2: float = 8e6
    gamma_m1: float = 500.0
    gamma_m2: float = 500.0
    kappa: float = 1e5
    delta: float = 0.0
    phi: float = 0.0
    temperature: float = 0.1
    gamma1: float = 60.0
    gamma2: float = 56.8
    g0_11: float = DEFAULT_BARE_COUPLING
    g0_12: float = DEFAULT_BARE_COUPLING
    g0_21: float = DEFAULT_BARE_COUPLING
    g0_22: float = DEFAULT_BARE_COUPLING
    epsilon: float = 1e-6
    beta: complex = 1.0
    tau: float = 1.0
    eta: Optional[float] = 1.0 / 11.0
    zeta: Optional[float] = None

    def __post_init__(self):
        positive = (
            "omega_lc", "gamma_lc", "omega_1", "omega_2", "gamma_m1",
            "gamma_m2", "kappa", "temperature", "tau",
        )
        for name in positive:
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        for name in ("gamma1", "gamma2", "epsilon"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if (self.eta is None) == (self.zeta is None):
            raise ConfigurationError("exactly one of eta and zeta must be supplied")
        if self.eta is not None and not (0 < self.eta <= 1):
            raise DomainError(f"eta must lie in (0, 1], got {self.eta!r}")
        if self.zeta is not None and not self.zeta >= 0:
            raise DomainError(f"zeta must be non-negative, got {self.zeta!r}")

    @property
    def efficiency(self) -> float:
        """Detection efficiency, either given directly or derived from zeta."""
        if self.eta is not None:
            return self.eta
        return 1.0 / (1.0 + self.zeta * self.temperature)

    @property
    def gamma_m(self) -> float:
        """Common mechanical damping; raises if the two dampings differ."""
        if not math.isclose(self.gamma_m1, self.gamma_m2, rel_tol=EQUAL_COUPLING_RTOL):
            raise PreconditionError(
                "closed forms assume equal mechanical dampings "
                f"(gamma_m1={self.gamma_m1}, gamma_m2={self.gamma_m2})"
            )
        return self.gamma_m1

    def mechanical_frequency(self, j: int) -> float:
        return self.omega_1 if j == 1 else self.omega_2

    def mechanical_damping(self, j: int) -> float:
        return self.gamma_m1 if j == 1 else self.gamma_m2

    def replace(self, **changes) -> "SystemParams":
        """Return a copy with ``changes`` applied; ``gamma_m`` sets both dampings."""
        if "gamma_m" in changes:
            g = changes.pop("gamma_m")
            changes.setdefault("gamma_m1", g)
            changes.setdefault("gamma_m2", g)
        if "eta" in changes and changes["eta"] is not None:
            changes.setdefault("zeta", None)
        if "zeta" in changes and changes["zeta"] is not None:
            changes.setdefault("eta", None)
        return replace(self, **changes)


@dataclass(frozen=True)
class ThermalOccupancies:
    """Mean thermal occupations of the input baths; the optical bath is empty."""

    n_a2: float
    n_b1: float
    n_b2: float

    @property
    def n_a1(self) -> float:
        return 0.0

    def mechanical(self, j: int) -> float:
        return self.n_b1 if j == 1 else self.n_b2

    def port_vector(self, topology: Topology) -> Tuple[float, ...]:
        """Occupations in matrix port order (a1, a2, active b modes)."""
        return (self.n_a1, self.n_a2) + tuple(
            self.mechanical(j) for j in topology.mechanical_modes
        )

    @classmethod
    def from_params(cls, params: SystemParams) -> "ThermalOccupancies":
        T = params.temperature
        return cls(
            n_a2=thermal_occupancy(params.omega_lc, T),
            n_b1=thermal_occupancy(params.omega_1, T),
            n_b2=thermal_occupancy(params.omega_2, T),
        )


@dataclass(frozen=True)
class Couplings:
    """Linearized many-photon coupling rates (rad/s).

    ``g1j`` couples the optical mode to mechanical mode j, ``g2j`` the rf mode.
    Entries of modes that do not participate in the topology are zero.
    """

    g11: complex = 0j
    g12: complex = 0j
    g21: complex = 0j
    g22: complex = 0j

    def optical(self, j: int) -> complex:
        return self.g11 if j == 1 else self.g12

    def electrical(self, j: int) -> complex:
        return self.g21 if j == 1 else self.g22

    def loop_phase(self) -> float:
        """Gauge-invariant phase of the closed loop a1-b1-a2-b2-a1.

        Only this combination enters the 4-mode physics; it equals the driving
        phase difference ``phi`` of the configuration.
        """
        z = self.g11 * self.g21 * self.g12.conjugate() * self.g22.conjugate()
        return math.atan2(z.imag, z.real)


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation ``1/(exp(hbar*omega/(k_B*T)) - 1)``.

    Parameters
    ----------
    omega : float
        Angular frequency (rad/s).
    temperature : float
        Temperature (K).
    """
    if not omega > 0:
        raise DomainError(f"frequency must be positive, got {omega!r}")
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature!r}")
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def cooperativities_to_couplings(
    gamma1: float,
    gamma2: float,
    kappa: float,
    gamma_lc: float,
    gamma_m,
    phi: float,
    topology: Topology,
) -> Couplings:
    """Coupling rates producing the requested cooperativities.

    ``gamma_m`` is either a common damping or a pair ``(gamma_m1, gamma_m2)``.
    The loop phase ``phi`` is carried entirely by ``g11``; all other couplings
    are real and positive.
    """
    if gamma1 < 0 or gamma2 < 0:
        raise DomainError("cooperativities must be non-negative")
    if isinstance(gamma_m, (tuple, list)):
        damping = {1: gamma_m[0], 2: gamma_m[1]}
    else:
        damping = {1: gamma_m, 2: gamma_m}
    g = {}
    for j in topology.mechanical_modes:
        g[1, j] = math.sqrt(gamma1 * kappa * damping[j] / 2.0)
        g[2, j] = math.sqrt(gamma2 * gamma_lc * damping[j] / 4.0)
    g11 = g.get((1, 1), 0.0) * complex(math.cos(phi), math.sin(phi))
    return Couplings(
        g11=g11,
        g12=complex(g.get((1, 2), 0.0)),
        g21=complex(g.get((2, 1), 0.0)),
        g22=complex(g.get((2, 2), 0.0)),
    )


def couplings_to_cooperativities(
    couplings: Couplings, kappa: float, gamma_lc: float, gamma_m: float
) -> Tuple[float, float]:
    """Invert :func:`cooperativities_to_couplings` for equal-coupling systems.

    Modes with all-zero couplings are treated as absent. Raises
    :class:`PreconditionError` if the two active optical (or electrical)
    coupling magnitudes differ by more than 1e-9 relative.
    """
    if not (kappa > 0 and gamma_lc > 0 and gamma_m > 0):
        raise DomainError("kappa, gamma_lc and gamma_m must be positive")

    def common(a: complex, b: complex, label: str) -> float:
        ma, mb = abs(a), abs(b)
        if ma == 0.0 or mb == 0.0:
            return max(ma, mb)
        if not math.isclose(ma, mb, rel_tol=EQUAL_COUPLING_RTOL):
            raise PreconditionError(f"unequal {label} coupling magnitudes {ma} and {mb}")
        return 0.5 * (ma + mb)

    g1 = common(couplings.g11, couplings.g12, "optical")
    g2 = common(couplings.g21, couplings.g22, "electrical")
    return 2.0 * g1 ** 2 / (kappa * gamma_m), 4.0 * g2 ** 2 / (gamma_lc * gamma_m)


def resonance_frequencies(
    topology: Topology,
    omega_1: float,
    omega_2: float,
    delta: float = 0.0,
    omega_lc: Optional[float] = None,
) -> Tuple[float, float]:
    """Return ``(omega_LC, omega_X)`` fixed by red-sideband driving.

    In the 4-mode model the rf frequency sits midway between the mechanical
    frequencies and ``omega_lc`` is ignored. The 3-mode models take ``omega_lc``
    as given and operate at ``delta = 0``.
    """
    if topology is Topology.FOUR_MODE:
        if omega_1 > omega_2:
            raise ConfigurationError("4-mode model requires omega_1 <= omega_2")
        return 0.5 * (omega_1 + omega_2), 0.5 * (omega_2 - omega_1) - delta
    if omega_lc is None:
        raise ConfigurationError("3-mode models need an explicit omega_lc")
    if topology is Topology.THREE_MODE_LOW:
        omega_x = omega_lc - omega_1
    else:
        omega_x = omega_2 - omega_lc
    if omega_x <= 0:
        raise ConfigurationError(
            f"{topology.value}: rf drive frequency omega_X={omega_x} must be positive"
        )
    return omega_lc, omega_x


def check_params(params: SystemParams, topology: Topology) -> None:
    """Validate topology-specific constraints of a parameter set."""
    if topology is Topology.FOUR_MODE:
        lc, _ = resonance_frequencies(topology, params.omega_1, params.omega_2, params.delta)
        if not math.isclose(lc, params.omega_lc, rel_tol=1e-9):
            raise ConfigurationError(
                f"4-mode model requires omega_lc=(omega_1+omega_2)/2={lc}, got {params.omega_lc}"
            )
    else:
        if params.delta != 0.0:
            raise ConfigurationError("3-mode models are only defined for delta = 0")
        resonance_frequencies(topology, params.omega_1, params.omega_2, 0.0, params.omega_lc)


def drive_frequency(params: SystemParams, topology: Topology) -> float:
    """Frequency ``omega_X`` of the rf drive for this scenario."""
    return resonance_frequencies(
        topology, params.omega_1, params.omega_2, params.delta, params.omega_lc
    )[1]


def couplings_for(params: SystemParams, topology: Topology) -> Couplings:
    return cooperativities_to_couplings(
        params.gamma1,
        params.gamma2,
        params.kappa,
        params.gamma_lc,
        (params.gamma_m1, params.gamma_m2),
        params.phi,
        topology,
    )


def fig3_params(**overrides) -> SystemParams:
    """Cryogenic MHz parameter set with optional overrides."""
    return SystemParams().replace(**overrides) if overrides else SystemParams()
