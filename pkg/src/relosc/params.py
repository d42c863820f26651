"""Physical parameters, natural-unit scaling and validity diagnostics.

Every downstream module works in oscillator units (hbar = m = omega = 1),
where the only remaining scale is eps = hbar*omega/(m c^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

# CODATA 2018
HBAR_SI = 1.054571817e-34          # J s
C_SI = 299792458.0                 # m / s
ELECTRON_MASS_SI = 9.1093837015e-31  # kg
ELECTRON_REST_ENERGY_EV = 510998.95  # eV
EV_SI = 1.602176634e-19            # J

CONSTANTS_TABLE = {
    "hbar [J s]": HBAR_SI,
    "c [m/s]": C_SI,
    "m_e [kg]": ELECTRON_MASS_SI,
    "m_e c^2 [eV]": ELECTRON_REST_ENERGY_EV,
    "e [J/eV]": EV_SI,
}

ETA_WARN = 0.05
VRMS_WARN = 0.15


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class OscillatorParams:
    mass: float
    omega: float
    hbar: float
    c: float

    def __post_init__(self):
        for name in ("mass", "omega", "hbar"):
            _check_positive(name, getattr(self, name))
        # c = inf is the nonrelativistic limit
        if not (self.c > 0) or math.isnan(self.c):
            raise ValueError(f"c must be positive, got {self.c!r}")

    @classmethod
    def natural(cls, eps: float = 0.0) -> "OscillatorParams":
        """Oscillator units with hbar*omega/(m c^2) = eps (eps = 0 is c = inf)."""
        if eps < 0:
            raise ValueError("eps must be non-negative")
        c = math.inf if eps == 0 else 1.0 / math.sqrt(eps)
        return cls(1.0, 1.0, 1.0, c)

    @classmethod
    def electron(cls, hbar_omega_ev: float) -> "OscillatorParams":
        """Electron in a trap whose level spacing is ``hbar_omega_ev``."""
        _check_positive("hbar_omega_ev", hbar_omega_ev)
        omega = hbar_omega_ev * EV_SI / HBAR_SI
        return cls(ELECTRON_MASS_SI, omega, HBAR_SI, C_SI)

    @property
    def inv_c2(self) -> float:
        return 0.0 if math.isinf(self.c) else (1.0 / self.c) ** 2


@dataclass(frozen=True)
class GaussianPacket:
    q0: float
    p0: float
    sigma_q: float

    def __post_init__(self):
        if not (math.isfinite(self.q0) and math.isfinite(self.p0)):
            raise ValueError("packet center must be finite")
        _check_positive("sigma_q", self.sigma_q)

    def sigma_p(self, hbar: float = 1.0) -> float:
        return hbar / (2.0 * self.sigma_q)

    def is_coherent(self, params: OscillatorParams, rtol: float = 1e-12) -> bool:
        """True when the width is the ground-state width sqrt(hbar/2m omega)."""
        ref = params.hbar / (2.0 * params.mass * params.omega)
        return abs(self.sigma_q**2 - ref) <= rtol * ref


@dataclass(frozen=True)
class ScaleRecord:
    """Multipliers taking oscillator-unit values back to input units."""

    length_scale: float
    momentum_scale: float
    time_scale: float
    energy_scale: float
    epsilon: float

    def length(self, x):
        return np.asarray(x) * self.length_scale

    def momentum(self, p):
        return np.asarray(p) * self.momentum_scale

    def time(self, t):
        return np.asarray(t) * self.time_scale

    def energy(self, e):
        return np.asarray(e) * self.energy_scale

    # variances and the uncertainty product are what the engine reports
    def q_variance(self, v):
        return np.asarray(v) * self.length_scale**2

    def p_variance(self, v):
        return np.asarray(v) * self.momentum_scale**2

    def action(self, a):
        return np.asarray(a) * self.length_scale * self.momentum_scale


def eta_e(params: OscillatorParams) -> float:
    """Relativistic scale hbar*omega / (m c^2)."""
    return params.hbar * params.omega * params.inv_c2 / params.mass


def ground_packet(params: OscillatorParams) -> GaussianPacket:
    return GaussianPacket(0.0, 0.0, math.sqrt(params.hbar / (2.0 * params.mass * params.omega)))


def to_natural(params: OscillatorParams, packet: GaussianPacket):
    """Rescale to hbar = m = omega = 1.

    Returns
    -------
    (OscillatorParams, GaussianPacket, ScaleRecord)
        The natural-unit scene and the record needed to undo the scaling.
    """
    length = math.sqrt(params.hbar / (params.mass * params.omega))
    momentum = math.sqrt(params.hbar * params.mass * params.omega)
    time = 1.0 / params.omega
    energy = params.hbar * params.omega
    eps = eta_e(params)
    record = ScaleRecord(length, momentum, time, energy, eps)
    nat = OscillatorParams.natural(eps)
    nat_packet = GaussianPacket(packet.q0 / length, packet.p0 / momentum, packet.sigma_q / length)
    return nat, nat_packet, record


def from_natural(packet: GaussianPacket, record: ScaleRecord) -> GaussianPacket:
    return GaussianPacket(
        packet.q0 * record.length_scale,
        packet.p0 * record.momentum_scale,
        packet.sigma_q * record.length_scale,
    )


@dataclass
class ValidityDiagnostics:
    eta_e: float
    v_rms_over_c: float
    warnings: list[str] = field(default_factory=list)


def validity_guard(params: OscillatorParams, packet: GaussianPacket,
                   eta_max: float = ETA_WARN, vrms_max: float = VRMS_WARN) -> ValidityDiagnostics:
    """Flag scenes where the 1/c^2 expansion is not trustworthy."""
    eta = eta_e(params)
    # <p^2(t)> never exceeds <p^2> + m^2 w^2 <q^2> under harmonic motion
    p2 = packet.p0**2 + params.hbar**2 / (4.0 * packet.sigma_q**2)
    q2 = packet.q0**2 + packet.sigma_q**2
    vrms = math.sqrt((p2 + (params.mass * params.omega)**2 * q2) * params.inv_c2) / params.mass
    warnings = []
    if eta > eta_max:
        warnings.append(f"eta_E = {eta:.4g} exceeds {eta_max:g}; first-order expansion is unreliable")
    if vrms > vrms_max:
        warnings.append(f"v_rms/c = {vrms:.4g} exceeds {vrms_max:g}; packet is too fast for the 1/c^2 expansion")
    return ValidityDiagnostics(eta, vrms, warnings)


def with_eps(params: OscillatorParams, eps: float) -> OscillatorParams:
    """Same scene with c chosen so that hbar*omega/(m c^2) = eps."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    c = math.inf if eps == 0 else math.sqrt(params.hbar * params.omega / (params.mass * eps))
    return replace(params, c=c)
