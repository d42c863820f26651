"""Channel coefficients of the commutators [V(t), p_s(t)] and [V(t), q_s(t)].

V(t) = int_0^t (p cos ws - m w q sin ws)^4 ds.  Both commutators expand on the
operator basis (p^3, W(p^2 q), W(q^2 p), q^3) as

    [V, p_s] = i hbar (A1 p^3 + 4 A2 W(p^2 q) + 4 A3 W(q^2 p) + A4 q^3)
    [V, q_s] = i hbar (B1 p^3 + 4 B2 W(p^2 q) + 4 B3 W(q^2 p) + B4 q^3)

Three evaluation paths are kept:

* ``printed`` - the published closed forms, transcribed verbatim;
* ``oracle`` - exact antiderivatives of the defining integrals (canonical);
* :func:`coeff_oracle` - adaptive quadrature of the same integrals, kept
  independent of the hard-coded antiderivatives.

:func:`derivation_integral` additionally evaluates the integrals with the
signs of the published derivation, which the printed table integrates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import OscillatorParams
from .quadrature import QuadratureError, integrate

__all__ = [
    "Side", "CoeffChannel", "CHANNELS", "CoeffSet", "CoeffDiscrepancy", "QuadratureError",
    "coeff_printed", "coeff_exact", "coeff_oracle", "derivation_integral",
    "coeff_values", "coeff_set", "mixing", "discrepancy_scan", "SOURCES",
]

SOURCES = ("oracle", "printed")


class Side(enum.Enum):
    P = "A"
    Q = "B"


@dataclass(frozen=True)
class CoeffChannel:
    side: Side
    index: int

    def __post_init__(self):
        if self.index not in (1, 2, 3, 4):
            raise ValueError(f"channel index must be 1..4, got {self.index}")

    @property
    def name(self):
        return f"{self.side.value}{self.index}"

    @classmethod
    def parse(cls, name: str) -> "CoeffChannel":
        return cls(Side(name[0].upper()), int(name[1:]))


CHANNELS = tuple(CoeffChannel(side, j) for side in (Side.P, Side.Q) for j in (1, 2, 3, 4))


def coeff_printed(channel: CoeffChannel, t, params: OscillatorParams):
    """Published closed form, term by term (``w`` is omega)."""
    m, w = params.mass, params.omega
    x = w * np.asarray(t, dtype=float)
    sin, cos = np.sin, np.cos
    table = {
        "A1": lambda: -0.25 * m * sin(x) * (6 * x + sin(2 * x)),
        "A2": lambda: -0.125 * m**2 * w * (4 * x * cos(x) - 7 * sin(x) + sin(3 * x)),
        "A3": lambda: -0.25 * m**3 * w**2 * sin(x) * (-2 * x + sin(2 * x)),
        "A4": lambda: -0.125 * (-12 * x * cos(x) + 9 * sin(x) + sin(3 * x)),
        "B1": lambda: (12 * x * cos(x) + 11 * sin(x) + 3 * sin(3 * x)) / (8 * w),
        "B2": lambda: -0.25 * m * sin(x) * (2 * x + 3 * sin(2 * x)),
        "B3": lambda: -0.125 * m**2 * w * (4 * x * cos(x) + 5 * sin(x) - 3 * sin(2 * x)),
        "B4": lambda: -0.75 / w * sin(x) * (-2 * x * cos(x) + sin(2 * x)),
    }
    return table[channel.name]()


def coeff_exact(channel: CoeffChannel, t, params: OscillatorParams):
    """Closed-form value of the defining integral (x = omega t)."""
    m, w = params.mass, params.omega
    x = w * np.asarray(t, dtype=float)
    s, c = np.sin(x), np.cos(x)
    table = {
        "A1": lambda: 0.25 * m * s * (6 * x + np.sin(2 * x)),
        "A2": lambda: 0.125 * m**2 * w * (4 * x * c - 7 * s + np.sin(3 * x)),
        "A3": lambda: 0.25 * m**3 * w**2 * s * (2 * x - np.sin(2 * x)),
        "A4": lambda: 0.5 * m**4 * w**3 * (3 * x * c + s**3 - 3 * s),
        "B1": lambda: -(12 * x * c + 11 * s + 3 * np.sin(3 * x)) / (8 * w),
        "B2": lambda: 0.25 * m * s * (2 * x + 3 * np.sin(2 * x)),
        "B3": lambda: -0.125 * m**2 * w * (4 * x * c + 5 * s - 3 * np.sin(3 * x)),
        "B4": lambda: 0.75 * m**3 * w**2 * s * (2 * x - np.sin(2 * x)),
    }
    return table[channel.name]()


# (prefactor(m, w), power of sin(ws), power of cos(ws)) for each channel.  The
# kernel is sin(w(t-s)) on the P side and cos(w(t-s)) on the Q side.  These
# follow from [X^n, Y] = n i hbar (b alpha - a beta) X^(n-1) for X = a p + b q,
# Y = alpha p + beta q, and the cubic
# (p c - m w q s)^3 = c^3 p^3 - 4 m w s c^2 W(p^2 q) + 4 m^2 w^2 s^2 c W(q^2 p) - m^3 w^3 s^3 q^3.
_INTEGRANDS = {
    "A1": (lambda m, w: 4 * m * w, 0, 3),
    "A2": (lambda m, w: -4 * m**2 * w**2, 1, 2),
    "A3": (lambda m, w: 4 * m**3 * w**3, 2, 1),
    "A4": (lambda m, w: -4 * m**4 * w**4, 3, 0),
    "B1": (lambda m, w: -4.0, 0, 3),
    "B2": (lambda m, w: 4 * m * w, 1, 2),
    "B3": (lambda m, w: -4 * m**2 * w**2, 2, 1),
    "B4": (lambda m, w: 4 * m**3 * w**3, 3, 0),
}

# Prefactors as they appear in the published derivation.
_DERIVATION_PREFACTORS = {
    "A1": lambda m, w: -4 * m * w,
    "A2": lambda m, w: 4 * m**2 * w**2,
    "A3": lambda m, w: 4 * m**3 * w**3,
    "A4": lambda m, w: 4 * m**4 * w**4,
    "B1": lambda m, w: 4.0,
    "B2": lambda m, w: -4 * m * w,
    "B3": lambda m, w: -4 * m**2 * w**2,
    "B4": lambda m, w: -4 * m**3 * w**3,
}


def _quad(channel, t, params, tol, prefactor):
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, w = params.mass, params.omega
    _, ks, kc = _INTEGRANDS[channel.name]
    pref = prefactor(m, w)
    kernel = np.sin if channel.side is Side.P else np.cos

    def f(s):
        return kernel(w * (t - s)) * np.sin(w * s) ** ks * np.cos(w * s) ** kc

    # panels sized to the oscillation so long windows do not start under-resolved
    panels = max(1, int(np.ceil(w * t / np.pi)))
    try:
        val, _ = integrate(f, 0.0, t, tol=tol / max(abs(pref), 1e-300), panels=panels)
    except QuadratureError as exc:
        raise QuadratureError(f"{channel.name}: {exc}", pref * exc.estimate, abs(pref) * exc.error) from exc
    return pref * val


def coeff_oracle(channel: CoeffChannel, t: float, params: OscillatorParams, tol: float = 1e-12) -> float:
    """Defining integral of ``channel`` at time ``t`` by adaptive quadrature."""
    return _quad(channel, t, params, tol, _INTEGRANDS[channel.name][0])


def derivation_integral(channel: CoeffChannel, t: float, params: OscillatorParams, tol: float = 1e-12) -> float:
    """The same integral with the published derivation's signs."""
    return _quad(channel, t, params, tol, _DERIVATION_PREFACTORS[channel.name])


def coeff_values(t, params, source="oracle"):
    """Array of shape (8, ...) ordered A1..A4, B1..B4."""
    if source == "oracle":
        fn = coeff_exact
    elif source == "printed":
        fn = coeff_printed
    else:
        raise ValueError(f"unknown coefficient source {source!r}; expected one of {SOURCES}")
    return np.array([fn(ch, t, params) for ch in CHANNELS])


def mixing(t, params: OscillatorParams):
    """(a1, b1, a2, b2) with p_s = b1 p + a1 q and q_s = b2 p + a2 q."""
    x = params.omega * np.asarray(t, dtype=float)
    mw = params.mass * params.omega
    return -mw * np.sin(x), np.cos(x), np.cos(x), np.sin(x) / mw


@dataclass
class CoeffSet:
    t: np.ndarray
    A: np.ndarray
    B: np.ndarray
    a1: np.ndarray
    b1: np.ndarray
    a2: np.ndarray
    b2: np.ndarray


def coeff_set(t, params, source="oracle") -> CoeffSet:
    vals = coeff_values(t, params, source)
    return CoeffSet(np.asarray(t, dtype=float), vals[:4], vals[4:], *mixing(t, params))


@dataclass
class CoeffDiscrepancy:
    channel: CoeffChannel
    max_abs_dev: float
    fitted_ratio: Optional[float]
    grid: np.ndarray
    ratio_residual: Optional[float] = None
    derivation_dev: Optional[float] = None

    def as_dict(self):
        return {
            "channel": self.channel.name,
            "max_abs_dev": self.max_abs_dev,
            "fitted_ratio": self.fitted_ratio,
            "ratio_residual": self.ratio_residual,
            "derivation_dev": self.derivation_dev,
            "grid_points": int(len(self.grid)),
            "grid_min": float(self.grid[0]),
            "grid_max": float(self.grid[-1]),
        }


def discrepancy_scan(grid, params: OscillatorParams, tol: float = 1e-12, rel_threshold: float = 1e-8):
    """Compare the printed table with quadrature of the defining integrals.

    ``fitted_ratio`` is the least-squares constant r minimizing
    |oracle - r * printed| and is only reported when the channel deviates;
    ``ratio_residual`` is the relative misfit left by that constant, so a
    value near zero means the printed form is off by a constant factor only.
    ``derivation_dev`` compares the printed form with the published
    derivation's integrand.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    out = []
    for ch in CHANNELS:
        oracle = np.array([coeff_oracle(ch, t, params, tol) for t in grid])
        deriv = np.array([derivation_integral(ch, t, params, tol) for t in grid])
        printed = coeff_printed(ch, grid, params)
        dev = float(np.max(np.abs(printed - oracle)))
        ratio = resid = None
        if dev > rel_threshold * max(float(np.max(np.abs(oracle))), 1e-300):
            denom = float(np.dot(printed, printed))
            if denom > 0:
                ratio = float(np.dot(oracle, printed) / denom)
                resid = float(np.linalg.norm(oracle - ratio * printed) / np.linalg.norm(oracle))
        out.append(CoeffDiscrepancy(ch, dev, ratio, grid, resid, float(np.max(np.abs(printed - deriv)))))
    return out
