"""First-order (1/c^2) corrections to the Gaussian packet's variances.

The canonical path assembles

    cov(p_s, [V, p_s]) / (i hbar) = sum_j c_j [b1 cov(p, O_j) + a1 cov(q, O_j)]
    cov(q_s, [V, q_s]) / (i hbar) = sum_j d_j [b2 cov(p, O_j) + a2 cov(q, O_j)]

with c = (A1, 4A2, 4A3, A4), d = (B1, 4B2, 4B3, B4), O = (p^3, W(p^2 q), W(q^2 p), q^3)
and the mixing p_s = b1 p + a1 q, q_s = b2 p + a2 q of the free Heisenberg flow.
Each variance then shifts by cov(., [V, .]) / (i hbar) / (4 m^3 c^2).

The long printed expressions are available through :func:`verbatim` for
comparison only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import coeff_printed, coeff_values, mixing, CHANNELS
from .gaussian import static_covariances
from .params import GaussianPacket, OscillatorParams, ScaleRecord, ground_packet

__all__ = [
    "MomentSeries", "ScalingSample", "DiscrepancyEntry", "DiscrepancyReport", "FORMULAS",
    "nr_variances", "cov_vps", "cov_vqs", "rel_variances", "uncertainty_product",
    "verbatim", "scaling_functions", "series", "secular_fit", "discrepancy_report",
]

FORMULAS = ("relpv", "relqv", "relmug", "covps", "covqs")
_CHANNEL_WEIGHTS = np.array([1.0, 4.0, 4.0, 1.0])


def _cov_vectors(packet, hbar):
    ct = static_covariances(packet, hbar)
    cov_p = np.array([ct.cov_p_p3, ct.cov_p_Wp2q, ct.cov_p_Wq2p, ct.cov_p_q3])
    cov_q = np.array([ct.cov_q_p3, ct.cov_q_Wp2q, ct.cov_q_Wq2p, ct.cov_q_q3])
    return cov_p, cov_q


def _contract(coeffs, along_p, along_q, cov_p, cov_q):
    coeffs = _CHANNEL_WEIGHTS.reshape((4,) + (1,) * (coeffs.ndim - 1)) * coeffs
    mixed = along_p * cov_p.reshape(coeffs.shape[:1] + (1,) * (coeffs.ndim - 1)) \
        + along_q * cov_q.reshape(coeffs.shape[:1] + (1,) * (coeffs.ndim - 1))
    return np.sum(coeffs * mixed, axis=0)


def nr_variances(packet: GaussianPacket, params: OscillatorParams, t):
    """Free-oscillator variances and their product (no q-p correlation at t = 0)."""
    x = params.omega * np.asarray(t, dtype=float)
    mw = params.mass * params.omega
    sq2 = packet.sigma_q**2
    sp2 = packet.sigma_p(params.hbar) ** 2
    c2, s2 = np.cos(x) ** 2, np.sin(x) ** 2
    var_q = c2 * sq2 + s2 * sp2 / mw**2
    var_p = c2 * sp2 + mw**2 * s2 * sq2
    return var_q, var_p, np.sqrt(var_q * var_p)


def cov_vps(t, packet: GaussianPacket, params: OscillatorParams, source: str = "oracle"):
    """cov(p_s(t), [V(t), p_s(t)]) / (i hbar); real."""
    cv = coeff_values(t, params, source)
    a1, b1, _, _ = mixing(t, params)
    cov_p, cov_q = _cov_vectors(packet, params.hbar)
    return _contract(cv[:4], b1, a1, cov_p, cov_q)


def cov_vqs(t, packet: GaussianPacket, params: OscillatorParams, source: str = "oracle"):
    """cov(q_s(t), [V(t), q_s(t)]) / (i hbar); real and independent of c."""
    cv = coeff_values(t, params, source)
    _, _, a2, b2 = mixing(t, params)
    cov_p, cov_q = _cov_vectors(packet, params.hbar)
    return _contract(cv[4:], b2, a2, cov_p, cov_q)


def _corrections(t, packet, params, source):
    pref = params.inv_c2 / (4.0 * params.mass**3)
    return pref * cov_vqs(t, packet, params, source), pref * cov_vps(t, packet, params, source)


def rel_variances(t, packet: GaussianPacket, params: OscillatorParams, source: str = "oracle"):
    """(sigma_q^2, sigma_p^2) including the first-order correction."""
    var_q, var_p, _ = nr_variances(packet, params, t)
    corr_q, corr_p = _corrections(t, packet, params, source)
    return var_q + corr_q, var_p + corr_p


def uncertainty_product(t, packet: GaussianPacket, params: OscillatorParams,
                        source: str = "oracle", form: str = "product"):
    """sigma_q sigma_p to first order in 1/c^2.

    ``form="product"`` linearizes sqrt(sigma_q^2 sigma_p^2) about the free
    values and works for any packet.  ``form="linearized"`` is the
    hbar/2-anchored expression, valid for coherent packets only.
    """
    if form == "linearized":
        if not packet.is_coherent(params):
            raise ValueError("the hbar/2-anchored form needs a coherent packet (sigma_q^2 = hbar / 2 m omega)")
        h = params.hbar
        x_q = cov_vqs(t, packet, params, source)
        x_p = cov_vps(t, packet, params, source)
        sq2 = packet.sigma_q**2
        return 0.5 * h * (1.0 + params.inv_c2 / (8 * params.mass**3) * (x_q / sq2 + 4 * sq2 * x_p / h**2))
    if form != "product":
        raise ValueError(f"unknown form {form!r}")
    var_q, var_p, prod = nr_variances(packet, params, t)
    corr_q, corr_p = _corrections(t, packet, params, source)
    return prod * (1.0 + 0.5 * (corr_q / var_q + corr_p / var_p))


# --- published long forms, transcribed term by term -------------------------

def _relpv(x, packet, params):
    m, w, h, c2 = params.mass, params.omega, params.hbar, params.inv_c2
    q0, p0, s = packet.q0, packet.p0, packet.sigma_q
    sin, cos = np.sin, np.cos
    wt = x
    sp2 = h**2 / (4 * s**2)
    bracket = (
        wt * (
            -32 * h**2 * m * w * p0 * q0 * s**4 * cos(wt) ** 2
            + 128 * m**3 * w**3 * p0 * q0 * s**6 * sin(wt) ** 2
            + (96 * m**4 * w**4 * s**6 * (q0**2 + s**2)
               + 8 * m**2 * w**2 * (h**2 * q0**2 * s**2 + 4 * p0**2 * s**6 + 2 * h**2 * s**4)
               - 24 * h**2 * p0**2 * s**2 - 6 * h**4) * sin(2 * wt)
        )
        + (-144 * m**4 * w**4 * s**6 * (q0**2 + s**2) - 28 * m**2 * w**2 * s**4 * (4 * p0**2 * s**2 + h**2)) * sin(wt) ** 2
        + (-128 * m**3 * p0 * q0 * w**3 * s**6) * cos(wt) * sin(wt) ** 3
        + (-4 * h**2 * p0**2 * s**2 - 4 * h**2 * m**2 * w**2 * s**2 * (q0**2 + s**2) - h**4) * sin(2 * wt) ** 2
        + (16 * m**2 * w**2 * p0**2 * s**6 - 16 * m**4 * w**4 * s**6 * (q0**2 + s**2)
           + 4 * h**2 * m**2 * w**2 * s**4) * sin(wt) * sin(3 * wt)
        + (-4 * h**2 * m * w * p0 * q0 * s**4 * (-6 * sin(2 * wt) + sin(4 * wt)))
    )
    return sp2 + 3 * c2 / (512 * m**2 * s**4) * bracket


def _relqv(x, packet, params):
    m, w, h, c2 = params.mass, params.omega, params.hbar, params.inv_c2
    q0, p0, s = packet.q0, packet.p0, packet.sigma_q
    sin, cos = np.sin, np.cos
    wt = x
    bracket = (
        wt * (
            128 * m**2 * w * p0 * q0 * s**6 * cos(wt)
            - 1 / (m * w**2) * (
                4 * sin(wt) * (48 * m**4 * w**4 * s**6 * (q0**2 + s**2)
                               + 4 * m**2 * w**2 * s**4 * (4 * p0**2 * s**2 + h**2)
                               - 3 * (4 * p0**2 * s**2 * h**2 + h**4)) * cos(wt)
                - 4 * m * w * s**2 * h**2 * (m * w * (q0**2 + s**2) - 2 * p0 * q0 * sin(wt))
            )
        )
        + 4 * m * s**2 * (8 * m * p0 * q0 * w * s**4 * cos(wt) + (q0**2 + s**2) * h**2 * sin(wt))
        * (5 * sin(wt) - 3 * sin(3 * wt))
        - 16 * m**3 * w**2 * s**6 * (q0**2 + s**2) * sin(2 * wt) * (5 * sin(2 * wt) + sin(4 * wt))
        + 8 * s**2 * sin(wt) / w
        * (m * w * s**2 * (4 * p0**2 * s**2 + h**2) * cos(wt) + 2 * p0 * q0 * h**2 * sin(wt))
        * (3 * sin(2 * wt) + sin(4 * wt))
        + (4 * p0**2 * s**2 * h**2 + h**4) * sin(wt) / (m**2 * w**2)
        * ((12 * w + 4 * w * cos(2 * wt)) * sin(wt) ** 3 + m * cos(wt) * (8 * sin(2 * wt) + sin(4 * wt)))
    )
    return s**2 + 3 * c2 / (512 * m**3 * s**4) * bracket


def _relmug(x, packet, params):
    m, w, h, c2 = params.mass, params.omega, params.hbar, params.inv_c2
    q0, p0, s0 = packet.q0, packet.p0, packet.sigma_q
    sin, cos = np.sin, np.cos
    wt = x
    t = x / w
    secular = -3 * t / (m * w * s0**4) * (
        16 * m**3 * p0 * q0 * w**3 * s0**2 * (16 * s0**8 + h**3) * cos(wt) ** 2
        + 64 * m * p0 * q0 * w * s0**6 * h * (m**4 * w**4 + h) * sin(wt) ** 2
        - (4 * s0**4 - m**2 * w**2 * h)
        * (48 * m * w * s0**6 * (q0**2 + s0**2)
           - 4 * m**2 * w**2 * s0**2 * (4 * p0**2 * s0**4 + (q0**2 + 2 * s0**2) * h**2)
           + 12 * p0**2 * s0**2 * h**2 + 3 * h**4) * sin(2 * t * w)
    )
    periodic = 1.5 * (
        32 * h * m**2 * w**2 * s0**2 * (q0**2 + s0**2) * (5 + cos(2 * wt)) * sin(wt) ** 2
        + 8 * h**2 * (4 * p0**2 * s0**2 + h**2) * (7 + 3 * cos(2 * wt)) * sin(wt) ** 2 / (m * w**2)
        + 8 * h * m**3 * w**2 * sin(wt)
        * (-(q0**2 + s0**2) * h**2 * cos(wt) + 8 * m * p0 * q0 * w * s0**4 * sin(wt)) * sin(2 * wt) / s0**2
        - 96 * s0**2 * sin(wt)
        * (m * w * s0**2 * (4 * p0**2 * s0**2 + h**2) * cos(wt) + 2 * p0 * q0 * h**2 * sin(wt)) * sin(2 * wt) / w
        - 192 * s0**6 * (q0**2 + s0**2) * sin(2 * wt) ** 2 / w
        - m * h**3 * (4 * p0**2 * s0**2 + h**2) * sin(2 * wt) ** 2 / s0**4
        - 16 * m * s0**2 * (8 * m * p0 * q0 * w * s0**4 * cos(wt) + (q0**2 + s0**2) * h**2 * sin(wt))
        * (5 * sin(wt) - 3 * sin(3 * wt))
        + 4 * m**2 * w * h * (-2 * p0 * q0 * h**2 * cos(wt) + m * w * s0**2 * (4 * p0**2 * s0**2 + h**2) * sin(wt))
        * (-7 * sin(wt) + sin(3 * wt)) / s0**2
    )
    return h / 2 + c2 / (1024 * m**3 * s0**2) * (secular + periodic)


def _cov_printed(x, packet, params, side):
    t = x / params.omega
    q0, p0, s, h = packet.q0, packet.p0, packet.sigma_q, params.hbar
    s2 = s * s
    a1, b1, a2, b2 = mixing(t, params)
    if side == "p":
        c = [coeff_printed(ch, t, params) for ch in CHANNELS[:4]]
        a, b = a1, b1
    else:
        c = [coeff_printed(ch, t, params) for ch in CHANNELS[4:]]
        a, b = a2, b2
    return (
        c[0] * a * (3 * h**4 / (16 * s2**2) + 3 * h**2 / (4 * s2) * p0**2)
        + 4 * c[1] * (a * (3 * h**2 * p0 * q0 / (8 * s2)) + b * (3 * h**2 / 16 + 0.75 * p0**2 * s2))
        + 4 * c[2] * (a * (3 * h**2 / (16 * s2) * (q0**2 + s2)) + b * (3 * p0 * q0 * s2 / 2))
        + c[3] * b * (3 * s2 * (q0**2 + s2))
    )


def verbatim(formula: str, t, packet: GaussianPacket, params: OscillatorParams):
    """Evaluate a published long-form expression as printed.

    ``covps``/``covqs`` return the bracket multiplying i hbar.  A bare sigma in
    the printed variance formulas is read as sigma_q.
    """
    x = params.omega * np.asarray(t, dtype=float)
    if formula == "relpv":
        return _relpv(x, packet, params)
    if formula == "relqv":
        return _relqv(x, packet, params)
    if formula == "relmug":
        return _relmug(x, packet, params)
    if formula == "covps":
        return _cov_printed(x, packet, params, "p")
    if formula == "covqs":
        return _cov_printed(x, packet, params, "q")
    raise ValueError(f"unknown formula {formula!r}; expected one of {FORMULAS}")


@dataclass
class ScalingSample:
    omega_t: np.ndarray
    f1: np.ndarray
    f2: np.ndarray


def scaling_functions(omega_t, packet: GaussianPacket | None = None, source: str = "oracle") -> ScalingSample:
    """Relative product and width corrections per unit eps (natural units).

    Defaults to the ground packet.  Both functions are exactly eps-independent
    because every correction is linear in 1/c^2.
    """
    omega_t = np.asarray(omega_t, dtype=float)
    params = OscillatorParams.natural(1.0)
    packet = packet or ground_packet(params)
    var_q, var_p, prod = nr_variances(packet, params, omega_t)
    corr_q, corr_p = _corrections(omega_t, packet, params, source)
    f2 = corr_q / var_q
    f1 = prod * 0.5 * (corr_q / var_q + corr_p / var_p) / (0.5 * params.hbar)
    return ScalingSample(omega_t, f1, f2)


@dataclass
class MomentSeries:
    times: np.ndarray
    sigma_q2_nr: np.ndarray
    sigma_p2_nr: np.ndarray
    sigma_q2_rel: np.ndarray
    sigma_p2_rel: np.ndarray
    product_rel: np.ndarray
    corr_q2: np.ndarray
    corr_p2: np.ndarray
    corr_product: np.ndarray
    mode: str
    omega: float = 1.0
    product_nr: np.ndarray = field(default=None)

    COLUMNS = ("sigma_q2_nr", "sigma_p2_nr", "sigma_q2_rel", "sigma_p2_rel", "product_rel",
               "corr_q2", "corr_p2", "corr_product")

    @property
    def omega_t(self):
        return self.omega * self.times

    def to_units(self, record: ScaleRecord) -> "MomentSeries":
        """Convert a natural-unit series back to the scene's units."""
        qv, pv, act = record.q_variance, record.p_variance, record.action
        return MomentSeries(
            record.time(self.times), qv(self.sigma_q2_nr), pv(self.sigma_p2_nr),
            qv(self.sigma_q2_rel), pv(self.sigma_p2_rel), act(self.product_rel),
            qv(self.corr_q2), pv(self.corr_p2), act(self.corr_product), self.mode,
            self.omega / record.time_scale,
            None if self.product_nr is None else act(self.product_nr),
        )

    def from_units(self, record: ScaleRecord) -> "MomentSeries":
        inv = ScaleRecord(1 / record.length_scale, 1 / record.momentum_scale, 1 / record.time_scale,
                          1 / record.energy_scale, record.epsilon)
        return self.to_units(inv)


def series(packet: GaussianPacket, params: OscillatorParams, t_grid, source: str = "oracle") -> MomentSeries:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be monotone")
    var_q, var_p, prod = nr_variances(packet, params, t)
    corr_q, corr_p = _corrections(t, packet, params, source)
    corr_prod = prod * 0.5 * (corr_q / var_q + corr_p / var_p)
    return MomentSeries(t, var_q, var_p, var_q + corr_q, var_p + corr_p, prod + corr_prod,
                        corr_q, corr_p, corr_prod, source, params.omega, prod)


def secular_fit(s: MomentSeries, min_periods: float = 10.0):
    """Least-squares line through the per-period maxima of |corr_q2|.

    Returns (slope per period, intercept, r_squared); r_squared is nan when
    the envelope is flat to rounding, where it carries no information.
    """
    phase = s.omega_t
    periods = (phase[-1] - phase[0]) / (2 * math.pi)
    if periods < min_periods - 1e-9:
        raise ValueError(f"series spans {periods:.3g} periods; need at least {min_periods:g}")
    k = np.floor((phase - phase[0]) / (2 * math.pi) + 1e-9).astype(int)
    n = int(math.floor(periods + 1e-9))
    env = np.array([np.max(np.abs(s.corr_q2[k == i])) for i in range(n)])
    idx = np.arange(n, dtype=float)
    slope, intercept = np.polyfit(idx, env, 1)
    ss_tot = float(np.sum((env - env.mean()) ** 2))
    ss_res = float(np.sum((env - (slope * idx + intercept)) ** 2))
    scale = max(float(np.max(np.abs(env))), 1e-300)
    r2 = math.nan if ss_tot <= (1e-10 * scale) ** 2 * n else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


@dataclass
class DiscrepancyEntry:
    name: str
    max_abs_dev: float
    max_rel_dev: float
    max_abs_dev_printed_coeffs: float
    grid_points: int

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class DiscrepancyReport:
    entries: list

    def as_dict(self):
        return {e.name: e.as_dict() for e in self.entries}


def discrepancy_report(t_grid, packet: GaussianPacket, params: OscillatorParams) -> DiscrepancyReport:
    """Printed long forms against the assembled path.

    ``max_abs_dev`` compares with the canonical (oracle-coefficient) assembly
    and ``max_rel_dev`` divides it by the largest assembled magnitude;
    ``max_abs_dev_printed_coeffs`` with the same assembly fed the printed
    coefficients, isolating errors of the long forms themselves.
    """
    t = np.asarray(t_grid, dtype=float)
    assembled = {}
    for src in ("oracle", "printed"):
        vq, vp = rel_variances(t, packet, params, src)
        assembled[src] = {
            "relpv": vp, "relqv": vq,
            "relmug": uncertainty_product(t, packet, params, src, "product"),
            "covps": cov_vps(t, packet, params, src),
            "covqs": cov_vqs(t, packet, params, src),
        }
    entries = []
    for name in FORMULAS:
        printed = verbatim(name, t, packet, params)
        ref = assembled["oracle"][name]
        dev = np.abs(printed - ref)
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        entries.append(DiscrepancyEntry(
            name, float(dev.max()), float(dev.max()) / scale,
            float(np.max(np.abs(printed - assembled["printed"][name]))), int(t.size)))
    return DiscrepancyReport(entries)
