"""Exact propagation in a truncated harmonic-oscillator eigenbasis.

Operators are dense N x N matrices built from ladder operators.  Matrix
products of truncated q and p are wrong only in the last few rows and
columns; everything here is read off the leading ``dim - guard`` block, and
states must keep their weight out of the guard band.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .coeffs import coeff_values
from .params import GaussianPacket, OscillatorParams


class BasisTooSmallError(RuntimeError):
    def __init__(self, tail_mass, dim, recommended_dim):
        super().__init__(
            f"population {tail_mass:.3e} in the guard band of a {dim}-state basis; "
            f"use at least dim={recommended_dim}"
        )
        self.tail_mass = tail_mass
        self.dim = dim
        self.recommended_dim = recommended_dim


@dataclass(frozen=True)
class FockConfig:
    dim: int = 128
    tail_tol: float = 1e-12
    guard: int = 20

    def __post_init__(self):
        if not (self.dim > self.guard >= 0):
            raise ValueError(f"need dim > guard >= 0, got dim={self.dim}, guard={self.guard}")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")

    @property
    def reliable(self):
        return self.dim - self.guard


@dataclass
class FockOperators:
    q: np.ndarray
    p: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    q3: np.ndarray
    Wp2q: np.ndarray
    Wq2p: np.ndarray
    H0: np.ndarray
    H: np.ndarray

    def items(self):
        return ((f.name, getattr(self, f.name)) for f in fields(self))


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def ladder(dim: int) -> np.ndarray:
    """Lowering operator a with a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def quadratures(dim: int, params: OscillatorParams):
    a = ladder(dim)
    ad = a.conj().T
    q = math.sqrt(params.hbar / (2 * params.mass * params.omega)) * (a + ad)
    p = 1j * math.sqrt(params.hbar * params.mass * params.omega / 2) * (ad - a)
    return q, p


def build_operators(config: FockConfig, params: OscillatorParams) -> FockOperators:
    q, p = quadratures(config.dim, params)
    m, w = params.mass, params.omega
    p2 = p @ p
    q2 = q @ q
    p4 = p2 @ p2
    H0 = p2 / (2 * m) + 0.5 * m * w**2 * q2
    H = H0 - params.inv_c2 * p4 / (8 * m**3)
    return FockOperators(
        q=q, p=p, p2=p2, p3=p2 @ p, p4=p4, q3=q2 @ q,
        Wp2q=(p2 @ q + p @ q @ p + q @ p2) / 4,
        Wq2p=(q2 @ p + q @ p @ q + p @ q2) / 4,
        H0=H0, H=H,
    )


def hamiltonian(config: FockConfig, params: OscillatorParams) -> np.ndarray:
    return build_operators(config, params).H


@dataclass
class FockState:
    amplitudes: np.ndarray
    tail_mass: float = 0.0
    packet: Optional[GaussianPacket] = None
    params: Optional[OscillatorParams] = None

    @property
    def dim(self):
        return self.amplitudes.size

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def _hermite_polys(nmax, x):
    """phi_n(x) * exp(x^2 / 2) for n < nmax, shape (nmax, len(x))."""
    out = np.empty((nmax, x.size))
    out[0] = math.pi ** -0.25
    if nmax > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _amplitudes(packet, params, dim, order=150, tol=1e-14, max_order=300):
    """c_n = int phi_n(q) psi(q) dq by Gauss-Hermite quadrature.

    Both Gaussian envelopes (eigenfunction and packet) are folded into the
    quadrature weight, leaving a degree-n polynomial times a plane-wave phase.
    """
    length = math.sqrt(params.hbar / (params.mass * params.omega))
    q0, k0, s = packet.q0 / length, packet.p0 * length / params.hbar, packet.sigma_q / length
    alpha = 0.5 + 1.0 / (4 * s * s)
    qc = q0 / (4 * s * s * alpha)
    log_const = -q0 * q0 / (4 * s * s) + alpha * qc * qc
    pref = (2 * math.pi * s * s) ** -0.25 * math.exp(log_const) / math.sqrt(alpha)

    def estimate(n):
        u, w = np.polynomial.hermite.hermgauss(n)
        x = qc + u / math.sqrt(alpha)
        return pref * (_hermite_polys(dim, x) @ (w * np.exp(1j * k0 * x)))

    prev = estimate(order)
    while True:
        order = min(2 * order, max_order)
        cur = estimate(order)
        if np.max(np.abs(cur - prev)) < tol or order >= max_order:
            return cur
        prev = cur


def _tail(amps, guard):
    inside = float(np.sum(np.abs(amps) ** 2))
    band = float(np.sum(np.abs(amps[len(amps) - guard:]) ** 2)) if guard else 0.0
    return band + max(0.0, 1.0 - inside)


def project_packet(packet: GaussianPacket, config: FockConfig, params: OscillatorParams,
                   check: bool = True) -> FockState:
    """Expand the Gaussian packet in oscillator eigenstates.

    The amplitudes are renormalized; ``tail_mass`` is the packet weight in the
    guard band plus whatever falls outside the basis altogether.
    """
    amps = _amplitudes(packet, params, config.dim)
    tail = _tail(amps, config.guard)
    state = FockState(amps / np.linalg.norm(amps), tail, packet, params)
    if check and tail > config.tail_tol:
        _, rec = convergence_report(state, config)
        raise BasisTooSmallError(tail, config.dim, rec)
    return state


def convergence_report(psi: FockState, config: FockConfig, max_dim: int = 4096):
    """(tail mass, recommended dim); the dim doubles until the tail is below tolerance."""
    tail = psi.tail_mass if psi.packet is not None else _tail(psi.amplitudes, config.guard)
    dim = config.dim
    t = tail
    while t > config.tail_tol:
        if psi.packet is None or dim >= max_dim:
            dim *= 2
            break
        dim *= 2
        t = _tail(_amplitudes(psi.packet, psi.params, dim), config.guard)
    return tail, dim


def evolve(H: np.ndarray, psi0, t_grid, hbar: float = 1.0) -> np.ndarray:
    """States psi(t) = exp(-i H t / hbar) psi0 for every t, shape (len(t), dim)."""
    amps = psi0.amplitudes if isinstance(psi0, FockState) else np.asarray(psi0, dtype=complex)
    t = np.asarray(t_grid, dtype=float)
    if hermiticity_error(H) > 1e-12 * max(1.0, float(np.max(np.abs(H)))):
        raise ValueError("Hamiltonian is not Hermitian")
    if abs(np.linalg.norm(amps) - 1) > 1e-12:
        raise ValueError("initial state is not normalized")
    energies, vecs = np.linalg.eigh(H)
    coeff = vecs.conj().T @ amps
    phases = np.exp(-1j * np.outer(t, energies) / hbar)
    return (phases * coeff[None, :]) @ vecs.T


@dataclass
class ExactMoments:
    times: np.ndarray
    mean_q: np.ndarray
    mean_p: np.ndarray
    var_q: np.ndarray
    var_p: np.ndarray
    energy: np.ndarray
    norm: np.ndarray

    @property
    def product(self):
        return np.sqrt(self.var_q * self.var_p)


def _expect(states, op):
    return np.einsum("ti,ij,tj->t", states.conj(), op, states)


def exact_moments(states: np.ndarray, ops: FockOperators, t_grid) -> ExactMoments:
    mq = _expect(states, ops.q).real
    mp = _expect(states, ops.p).real
    q2 = _expect(states, ops.q @ ops.q).real
    p2 = _expect(states, ops.p2).real
    return ExactMoments(
        np.asarray(t_grid, dtype=float), mq, mp, q2 - mq**2, p2 - mp**2,
        _expect(states, ops.H).real, np.linalg.norm(states, axis=1),
    )


def run_exact(packet: GaussianPacket, params: OscillatorParams, t_grid, config: FockConfig | None = None):
    """Project, propagate under the full Hamiltonian and read off moments."""
    config = config or FockConfig()
    ops = build_operators(config, params)
    psi0 = project_packet(packet, config, params)
    states = evolve(ops.H, psi0, t_grid, params.hbar)
    edge = float(np.max(np.sum(np.abs(states[:, config.reliable:]) ** 2, axis=1)))
    if edge > config.tail_tol:
        raise BasisTooSmallError(edge, config.dim, 2 * config.dim)
    return exact_moments(states, ops, t_grid)


def v_operator(t: float, q: np.ndarray, p: np.ndarray, params: OscillatorParams,
               rtol: float = 1e-12, max_nodes: int = 1 << 14) -> np.ndarray:
    """V(t) = int_0^t (p cos ws - m w q sin ws)^4 ds by composite Gauss-Legendre.

    Starts at 32 nodes per period and doubles until the Frobenius norm moves
    by less than ``rtol`` relative.
    """
    if t == 0:
        return np.zeros_like(q)
    m, w = params.mass, params.omega
    pp, qq, pq = p @ p, q @ q, p @ q + q @ p

    def quad(per_period):
        segments = max(1, math.ceil(w * t / (2 * math.pi)))
        x, wts = np.polynomial.legendre.leggauss(per_period)
        edges = np.linspace(0.0, t, segments + 1)
        total = np.zeros_like(q)
        for a, b in zip(edges[:-1], edges[1:]):
            for xi, wi in zip(x, wts):
                s = 0.5 * (b - a) * xi + 0.5 * (a + b)
                c, sn = math.cos(w * s), math.sin(w * s)
                P2 = c * c * pp - m * w * c * sn * pq + (m * w * sn) ** 2 * qq
                total += 0.5 * (b - a) * wi * (P2 @ P2)
        return total

    n = 32
    prev = quad(n)
    while True:
        n *= 2
        cur = quad(n)
        ref = np.linalg.norm(cur)
        if np.linalg.norm(cur - prev) <= rtol * ref or n >= max_nodes:
            return cur
        prev = cur


def commutator_check(t: float, config: FockConfig, params: OscillatorParams, coeff_source: str = "oracle"):
    """Relative Frobenius residuals of [V, p_s] and [V, q_s] against the channel expansion.

    Norms are taken on the leading ``dim - guard`` block.
    """
    ops = build_operators(config, params)
    q, p = ops.q, ops.p
    m, w, h = params.mass, params.omega, params.hbar
    V = v_operator(t, q, p, params)
    c, s = math.cos(w * t), math.sin(w * t)
    p_s = c * p - m * w * s * q
    q_s = s / (m * w) * p + c * q
    coeffs = coeff_values(t, params, coeff_source)
    basis = (ops.p3, ops.Wp2q, ops.Wq2p, ops.q3)
    weights = (1.0, 4.0, 4.0, 1.0)
    r = config.reliable
    out = []
    for X, cs in ((p_s, coeffs[:4]), (q_s, coeffs[4:])):
        lhs = (V @ X - X @ V)[:r, :r]
        rhs = 1j * h * sum(wt * cj * O for wt, cj, O in zip(weights, cs, basis))[:r, :r]
        scale = np.linalg.norm(lhs)
        diff = np.linalg.norm(lhs - rhs)
        out.append(0.0 if scale == 0 and diff == 0 else float(diff / max(scale, 1e-300)))
    return tuple(out)


@dataclass
class RichardsonTable:
    """Residuals R(eps, t) = exact - NR - first-order correction at eps and eps/2."""

    times: np.ndarray
    quantity: str
    eps: float
    r_full: np.ndarray
    r_half: np.ndarray
    noise: float

    @property
    def ratio(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.r_half / self.r_full

    @property
    def mask(self):
        """Grid points where R(eps) stands clear of the solver noise."""
        return np.abs(self.r_full) > 10 * self.noise

    def as_dict(self):
        return {
            "quantity": self.quantity, "eps": self.eps, "noise": self.noise,
            "times": self.times.tolist(), "r_full": self.r_full.tolist(),
            "r_half": self.r_half.tolist(),
            "ratio": [None if not np.isfinite(r) else float(r) for r in self.ratio],
        }


def richardson(packet: GaussianPacket, t_grid, eps: float, config: FockConfig | None = None,
               source: str = "oracle"):
    """Residual tables for sigma_q^2, sigma_p^2 and the product at eps and eps/2 (natural units).

    The noise floor is the largest deviation of an exact eps = 0 run from the
    analytic free evolution.
    """
    from .dynamics import nr_variances, series

    config = config or FockConfig()
    t = np.asarray(t_grid, dtype=float)
    base = run_exact(packet, OscillatorParams.natural(0.0), t, config)
    vq0, vp0, prod0 = nr_variances(packet, OscillatorParams.natural(0.0), t)
    exact0 = {"sigma_q2": base.var_q, "sigma_p2": base.var_p, "product": base.product}
    nr = {"sigma_q2": vq0, "sigma_p2": vp0, "product": prod0}
    noise = {k: float(np.max(np.abs(exact0[k] - nr[k]))) + 1e-15 for k in nr}

    resid = {}
    for e in (eps, eps / 2):
        params = OscillatorParams.natural(e)
        ex = run_exact(packet, params, t, config)
        s = series(packet, params, t, source)
        pert = {"sigma_q2": s.sigma_q2_rel, "sigma_p2": s.sigma_p2_rel, "product": s.product_rel}
        got = {"sigma_q2": ex.var_q, "sigma_p2": ex.var_p, "product": ex.product}
        resid[e] = {k: got[k] - pert[k] for k in pert}
    return [RichardsonTable(t, k, eps, resid[eps][k], resid[eps / 2][k], noise[k]) for k in nr]
