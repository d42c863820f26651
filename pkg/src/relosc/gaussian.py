"""Moments of the Gaussian packet psi(q) ~ exp(-(q-q0)^2/(4 s^2) + i p0 q/hbar).

:func:`moment` and :func:`static_covariances` return the published closed
forms verbatim.  :func:`moment_oracle` evaluates operator words independently:
p = -i hbar d/dq is applied symbolically to (polynomial) x (Gaussian), which
reduces every expectation value to a Gaussian average of a polynomial, done
by Gauss-Hermite quadrature.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from functools import lru_cache
from itertools import product

import numpy as np

from .params import GaussianPacket
from .quadrature import QuadratureError


class MomentKind(enum.Enum):
    Q = "q"
    Q3 = "q3"
    Q4 = "q4"
    P = "p"
    P3 = "p3"
    P4 = "p4"
    PQ3 = "pq3"
    Q3P = "q3p"
    QP3 = "qp3"
    P3Q = "p3q"
    W_P2Q = "W(p2q)"
    Q_W_P2Q = "qW(p2q)"
    W_P2Q_Q = "W(p2q)q"
    W_P2Q_P = "W(p2q)p"
    P_W_P2Q = "pW(p2q)"
    W_Q2P = "W(q2p)"
    Q_W_Q2P = "qW(q2p)"
    W_Q2P_Q = "W(q2p)q"
    P_W_Q2P = "pW(q2p)"
    W_Q2P_P = "W(q2p)p"


class WeylOrder(enum.Enum):
    Q_FIRST = "q-first"
    P_FIRST = "p-first"


@dataclass(frozen=True)
class WeylSpec:
    """W(p^m q^n): p-first sums p^(m-l) q^n p^l; q-first sums q^(n-l) p^m q^l."""

    m: int
    n: int
    order: WeylOrder

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("exponents must be non-negative")

    def words(self):
        """Linear combination {word: weight} realizing the ordering rule."""
        if self.order is WeylOrder.P_FIRST:
            k = self.m
            terms = ["p" * (k - l) + "q" * self.n + "p" * l for l in range(k + 1)]
        else:
            k = self.n
            terms = ["q" * (k - l) + "p" * self.m + "q" * l for l in range(k + 1)]
        out = {}
        for w in terms:
            out[w] = out.get(w, 0.0) + 1.0 / 2**k
        return out


W_P2Q = WeylSpec(2, 1, WeylOrder.P_FIRST)
W_Q2P = WeylSpec(1, 2, WeylOrder.Q_FIRST)
SUPPORTED_WEYL = (W_P2Q, W_Q2P)


def _combo(prefix, spec, suffix):
    return {prefix + w + suffix: c for w, c in spec.words().items()}


KIND_WORDS = {
    MomentKind.Q: {"q": 1.0},
    MomentKind.Q3: {"qqq": 1.0},
    MomentKind.Q4: {"qqqq": 1.0},
    MomentKind.P: {"p": 1.0},
    MomentKind.P3: {"ppp": 1.0},
    MomentKind.P4: {"pppp": 1.0},
    MomentKind.PQ3: {"pqqq": 1.0},
    MomentKind.Q3P: {"qqqp": 1.0},
    MomentKind.QP3: {"qppp": 1.0},
    MomentKind.P3Q: {"pppq": 1.0},
    MomentKind.W_P2Q: _combo("", W_P2Q, ""),
    MomentKind.Q_W_P2Q: _combo("q", W_P2Q, ""),
    MomentKind.W_P2Q_Q: _combo("", W_P2Q, "q"),
    MomentKind.W_P2Q_P: _combo("", W_P2Q, "p"),
    MomentKind.P_W_P2Q: _combo("p", W_P2Q, ""),
    MomentKind.W_Q2P: _combo("", W_Q2P, ""),
    MomentKind.Q_W_Q2P: _combo("q", W_Q2P, ""),
    MomentKind.W_Q2P_Q: _combo("", W_Q2P, "q"),
    MomentKind.P_W_Q2P: _combo("p", W_Q2P, ""),
    MomentKind.W_Q2P_P: _combo("", W_Q2P, "p"),
}


def moment(packet: GaussianPacket, kind: MomentKind, hbar: float = 1.0) -> complex:
    """Published closed form of the expectation value ``kind``."""
    q0, p0, s, h = packet.q0, packet.p0, packet.sigma_q, hbar
    s2 = s * s
    i = 1j
    k = MomentKind
    table = {
        k.Q: lambda: q0,
        k.Q3: lambda: q0**3 + 3 * q0 * s2,
        k.Q4: lambda: q0**4 + 6 * q0**2 * s2 + 3 * s2**2,
        k.P: lambda: p0,
        k.P3: lambda: 3 * h**2 * p0 / (4 * s2) + p0**3,
        k.P4: lambda: 3 * h**4 / (16 * s2**2) + 3 / (2 * s2) * h**2 * p0**2 + p0**4,
        k.PQ3: lambda: p0 * (q0**3 + 3 * q0 * s2) - 1.5 * i * h * (q0**2 + s2),
        k.Q3P: lambda: p0 * (q0**3 + 3 * q0 * s2) + 1.5 * i * h * (q0**2 + s2),
        k.QP3: lambda: (8 * p0**3 * q0 * s2 + 12 * i * h * p0**2 * s2 + 6 * h**2 * p0 * q0 + 3 * i * h**3) / (8 * s2),
        k.P3Q: lambda: (8 * p0**3 * q0 * s2 - 12 * i * h * p0**2 * s2 + 6 * h**2 * p0 * q0 - 3 * i * h**3) / (8 * s2),
        k.W_P2Q: lambda: 3 * q0 * (4 * p0**2 * s2 + h**2) / (16 * s2),
        k.Q_W_P2Q: lambda: 3 * (4 * p0**2 * s2 * (q0 + s2) + 4 * i * h * p0 * q0 * s2 + h**2 * (q0**2 + s2)) / (16 * s2),
        k.W_P2Q_Q: lambda: 3 * (4 * p0**2 * s2 * (q0 + s2) - 4 * i * h * p0 * q0 * s2 + h**2 * (q0**2 + s2)) / (16 * s2),
        k.W_P2Q_P: lambda: 3 * (8 * p0**3 * q0 * s2 + 4 * i * h * p0 * s2 + 6 * p0 * q0 * h**2 + i * h**3) / (32 * s2),
        k.P_W_P2Q: lambda: 3 * (8 * p0**3 * q0 * s2 - 4 * i * h * p0 * s2 + 6 * p0 * q0 * h**2 - i * h**3) / (32 * s2),
        k.W_Q2P: lambda: 3 * p0 * (q0**2 + s2) / 4,
        k.Q_W_Q2P: lambda: 3 / 8 * (2 * p0 * (q0**3 + 3 * q0 * s2) + i * h * (q0**2 + s2)),
        k.W_Q2P_Q: lambda: 3 / 8 * (2 * p0 * (q0**3 + 3 * q0 * s2) - i * h * (q0**2 + s2)),
        k.P_W_Q2P: lambda: 3 * (4 * p0**2 * s2 * (q0 + s2) - 4 * i * h * p0 * q0 * s2 + h**2 * (q0**2 + s2)) / (16 * s2),
        k.W_Q2P_P: lambda: 3 * (4 * p0**2 * s2 * (q0 + s2) + 4 * i * h * p0 * q0 * s2 + h**2 * (q0**2 + s2)) / (16 * s2),
    }
    return complex(table[kind]())


def weyl_expectation(packet: GaussianPacket, spec: WeylSpec, hbar: float = 1.0) -> complex:
    """Published closed form of <W(p^2 q)> or <W(q^2 p)>."""
    if spec == W_P2Q:
        return moment(packet, MomentKind.W_P2Q, hbar)
    if spec == W_Q2P:
        return moment(packet, MomentKind.W_Q2P, hbar)
    raise ValueError(f"unsupported Weyl spec {spec}; supported: {SUPPORTED_WEYL}")


@dataclass(frozen=True)
class CovarianceTable:
    cov_q_q3: float
    cov_p_p3: float
    cov_p_q3: float
    cov_q_p3: float
    cov_p_Wp2q: float
    cov_q_Wp2q: float
    cov_p_Wq2p: float
    cov_q_Wq2p: float

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def static_covariances(packet: GaussianPacket, hbar: float = 1.0) -> CovarianceTable:
    """Published symmetrized covariances of q, p with the cubic basis operators."""
    q0, p0, s, h = packet.q0, packet.p0, packet.sigma_q, hbar
    s2 = s * s
    return CovarianceTable(
        cov_q_q3=3 * s2 * (q0**2 + s2),
        cov_p_p3=3 * h**4 / (16 * s2**2) + 3 * h**2 / (4 * s2) * p0**2,
        cov_p_q3=0.0,
        cov_q_p3=0.0,
        cov_p_Wp2q=3 * h**2 * p0 * q0 / (8 * s2),
        cov_q_Wp2q=3 * h**2 / 16 + 0.75 * p0**2 * s2,
        cov_p_Wq2p=3 * h**2 / (16 * s2) * (q0**2 + s2),
        cov_q_Wq2p=1.5 * p0 * q0 * s2,
    )


# --- independent oracle ------------------------------------------------------

def _apply_word(word, packet, hbar):
    """Coefficients c (ascending powers) with word|psi> = (sum c_k q^k) psi(q).

    Operators act right to left.  On P psi, q shifts the coefficients up one
    power and p gives -i hbar (P' + P L) with L = psi'/psi linear in q.
    """
    s2 = packet.sigma_q**2
    l0 = packet.q0 / (2 * s2) + 1j * packet.p0 / hbar
    l1 = -1.0 / (2 * s2)
    c = np.zeros(len(word) + 1, dtype=complex)
    c[0] = 1.0
    for op in reversed(word):
        if op == "q":
            c = np.roll(c, 1)
        elif op == "p":
            new = l0 * c
            new[1:] += l1 * c[:-1]
            new[:-1] += c[1:] * np.arange(1, c.size)
            c = -1j * hbar * new
        else:
            raise ValueError(f"operator word may contain only 'q' and 'p', got {word!r}")
    return c


@lru_cache(maxsize=None)
def _hermgauss(n):
    return np.polynomial.hermite.hermgauss(n)


def _parse_operator(operator):
    if isinstance(operator, MomentKind):
        return KIND_WORDS[operator]
    if isinstance(operator, str):
        return {operator: 1.0}
    return dict(operator)


def moment_oracle(packet: GaussianPacket, operator, hbar: float = 1.0, tol: float = 1e-12,
                  order: int = 80, max_order: int = 640) -> complex:
    """<psi| operator |psi> by Gauss-Hermite quadrature.

    ``operator`` is a word such as ``"qppq"`` (leftmost operator acts last),
    a ``{word: weight}`` combination, or a :class:`MomentKind`.  The order is
    doubled until two successive estimates agree to ``tol`` (relative to the
    magnitude of the result when that exceeds one).
    """
    combo = _parse_operator(operator)
    if tol <= 0:
        raise ValueError("tol must be positive")
    poly = np.zeros(7, dtype=complex)
    for word, weight in combo.items():
        if len(word) > 6:
            raise ValueError(f"operator words are limited to length 6, got {word!r}")
        c = _apply_word(word, packet, hbar)
        poly[:c.size] += weight * c

    def estimate(n):
        u, w = _hermgauss(n)
        q = packet.q0 + np.sqrt(2.0) * packet.sigma_q * u
        return complex(np.dot(w, np.polynomial.polynomial.polyval(q, poly)) / np.sqrt(np.pi))

    prev = estimate(order)
    while True:
        order *= 2
        cur = estimate(order)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        if order >= max_order:
            raise QuadratureError(f"Gauss-Hermite did not converge for {operator!r}", cur, abs(cur - prev))
        prev = cur


def covariance_oracle(packet, x, y, hbar=1.0, tol=1e-12):
    """Symmetrized covariance 1/2 <XY + YX> - <X><Y> from raw oracle moments.

    ``x`` and ``y`` are {word: weight} combinations (or single words).
    """
    x, y = _parse_operator(x), _parse_operator(y)
    xy, yx = {}, {}
    for (wx, cx), (wy, cy) in product(x.items(), y.items()):
        xy[wx + wy] = xy.get(wx + wy, 0.0) + cx * cy
        yx[wy + wx] = yx.get(wy + wx, 0.0) + cx * cy
    sym = 0.5 * (moment_oracle(packet, xy, hbar, tol) + moment_oracle(packet, yx, hbar, tol))
    return sym - moment_oracle(packet, x, hbar, tol) * moment_oracle(packet, y, hbar, tol)


COVARIANCE_OPERANDS = {
    "cov_q_q3": ("q", "qqq"),
    "cov_p_p3": ("p", "ppp"),
    "cov_p_q3": ("p", "qqq"),
    "cov_q_p3": ("q", "ppp"),
    "cov_p_Wp2q": ("p", W_P2Q.words()),
    "cov_q_Wp2q": ("q", W_P2Q.words()),
    "cov_p_Wq2p": ("p", W_Q2P.words()),
    "cov_q_Wq2p": ("q", W_Q2P.words()),
}


def static_covariances_oracle(packet: GaussianPacket, hbar: float = 1.0, tol: float = 1e-12) -> dict:
    """Complex covariances assembled from oracle moments, keyed like :class:`CovarianceTable`."""
    return {name: covariance_oracle(packet, x, y, hbar, tol) for name, (x, y) in COVARIANCE_OPERANDS.items()}
