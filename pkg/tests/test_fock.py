import math

import numpy as np
import pytest

from relosc.dynamics import nr_variances, series
from relosc.fock import (
    BasisTooSmallError, FockConfig, FockState, build_operators, commutator_check,
    convergence_report, evolve, exact_moments, hermiticity_error, project_packet, richardson,
    run_exact, v_operator,
)
from relosc.gaussian import MomentKind, moment
from relosc.params import GaussianPacket, OscillatorParams, ground_packet

NAT0 = OscillatorParams.natural(0.0)
G = ground_packet(NAT0)
T3 = np.linspace(0, 6 * math.pi, 181)


@pytest.fixture(scope="module")
def ops64():
    return build_operators(FockConfig(64), OscillatorParams.natural(1e-3))


def test_config_invariants():
    with pytest.raises(ValueError):
        FockConfig(dim=10, guard=10)
    with pytest.raises(ValueError):
        FockConfig(dim=32, tail_tol=0)
    assert FockConfig(64).reliable == 44


def test_q_matrix_element(ops64):
    assert ops64.q[0, 1] == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_all_operators_hermitian(ops64):
    for name, m in ops64.items():
        assert hermiticity_error(m) < 1e-12, name


def test_canonical_commutator(ops64):
    r = FockConfig(64).reliable
    c = (ops64.q @ ops64.p - ops64.p @ ops64.q)[:r, :r]
    assert np.max(np.abs(c - 1j * np.eye(r))) < 1e-10


def test_weyl_rearrangement_matrix(ops64):
    q, p = ops64.q, ops64.p
    r = FockConfig(64).reliable
    lhs = (p @ p @ q + p @ q @ p + q @ p @ p)[:r, :r]
    assert np.max(np.abs(lhs - 3 * (p @ q @ p)[:r, :r])) < 1e-10


def test_hamiltonian_structure():
    p = OscillatorParams(1.3, 0.7, 0.9, 4.0)
    ops = build_operators(FockConfig(48), p)
    np.testing.assert_allclose(ops.H, ops.H0 - ops.p4 / (8 * 1.3**3 * 16.0), atol=1e-14)
    np.testing.assert_allclose(np.diag(ops.H0)[:20].real, 0.9 * 0.7 * (np.arange(20) + 0.5), rtol=1e-12)


def test_project_ground_state():
    st = project_packet(G, FockConfig(64), NAT0)
    assert abs(st.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(st.amplitudes[1:])) < 1e-12
    tail, rec = convergence_report(st, FockConfig(64))
    assert tail < 1e-14 and rec == 64


def test_project_coherent_poisson():
    st = project_packet(GaussianPacket(1.0, 0.0, 1 / math.sqrt(2)), FockConfig(64), NAT0)
    pops = np.abs(st.amplitudes) ** 2
    n = np.arange(12)
    poisson = np.exp(-0.5) * 0.5**n / np.array([math.factorial(k) for k in n])
    np.testing.assert_allclose(pops[:12], poisson, atol=1e-12)
    assert pops[0] == pytest.approx(0.6065, abs=1e-4)


def test_project_squeezed_even_only():
    st = project_packet(GaussianPacket(0.0, 0.0, math.sqrt(2)), FockConfig(128), NAT0)
    assert np.max(np.abs(st.amplitudes[1::2])) < 1e-12
    assert np.sum(np.abs(st.amplitudes[::2]) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_project_momentum_kick_and_units():
    p = OscillatorParams(2.0, 0.5, 1.5, math.inf)
    pk = GaussianPacket(0.4, -0.9, 0.8)
    st = project_packet(pk, FockConfig(128), p)
    ops = build_operators(FockConfig(128), p)
    a = st.amplitudes
    assert (a.conj() @ ops.q @ a).real == pytest.approx(0.4, abs=1e-10)
    assert (a.conj() @ ops.p @ a).real == pytest.approx(-0.9, abs=1e-10)


def test_basis_too_small_and_recommendation():
    cfg = FockConfig(16, guard=4)
    pk = GaussianPacket(3.0, 0.0, 1 / math.sqrt(2))
    with pytest.raises(BasisTooSmallError) as info:
        project_packet(pk, cfg, NAT0)
    assert info.value.recommended_dim > 16
    st = project_packet(pk, cfg, NAT0, check=False)
    tail, rec = convergence_report(st, cfg)
    assert tail > 1e-12 and rec > 16
    bigger = FockConfig(rec, guard=4)
    st2 = project_packet(pk, bigger, NAT0)
    assert convergence_report(st2, bigger)[0] < bigger.tail_tol


def test_evolve_t0_and_norm():
    ops = build_operators(FockConfig(128), OscillatorParams.natural(1e-3))
    psi0 = project_packet(GaussianPacket(1.0, 0.5, 0.6), FockConfig(128), NAT0)
    states = evolve(ops.H, psi0, T3)
    np.testing.assert_allclose(states[0], psi0.amplitudes, atol=1e-13)
    np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-10)


def test_evolve_rejects_bad_inputs():
    ops = build_operators(FockConfig(32), NAT0)
    with pytest.raises(ValueError):
        evolve(ops.H, np.ones(32), [0.0])
    bad = ops.H.copy()
    bad[0, 1] += 1.0
    with pytest.raises(ValueError):
        evolve(bad, FockState(np.eye(32)[0].astype(complex)), [0.0])


def test_coherent_width_constant_under_h0():
    ex = run_exact(GaussianPacket(1.0, 0.0, 1 / math.sqrt(2)), NAT0, T3, FockConfig(128))
    np.testing.assert_allclose(np.sqrt(ex.var_q), math.sqrt(0.5), atol=1e-10)
    np.testing.assert_allclose(ex.product, 0.5, atol=1e-9)


def test_energy_conservation():
    p = OscillatorParams.natural(2e-3)
    ex = run_exact(GaussianPacket(1.0, -0.5, 0.6), p, T3, FockConfig(256))
    np.testing.assert_allclose(ex.energy, ex.energy[0], rtol=1e-10)
    np.testing.assert_allclose(ex.norm, 1.0, atol=1e-10)


def test_ground_state_under_h0():
    ex = run_exact(G, NAT0, T3, FockConfig(64))
    np.testing.assert_allclose(ex.var_q, 0.5, atol=1e-12)


def test_initial_moments_match_closed_forms():
    pk = GaussianPacket(0.7, -0.4, 0.9)
    ex = run_exact(pk, NAT0, [0.0], FockConfig(256))
    assert ex.mean_q[0] == pytest.approx(moment(pk, MomentKind.Q).real, abs=1e-9)
    assert ex.mean_p[0] == pytest.approx(moment(pk, MomentKind.P).real, abs=1e-9)
    assert ex.var_q[0] == pytest.approx(pk.sigma_q**2, abs=1e-9)
    assert ex.var_p[0] == pytest.approx(pk.sigma_p() ** 2, abs=1e-9)


def test_relativistic_shift_first_order():
    eps = 1e-3
    ex = run_exact(G, OscillatorParams.natural(eps), T3, FockConfig(128))
    vq, _, _ = nr_variances(G, NAT0, T3)
    shift = np.max(np.abs(ex.var_q - vq))
    assert 0.1 * eps < shift < 10 * eps


def test_basis_convergence():
    pk = GaussianPacket(1.0, 0.5, 0.6)
    p = OscillatorParams.natural(1e-3)
    a = run_exact(pk, p, T3, FockConfig(128))
    b = run_exact(pk, p, T3, FockConfig(256))
    for name in ("var_q", "var_p", "mean_q", "mean_p"):
        x, y = getattr(a, name), getattr(b, name)
        assert np.max(np.abs(x - y)) < 1e-9 * max(1.0, np.max(np.abs(y))), name


def test_first_order_agreement_with_engine():
    eps = 1e-4
    p = OscillatorParams.natural(eps)
    ex = run_exact(G, p, T3, FockConfig(128))
    s = series(G, p, T3)
    assert np.max(np.abs(ex.var_q - s.sigma_q2_rel)) < 10 * eps**2
    assert np.max(np.abs(ex.var_p - s.sigma_p2_rel)) < 10 * eps**2


def test_v_operator_zero_and_hermitian(ops64):
    p = OscillatorParams.natural(1e-3)
    assert np.all(v_operator(0.0, ops64.q, ops64.p, p) == 0)
    V = v_operator(2.3, ops64.q, ops64.p, p)
    assert hermiticity_error(V) < 1e-9 * np.max(np.abs(V))


def test_commutator_at_zero():
    assert commutator_check(0.0, FockConfig(64), NAT0) == (0.0, 0.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, math.pi, 5.0])
def test_commutator_oracle(t):
    rp, rq = commutator_check(t, FockConfig(64), NAT0, "oracle")
    assert rp < 1e-8 and rq < 1e-8


def test_commutator_oracle_with_units():
    p = OscillatorParams(1.3, 0.7, 0.9, math.inf)
    rp, rq = commutator_check(2.2, FockConfig(64), p, "oracle")
    assert rp < 1e-8 and rq < 1e-8


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 5.0])
def test_commutator_printed_is_order_one(t):
    rp, rq = commutator_check(t, FockConfig(64), NAT0, "printed")
    assert rp > 0.1 and rq > 0.1


def test_richardson_tables_structure():
    tabs = richardson(G, np.linspace(0, 2 * math.pi, 41), 2e-3, FockConfig(64))
    assert [t.quantity for t in tabs] == ["sigma_q2", "sigma_p2", "product"]
    for t in tabs:
        assert t.noise < 1e-12
        d = t.as_dict()
        assert len(d["ratio"]) == 41
