import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqelm.errors import InvalidArgument, StateError
from cvqelm.gaussian import (
    GateOp,
    GaussianState,
    apply,
    beamsplitter_gate,
    compose,
    cx_decomposition_params,
    cx_gate,
    cx_gate_decomposed,
    displacement_gate,
    identity_gate,
    mode_marginal,
    omega,
    squeeze_gate,
    vacuum_state,
)
from cvqelm.verify import random_gate

from conftest import assert_symplectic

SQ2 = np.sqrt(2.0)


def test_omega_blocks():
    W = omega(2)
    assert np.array_equal(W[:2, :2], [[0, 1], [-1, 0]])
    assert np.array_equal(W[2:, 2:], [[0, 1], [-1, 0]])
    assert np.all(W[:2, 2:] == 0)


@pytest.mark.parametrize("M", [1, 2, 16])
def test_vacuum(M):
    st = vacuum_state(M)
    assert np.all(st.mean == 0) and st.mean.shape == (2 * M,)
    assert np.array_equal(st.cov, 0.5 * np.eye(2 * M))
    assert st.is_physical()
    assert st.purity_det() == pytest.approx(1.0, abs=1e-12)


def test_vacuum_rejects_zero_modes():
    with pytest.raises(InvalidArgument):
        vacuum_state(0)


def test_state_rejects_asymmetric_cov():
    cov = np.array([[0.5, 0.1], [0.0, 0.5]])
    with pytest.raises(InvalidArgument):
        GaussianState(1, np.zeros(2), cov)


def test_unphysical_state_detected():
    st = GaussianState(1, np.zeros(2), 0.1 * np.eye(2))
    assert not st.is_physical()
    with pytest.raises(StateError):
        st.check_physical()


def test_displacement_zero_is_identity():
    g = displacement_gate(1, 0, 0.0, 0.0)
    assert np.array_equal(g.symplectic, np.eye(2)) and np.all(g.shift == 0)


def test_displacement_real_and_imaginary():
    st = apply(vacuum_state(1), displacement_gate(1, 0, 1.0, 0.0))
    assert np.allclose(st.mean, [SQ2, 0.0])
    assert np.array_equal(st.cov, 0.5 * np.eye(2))
    st = apply(vacuum_state(2), displacement_gate(2, 1, 0.0, 1.0))
    assert np.allclose(st.mean, [0, 0, 0, SQ2])


def test_displacement_mode_out_of_range():
    with pytest.raises(InvalidArgument):
        displacement_gate(2, 2, 1.0)


def test_squeeze_action():
    assert np.allclose(squeeze_gate(1, 0, 0.0).symplectic, np.eye(2))
    st = apply(vacuum_state(1), squeeze_gate(1, 0, 0.5))
    assert np.allclose(st.cov, np.diag([0.5 * np.exp(-1), 0.5 * np.exp(1)]), atol=1e-12)
    assert np.allclose(np.diag(st.cov), [0.18394, 1.35914], atol=1e-5)
    back = apply(st, squeeze_gate(1, 0, -0.5))
    assert np.allclose(back.cov, 0.5 * np.eye(2), atol=1e-12)


def test_beamsplitter_identity_and_inverse():
    assert np.allclose(beamsplitter_gate(2, 0, 1, 0.0).symplectic, np.eye(4), atol=1e-15)
    g = compose(beamsplitter_gate(2, 0, 1, 0.7), beamsplitter_gate(2, 0, 1, -0.7))
    assert np.allclose(g.symplectic, np.eye(4), atol=1e-12)


def test_beamsplitter_phi_zero_is_rotation():
    th = 0.3
    S = beamsplitter_gate(2, 0, 1, th).symplectic
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    xs = S[np.ix_([0, 2], [0, 2])]
    ps = S[np.ix_([1, 3], [1, 3])]
    assert np.allclose(xs, ps, atol=1e-14)
    assert np.allclose(np.abs(xs), np.abs(R), atol=1e-14)
    assert np.allclose(S[np.ix_([0, 2], [1, 3])], 0, atol=1e-14)


def test_beamsplitter_same_mode_rejected():
    with pytest.raises(InvalidArgument):
        beamsplitter_gate(2, 1, 1, 0.2)


def test_cx_heisenberg_action():
    S = cx_gate(2, 0, 1, 0.8).symplectic
    expected = np.eye(4)
    expected[2, 0] = 0.8  # x_t += s x_c
    expected[1, 3] = -0.8  # p_c -= s p_t
    assert np.array_equal(S, expected)
    assert np.array_equal(cx_gate(2, 0, 1, 0.0).symplectic, np.eye(4))


def test_cx_worked_example():
    st = apply(vacuum_state(2), displacement_gate(2, 0, 1.0))
    st = apply(st, cx_gate(2, 0, 1, 1.0))
    mu, V = mode_marginal(st, 1)
    assert mu[0] == pytest.approx(SQ2)
    assert np.allclose(V, np.diag([1.0, 0.5]))
    nbar = 0.5 * (np.trace(V) + mu @ mu) - 0.5
    assert nbar == pytest.approx(1.25)


@pytest.mark.parametrize("s", [-2.0, 0.7, 3.0])
def test_cx_symplectic(s):
    assert_symplectic(cx_gate(3, 2, 0, s).symplectic)


def test_cx_same_mode_rejected():
    with pytest.raises(InvalidArgument):
        cx_gate(2, 0, 0, 1.0)


def test_cx_decomposition_params_s2():
    r, theta = cx_decomposition_params(2.0)
    assert r == pytest.approx(-np.arcsinh(1.0), abs=1e-12)
    assert r == pytest.approx(-0.881374, abs=1e-6)
    # magnitude pi/8; the sign that reproduces CX is negative
    assert abs(theta) == pytest.approx(np.pi / 8, abs=1e-12)
    assert np.cos(2 * theta) == pytest.approx(-np.tanh(r), abs=1e-12)


def test_cx_decomposition_s0_collapses():
    r, theta = cx_decomposition_params(0.0)
    assert r == 0.0
    assert np.allclose(cx_gate_decomposed(2, 0, 1, 0.0).symplectic, np.eye(4), atol=1e-12)


def test_cx_decomposition_matches_direct(rng):
    for s in [1.0, *rng.uniform(-3, 3, 20)]:
        a = cx_gate(2, 0, 1, s).symplectic
        b = cx_gate_decomposed(2, 0, 1, s).symplectic
        assert np.abs(a - b).max() < 1e-10


def test_cx_decomposition_positive_root_fails():
    # the other root of cos(2 theta) = -tanh r does not give CX
    s = 1.3
    r, theta = cx_decomposition_params(s)
    g = compose(
        beamsplitter_gate(2, 0, 1, -theta),
        squeeze_gate(2, 0, r),
        squeeze_gate(2, 1, -r),
        beamsplitter_gate(2, 0, 1, np.pi / 2 - theta),
    )
    assert np.abs(g.symplectic - cx_gate(2, 0, 1, s).symplectic).max() > 0.1


def test_cx_decomposed_on_larger_register():
    a = cx_gate(4, 3, 1, -1.1).symplectic
    b = cx_gate_decomposed(4, 3, 1, -1.1).symplectic
    assert np.abs(a - b).max() < 1e-10


def test_apply_identity_and_inverse_displacement():
    st = apply(vacuum_state(2), squeeze_gate(2, 0, 0.3))
    same = apply(st, identity_gate(2))
    assert np.array_equal(same.mean, st.mean) and np.array_equal(same.cov, st.cov)
    d = apply(apply(st, displacement_gate(2, 1, 0.4, -0.2)), displacement_gate(2, 1, -0.4, 0.2))
    assert np.allclose(d.mean, st.mean, atol=1e-12) and np.allclose(d.cov, st.cov, atol=1e-12)


def test_apply_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        apply(vacuum_state(1), cx_gate(2, 0, 1, 1.0))


def test_random_three_gate_purity(rng):
    for _ in range(20):
        gates = [random_gate(rng, 2) for _ in range(3)]
        st = vacuum_state(2)
        for g in gates:
            st = apply(st, g)
        assert st.purity_det() == pytest.approx(1.0, abs=1e-9)


def test_composition_law_on_random_triples(rng):
    for _ in range(20):
        g1, g2, g3 = (random_gate(rng, 3) for _ in range(3))
        left = compose(compose(g1, g2), g3)
        right = compose(g1, compose(g2, g3))
        assert np.allclose(left.symplectic, right.symplectic, atol=1e-12)
        assert np.allclose(left.shift, right.shift, atol=1e-12)
        # (S2 S1, S2 d1 + d2)
        c = compose(g1, g2)
        assert np.allclose(c.symplectic, g2.symplectic @ g1.symplectic)
        assert np.allclose(c.shift, g2.symplectic @ g1.shift + g2.shift)


def test_mode_marginal():
    mu, V = mode_marginal(vacuum_state(3), 2)
    assert np.array_equal(mu, [0, 0]) and np.array_equal(V, 0.5 * np.eye(2))
    mu, _ = mode_marginal(apply(vacuum_state(1), displacement_gate(1, 0, 1.0)), 0)
    assert np.allclose(mu, [SQ2, 0])
    with pytest.raises(InvalidArgument):
        mode_marginal(vacuum_state(2), 2)


def test_gateop_rejects_bad_shapes():
    with pytest.raises(InvalidArgument):
        GateOp(2, np.eye(3), np.zeros(4))


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 4),
    st.lists(st.tuples(st.integers(0, 3), st.floats(-2, 2), st.floats(-np.pi, np.pi)), min_size=1, max_size=6),
)
def test_property_constructors_symplectic(M, specs):
    gates = []
    for kind, a, b in specs:
        if kind == 0:
            gates.append(displacement_gate(M, 0, a, b))
        elif kind == 1:
            gates.append(squeeze_gate(M, M - 1, a / 2))
        elif M > 1 and kind == 2:
            gates.append(beamsplitter_gate(M, 0, M - 1, a, b))
        elif M > 1:
            gates.append(cx_gate(M, M - 1, 0, a))
    if not gates:
        return
    g = compose(*gates)
    assert g.symplectic_error() < 1e-12
    st_out = apply(vacuum_state(M), g)
    assert st_out.min_eigenvalue() >= -1e-10
    assert st_out.purity_det() == pytest.approx(1.0, abs=1e-9)
