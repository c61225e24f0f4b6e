import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from kdspin import dirac
from kdspin.errors import InvalidArgument

REF_K0 = np.array([-0.0254, 0.0, 1.000134])
REF_K1 = np.array([0.0, 0.0, 1.000134])

finite = st.floats(-2.0, 2.0, allow_nan=False)
momenta = st.tuples(finite, finite, finite).map(np.array)
angles = st.floats(0, 2 * math.pi)


def spinor_from(theta, phi):
    return np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])


spinors = st.builds(spinor_from, angles, angles)


def test_energy_examples():
    assert dirac.relativistic_energy([0, 0, 0]) == 1.0
    assert dirac.relativistic_energy([0, 0, 1]) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert dirac.relativistic_energy(REF_K0) == pytest.approx(1.41454, abs=5e-6)


def test_energy_rejects_non_finite():
    with pytest.raises(InvalidArgument):
        dirac.relativistic_energy([0, np.nan, 1])
    with pytest.raises(InvalidArgument):
        dirac.relativistic_energy([0, 1])


def test_rest_frame_bispinors():
    np.testing.assert_allclose(dirac.bispinor_u([0, 0, 0], dirac.SPIN_UP), [1, 0, 0, 0])
    np.testing.assert_allclose(dirac.bispinor_v([0, 0, 0], dirac.SPIN_DOWN), [0, 0, 0, 1])


@given(momenta, spinors)
def test_bispinors_match_projector_construction(k, s):
    np.testing.assert_allclose(dirac.bispinor_u(k, s), oracles.u(k, s), atol=1e-13)
    np.testing.assert_allclose(dirac.bispinor_v(k, s), oracles.v(k, s), atol=1e-13)


@given(momenta, spinors)
def test_bispinor_normalisation(k, s):
    u = dirac.bispinor_u(k, s)
    v = dirac.bispinor_v(k, s)
    assert np.vdot(u, u).real == pytest.approx(1.0, abs=1e-13)
    assert np.vdot(v, v).real == pytest.approx(1.0, abs=1e-13)


@given(momenta)
def test_bispinor_orthogonality(k):
    for make in (dirac.bispinor_u, dirac.bispinor_v):
        a = make(k, dirac.SPIN_UP)
        b = make(k, dirac.SPIN_DOWN)
        assert abs(np.vdot(a, b)) < 1e-13


def test_reference_kinematics_normalisation():
    for s in (dirac.SPIN_UP, dirac.SPIN_DOWN, *dirac.tilted_spin_basis()):
        u = dirac.bispinor_u(REF_K0, s)
        assert np.vdot(u, u).real == pytest.approx(1.0, abs=1e-14)


def test_pauli_algebra_exhaustive():
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k], eps[j, i, k] = 1, -1
    for i in range(3):
        for j in range(3):
            expected = (i == j) * np.eye(2) + 1j * sum(eps[i, j, k] * dirac.PAULI[k] for k in range(3))
            np.testing.assert_allclose(dirac.PAULI[i] @ dirac.PAULI[j], expected, atol=1e-15)


def test_clifford_algebra_exhaustive():
    for mu in range(4):
        for nu in range(4):
            anti = dirac.GAMMA[mu] @ dirac.GAMMA[nu] + dirac.GAMMA[nu] @ dirac.GAMMA[mu]
            np.testing.assert_allclose(anti, 2 * dirac.METRIC[mu, nu] * np.eye(4), atol=1e-15)


def test_gamma_matrices_are_dirac_representation():
    for mu in range(4):
        np.testing.assert_allclose(dirac.GAMMA[mu], oracles.GAMMAS[mu], atol=1e-15)


def test_spin_sum_completeness(rng):
    for _ in range(100):
        p = rng.uniform(-1, 1, 3)
        p *= rng.uniform(0, 2) / np.linalg.norm(p)
        e = dirac.relativistic_energy(p)
        p4 = np.concatenate([[e], p])
        uu = sum(np.outer(dirac.bispinor_u(p, s), dirac.dirac_bar(dirac.bispinor_u(p, s)))
                 for s in (dirac.SPIN_UP, dirac.SPIN_DOWN))
        vv = sum(np.outer(dirac.bispinor_v(p, s), dirac.dirac_bar(dirac.bispinor_v(p, s)))
                 for s in (dirac.SPIN_UP, dirac.SPIN_DOWN))
        np.testing.assert_allclose(uu, (dirac.slash(p4) + np.eye(4)) / (2 * e), atol=1e-12)
        np.testing.assert_allclose(vv, (dirac.slash(p4) - np.eye(4)) / (2 * e), atol=1e-12)


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=8, max_size=8))
def test_minkowski_dot_bilinear_symmetric(vals):
    a, b = np.array(vals[:4]), np.array(vals[4:])
    assert dirac.minkowski_dot(a, b) == pytest.approx(dirac.minkowski_dot(b, a), abs=1e-9)
    assert dirac.minkowski_dot(2 * a, b) == pytest.approx(2 * dirac.minkowski_dot(a, b), abs=1e-9)


def test_coupling_examples():
    s = dirac.SPIN_UP
    assert dirac.coupling_L(REF_K0, REF_K0, 1, 1, s, s, 0) == pytest.approx(1.0, abs=1e-14)
    assert abs(dirac.coupling_L(REF_K0, REF_K0, 1, 1, s, dirac.SPIN_DOWN, 0)) < 1e-14
    # frozen from the independent projector-built oracle
    value = dirac.coupling_L(REF_K0, REF_K1, 1, -1, dirac.SPIN_UP, dirac.SPIN_DOWN, 3)
    assert value == pytest.approx(0.003719371521093642, abs=1e-15)
    assert value == pytest.approx(
        oracles.L(REF_K0, REF_K1, 1, -1, oracles.UP, oracles.DOWN, 3), abs=1e-15)


def test_coupling_rejects_bad_index():
    with pytest.raises(InvalidArgument):
        dirac.coupling_L(REF_K0, REF_K1, 1, 1, dirac.SPIN_UP, dirac.SPIN_UP, 4)


@settings(max_examples=30)
@given(momenta, momenta)
def test_coupling_blocks_match_oracle(k, kp):
    blocks = dirac.coupling_blocks(k, kp)
    labels = [(1, oracles.UP), (1, oracles.DOWN), (-1, oracles.UP), (-1, oracles.DOWN)]
    for mu in range(4):
        for i, (b, s) in enumerate(labels):
            for j, (bp, sp) in enumerate(labels):
                assert blocks[mu, i, j] == pytest.approx(oracles.L(k, kp, b, bp, s, sp, mu), abs=1e-12)


def test_tilted_basis_values():
    s_se, s_nw = dirac.tilted_spin_basis()
    np.testing.assert_allclose(s_se, [-0.382683, -0.923880], atol=5e-7)
    np.testing.assert_allclose(s_nw, [0.923880, -0.382683], atol=5e-7)
    assert abs(np.vdot(s_se, s_nw)) < 1e-15
    a_se, a_nw = dirac.tilted_spin_basis_algebraic()
    np.testing.assert_allclose(s_se, a_se, atol=1e-12)
    np.testing.assert_allclose(s_nw, a_nw, atol=1e-12)


def test_spin_filter_matrix():
    ms = dirac.spin_filter_matrix()
    s_se, s_nw = dirac.tilted_spin_basis()
    assert ms[0, 0] == pytest.approx(-0.353553, abs=5e-7)
    np.testing.assert_allclose(ms, np.outer(s_nw, np.conj(s_se)), atol=1e-12)
    np.testing.assert_allclose(ms @ s_nw, 0, atol=1e-15)
    np.testing.assert_allclose(ms @ s_se, s_nw, atol=1e-15)
    assert dirac.braket(s_nw, ms, s_se) == pytest.approx(1.0, abs=1e-15)


@given(st.lists(st.complex_numbers(max_magnitude=100, allow_nan=False, allow_infinity=False),
                min_size=4, max_size=4))
def test_pauli_round_trip(coeffs):
    m = dirac.pauli_compose(coeffs)
    np.testing.assert_allclose(dirac.pauli_decompose(m), coeffs, atol=1e-12)
    np.testing.assert_allclose(dirac.pauli_compose(dirac.pauli_decompose(m)), m, atol=1e-12)
