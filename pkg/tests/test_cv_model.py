import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from qwalk.cv_model import (
    HALF_PI_PULSE,
    PI_PULSE,
    HybridFockState,
    ModelParams,
    circle_site_distribution,
    circle_step,
    coherent_state,
    coin_operator,
    conditional_displacement,
    conditional_rotation,
    fidelity,
    four_pulse_step,
    hermite_functions,
    hybrid_state,
    ladder_ops,
    line_state_from_walk,
    operator_distance,
    phase_sector_distribution,
    position_density,
    position_distribution,
    quad_ops,
    ring_state_from_walk,
    run_cv_circle,
    run_cv_line,
    tail_mass,
    up_displacement,
    walk_unitary,
)
from qwalk.errors import TruncationError
from qwalk.walk_core import HADAMARD, SIGMA_X, distribution, run_line, run_ring

P64 = ModelParams(fock_dim=64)
P128 = ModelParams()


def _mean(state, op, params):
    full = np.kron(np.eye(2), op)
    return float(np.real(np.vdot(state.vec, full @ state.vec)))


def test_pulse_matrices():
    np.testing.assert_allclose(HALF_PI_PULSE, SIGMA_X @ HADAMARD, atol=1e-15)
    np.testing.assert_allclose(PI_PULSE, -1j * SIGMA_X, atol=1e-15)


def test_canonical_commutator_on_low_block():
    a, adag = ladder_ops(P64)
    comm = a @ adag - adag @ a
    np.testing.assert_allclose(comm[:60, :60], np.eye(60), atol=1e-12)
    x, p, n = quad_ops(P64)
    np.testing.assert_allclose((x @ p - p @ x)[:60, :60], 1j * np.eye(60), atol=1e-12)
    np.testing.assert_allclose(n, adag @ a, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2 - 1j, 3j])
def test_coherent_state_moments(alpha):
    psi = coherent_state(alpha, P64)
    x, p, n = quad_ops(P64)
    assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-12)
    assert np.vdot(psi, n @ psi).real == pytest.approx(abs(alpha) ** 2, abs=1e-9)
    assert np.vdot(psi, x @ psi).real == pytest.approx(np.sqrt(2) * np.real(alpha), abs=1e-9)
    assert np.vdot(psi, p @ psi).real == pytest.approx(np.sqrt(2) * np.imag(alpha), abs=1e-9)


def test_coherent_state_is_eigenvector_of_a():
    a, _ = ladder_ops(P64)
    psi = coherent_state(1.5 + 0.5j, P64)
    np.testing.assert_allclose((a @ psi)[:50], (1.5 + 0.5j) * psi[:50], atol=1e-10)


def test_coherent_state_truncation_error():
    with pytest.raises(TruncationError, match="fock_dim"):
        coherent_state(5.0, ModelParams(fock_dim=20))


def test_four_pulse_compilation():
    assert operator_distance(four_pulse_step(P128), walk_unitary(P128), P128) <= 1e-8


def test_same_sign_fourth_pulse_does_not_condition():
    s = 1.0
    naive = (
        up_displacement(P64, s)
        @ coin_operator(PI_PULSE, P64)
        @ up_displacement(P64, s)
        @ coin_operator(HALF_PI_PULSE, P64)
    )
    assert operator_distance(naive, walk_unitary(P64), P64) > 0.5


def test_walk_unitary_matches_hand_built_exponential():
    # e^{i s p sigma_z} is block diagonal: e^{-i s p} on down, e^{+i s p} on up
    _, p, _ = quad_ops(P64)
    blocks = scipy.linalg.block_diag(scipy.linalg.expm(-1j * p), scipy.linalg.expm(1j * p))
    ref = blocks @ coin_operator(HADAMARD, P64)
    assert operator_distance(walk_unitary(P64), ref, P64) < 1e-10
    assert operator_distance(conditional_displacement(P64), blocks, P64) < 1e-10


def test_conditional_displacement_directions():
    x, _, _ = quad_ops(P64)
    vac = coherent_state(0, P64)
    U = conditional_displacement(P64, 1.5)
    down = HybridFockState(U @ hybrid_state(vac, "down", P64).vec, P64)
    up = HybridFockState(U @ hybrid_state(vac, "up", P64).vec, P64)
    assert _mean(down, x, P64) == pytest.approx(1.5, abs=1e-9)
    assert _mean(up, x, P64) == pytest.approx(-1.5, abs=1e-9)


def test_conditional_rotation_moves_sites():
    rot = conditional_rotation(P64)
    a = coherent_state(2.0, P64)
    down = HybridFockState(rot @ hybrid_state(a, "down", P64).vec, P64)
    up = HybridFockState(rot @ hybrid_state(a, "up", P64).vec, P64)
    assert fidelity(down, hybrid_state(coherent_state(-2j, P64), "down", P64)) > 1 - 1e-12
    assert fidelity(up, hybrid_state(coherent_state(2j, P64), "up", P64)) > 1 - 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 5))
def test_cv_line_matches_embedded_walk(N):
    cv = run_cv_line(N, "symmetric", P128)
    ideal = line_state_from_walk(run_line(N, "symmetric"), P128)
    assert fidelity(cv, ideal) > 1 - 1e-10


def test_cv_line_vacuum_bin():
    dist = position_distribution(run_cv_line(0, "down", P64), P64, max_site=3)
    assert dist[0] == pytest.approx(erf(0.5), abs=1e-12)
    assert dist[1] == pytest.approx((erf(1.5) - erf(0.5)) / 2, abs=1e-12)
    assert dist.total == pytest.approx(erf(3.5), abs=1e-12)


def test_cv_line_reproduces_quantum_table_with_wide_steps():
    params = ModelParams(fock_dim=256, step_displacement=4.0)
    dist = position_distribution(run_cv_line(4, "symmetric", params), params, max_site=6)
    ideal = distribution(run_line(4, "symmetric"))
    assert dist.l1_distance(ideal) < 0.02


def test_cv_line_truncation_precheck():
    with pytest.raises(TruncationError, match="fock_dim"):
        run_cv_line(30, "down", ModelParams(fock_dim=32))


@pytest.mark.parametrize("N", range(9))
def test_cv_circle_matches_ring(N):
    cv = run_cv_circle(N, 3.0, "down", P128)
    ideal = distribution(run_ring(N, "down"))
    sites = circle_site_distribution(cv, 3.0, P128)
    assert np.max(np.abs(sites.probabilities - ideal.probabilities)) <= 3 * np.exp(-18) + 1e-6
    assert fidelity(cv, ring_state_from_walk(run_ring(N, "down"), 3.0, P128)) > 1 - 1e-12


def test_phase_sectors_of_coherent_state():
    # most of the Husimi mass of |3> sits in the sector of angle 0
    state = hybrid_state(coherent_state(3.0, P64), "down", P64)
    sectors = phase_sector_distribution(state, P64)
    assert sectors.total == pytest.approx(1.0, abs=1e-6)
    assert sectors[0] > 0.95
    assert sectors[1] == pytest.approx(sectors[3], abs=1e-9)


def test_hermite_functions_orthonormal():
    x, w = np.polynomial.hermite.hermgauss(80)
    phi = hermite_functions(20, x) * np.exp(x**2 / 2)
    gram = (phi * w) @ phi.T
    np.testing.assert_allclose(gram, np.eye(20), atol=1e-10)


def test_position_density_of_shifted_vacuum():
    state = run_cv_line(1, "down", P64)  # H puts half on each branch, shifted by +-1
    xs = np.linspace(-4, 4, 9)
    expected = 0.5 * (np.exp(-((xs - 1) ** 2)) + np.exp(-((xs + 1) ** 2))) / np.sqrt(np.pi)
    np.testing.assert_allclose(position_density(state, xs, P64), expected, atol=1e-12)
    np.testing.assert_allclose(position_density(state.density(), xs, P64), expected, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_circle_step_is_unitary(re, im):
    params = ModelParams(fock_dim=40)
    psi = hybrid_state(coherent_state(complex(re, im), params), "symmetric", params)
    out = circle_step(params) @ psi.vec
    assert np.vdot(out, out).real == pytest.approx(1.0, abs=1e-12)


def test_tail_mass_and_params():
    state = hybrid_state(coherent_state(3.0, P64), "down", P64)
    assert tail_mass(state, P64) < 1e-12
    assert P128.low_block == 102
    assert P128.tail_start == 115
    with pytest.raises(ValueError):
        ModelParams(fock_dim=1)
    with pytest.raises(TypeError):
        ModelParams(fock_dim=2.5)
    with pytest.raises(ValueError):
        ModelParams(step_displacement=0)


def test_hybrid_vector_length_checked():
    with pytest.raises(ValueError):
        HybridFockState(np.zeros(10), P64)
