from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk.walk_core import (
    HADAMARD,
    RING_LABELS,
    CoinVector,
    Distribution,
    LineState,
    RingState,
    classical_circle_distribution,
    classical_line_distribution,
    distribution,
    hadamard,
    ring_fidelity,
    run_line,
    run_ring,
    sigma_slope,
    stats,
    step_line,
)

CLASSICAL_LINE = {
    0: {0: F(1)},
    1: {-1: F(1, 2), 1: F(1, 2)},
    2: {-2: F(1, 4), 0: F(1, 2), 2: F(1, 4)},
    3: {-3: F(1, 8), -1: F(3, 8), 1: F(3, 8), 3: F(1, 8)},
    4: {-4: F(1, 16), -2: F(4, 16), 0: F(6, 16), 2: F(4, 16), 4: F(1, 16)},
}

QUANTUM_LINE = {
    0: {0: F(1)},
    1: {-1: F(1, 2), 1: F(1, 2)},
    2: {-2: F(1, 4), 0: F(1, 2), 2: F(1, 4)},
    3: {-3: F(1, 8), -1: F(3, 8), 1: F(3, 8), 3: F(1, 8)},
    4: {-4: F(1, 16), -2: F(6, 16), 0: F(2, 16), 2: F(6, 16), 4: F(1, 16)},
}

# site probabilities for (0, pi/2, pi, -pi/2), coin starting down
QUANTUM_RING = [
    (1, 0, 0, 0),
    (0, F(1, 2), 0, F(1, 2)),
    (F(1, 2), 0, F(1, 2), 0),
    (0, 1, 0, 0),
    (0, 0, 1, 0),
    (0, F(1, 2), 0, F(1, 2)),
    (F(1, 2), 0, F(1, 2), 0),
    (0, 0, 0, 1),
]

coin_components = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).filter(lambda t: sum(v * v for v in t) > 1e-3)


def _coin(t):
    v = np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]])
    return CoinVector.from_array(v / np.linalg.norm(v))


def _expected(table, N):
    return np.array([float(table[N].get(d, 0)) for d in range(-N, N + 1)])


@pytest.mark.parametrize("N", range(5))
def test_classical_line_table(N):
    dist = classical_line_distribution(N)
    assert list(dist.support) == list(range(-N, N + 1))
    np.testing.assert_allclose(dist.probabilities, _expected(CLASSICAL_LINE, N), atol=1e-15)


@pytest.mark.parametrize("N", range(5))
def test_quantum_line_table(N):
    dist = distribution(run_line(N, "symmetric"))
    np.testing.assert_allclose(dist.probabilities, _expected(QUANTUM_LINE, N), atol=1e-12)


@pytest.mark.parametrize("N", range(8))
def test_quantum_ring_table(N):
    dist = distribution(run_ring(N, "down"))
    np.testing.assert_allclose(dist.probabilities, [float(v) for v in QUANTUM_RING[N]], atol=1e-12)


def test_classical_circle_alternates():
    for N in range(1, 12, 2):
        np.testing.assert_allclose(classical_circle_distribution(N).probabilities, [0, 0.5, 0, 0.5])
    for N in range(2, 12, 2):
        np.testing.assert_allclose(classical_circle_distribution(N).probabilities, [0.5, 0, 0.5, 0])


def test_classical_circle_matches_markov_chain():
    T = np.zeros((4, 4))
    for k in range(4):
        T[(k + 1) % 4, k] = T[(k - 1) % 4, k] = 0.5
    p = np.array([1.0, 0, 0, 0])
    for N in range(9):
        np.testing.assert_allclose(classical_circle_distribution(N).probabilities, p, atol=1e-15)
        p = T @ p


def _brute_force_line(N, coin):
    """Full (2N+1)*2 unitary built from explicit shift and coin matrices."""
    L = 2 * N + 1
    shift = np.zeros((2 * L, 2 * L))
    for i in range(L):
        if i + 1 < L:
            shift[(i + 1) * 2 + 0, i * 2 + 0] = 1  # down steps right
        if i - 1 >= 0:
            shift[(i - 1) * 2 + 1, i * 2 + 1] = 1  # up steps left
    U = shift @ np.kron(np.eye(L), HADAMARD)
    psi = np.zeros(2 * L, dtype=complex)
    psi[N * 2 : N * 2 + 2] = coin.as_array()
    for _ in range(N):
        psi = U @ psi
    return psi.reshape(L, 2)


@settings(max_examples=30, deadline=None)
@given(coin_components, st.integers(0, 12))
def test_line_matches_brute_force_unitary(t, N):
    coin = _coin(t)
    np.testing.assert_allclose(run_line(N, coin).amps, _brute_force_line(N, coin), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(coin_components, st.integers(0, 40))
def test_norm_preserved(t, N):
    coin = _coin(t)
    assert abs(run_line(N, coin).norm2 - 1) < 1e-12
    assert abs(run_ring(N, coin).norm2 - 1) < 1e-12


@settings(max_examples=30, deadline=None)
@given(coin_components, st.integers(0, 3))
def test_ring_period_eight(t, start):
    coin = _coin(t)
    s0 = run_ring(start, coin)
    s8 = run_ring(start + 8, coin)
    assert ring_fidelity(s0, s8) > 1 - 1e-12


def test_wrong_parity_sites_are_empty():
    dist = distribution(run_line(7, "down"))
    assert np.all(dist.probabilities[1::2] == 0)


def test_classical_sigma_is_sqrt_n():
    for N in (0, 1, 7, 50, 100):
        assert abs(stats(classical_line_distribution(N)).stddev - np.sqrt(N)) < 1e-10


def test_symmetric_coin_has_zero_mean():
    for N in (5, 20, 33):
        assert abs(stats(distribution(run_line(N, "symmetric"))).mean) < 1e-12


def test_basis_coins_drift_oppositely():
    down = stats(distribution(run_line(30, "down")))
    up = stats(distribution(run_line(30, "up")))
    assert down.mean > 1
    assert down.mean == pytest.approx(-up.mean, abs=1e-12)
    assert down.stddev == pytest.approx(up.stddev, abs=1e-12)


def test_quantum_spread_is_linear():
    # slope measured on N in [20, 40]; the asymptotic value is sqrt(1 - 1/sqrt(2))
    assert sigma_slope("symmetric") == pytest.approx(0.540597, abs=1e-6)
    assert sigma_slope("down") == pytest.approx(0.454752, abs=1e-6)
    assert sigma_slope("symmetric", range(200, 241)) == pytest.approx(
        np.sqrt(1 - 1 / np.sqrt(2)), abs=2e-3
    )


def test_hadamard_on_basis():
    h = hadamard(CoinVector.down())
    assert h.a_down == pytest.approx(2**-0.5)
    assert h.a_up == pytest.approx(2**-0.5)


@pytest.mark.parametrize(
    "token, expected",
    [
        ("down", (1, 0)),
        ("up", (0, 1)),
        ("symmetric", (2**-0.5, 1j * 2**-0.5)),
        ("0.6,0,0,0.8", (0.6, 0.8j)),
    ],
)
def test_coin_tokens(token, expected):
    c = CoinVector.from_token(token)
    assert c.a_down == pytest.approx(expected[0])
    assert c.a_up == pytest.approx(expected[1])


@pytest.mark.parametrize("token", ["sideways", "1,0,0", "a,b,c,d"])
def test_bad_coin_tokens(token):
    with pytest.raises(ValueError):
        CoinVector.from_token(token)


def test_unnormalized_coin_rejected():
    with pytest.raises(ValueError):
        run_line(3, CoinVector(1.0, 1.0))


def test_negative_steps_rejected():
    with pytest.raises(ValueError):
        run_line(-1)
    with pytest.raises(ValueError):
        classical_line_distribution(-2)


def test_state_shapes_checked():
    with pytest.raises(ValueError):
        LineState(2, np.zeros((4, 2)))
    with pytest.raises(ValueError):
        RingState(np.zeros((3, 2)))


def test_step_line_grows_grid():
    s = step_line(LineState.initial(CoinVector.down()))
    assert s.step_count == 1
    assert s.positions.tolist() == [-1, 0, 1]


def test_distribution_helpers():
    ring = distribution(run_ring(1, "down"))
    assert ring.labels() == list(RING_LABELS)
    assert ring["pi/2"] == pytest.approx(0.5)
    assert ring[1] == pytest.approx(0.5)
    line = classical_line_distribution(2)
    assert line[0] == pytest.approx(0.5)
    assert line.as_dict()[-2] == pytest.approx(0.25)
    assert line.total == pytest.approx(1.0)
    other = Distribution([-2, -1, 0, 1, 2], [0, 0, 1, 0, 0])
    assert line.l1_distance(other) == pytest.approx(1.0)
