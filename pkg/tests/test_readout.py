from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk.cv_model import ModelParams, run_cv_line
from qwalk.decoherence import density_from_state, evolve_line_density
from qwalk.errors import DegenerateOutcome
from qwalk.readout import (
    ProtocolConfig,
    ReadoutCurve,
    circle_readout,
    d_operator,
    discrete_d_operator,
    discrete_m_shift,
    line_readout,
    m_operator,
    measure_coin,
    readout_curve,
    ring_positions,
    with_dephasing,
)
from qwalk.walk_core import CoinVector, LineState, run_line, run_ring

LINE_CURVE = [F(1, 2), F(3, 4), F(1, 2), F(7, 16), F(5, 8), F(21, 32), F(1, 2), F(123, 256), F(79, 128), F(323, 512)]
CIRCLE_REVIVAL = (1 + np.cos(6 * np.sqrt(2))) / 2  # N = 4 and 8 with alpha0 = 3
P48 = ModelParams(fock_dim=48)


def test_line_curve_rationals():
    curve = line_readout(ProtocolConfig(steps=10))
    assert curve.steps == tuple(range(1, 11))
    np.testing.assert_allclose(curve.p_down, [float(v) for v in LINE_CURVE], atol=1e-12)


def test_circle_curve_values():
    curve = circle_readout(ProtocolConfig(steps=8))
    expected = [0.5, 0.5, 0.5, CIRCLE_REVIVAL, 0.5, 0.5, 0.5, CIRCLE_REVIVAL]
    np.testing.assert_allclose(curve.p_down, expected, atol=1e-12)


@pytest.mark.parametrize("protocol", ["line", "circle"])
def test_complete_dephasing_gives_one_half(protocol):
    curve = readout_curve(protocol, ProtocolConfig(steps=10, dephasing=0.5))
    np.testing.assert_allclose(curve.p_down, 0.5, atol=1e-12)


def test_mirror_coin_line_readout_is_flat():
    curve = line_readout(ProtocolConfig(steps=8, coin0="symmetric"))
    np.testing.assert_allclose(curve.p_down, 0.5, atol=1e-12)


def test_cv_line_readout_vacuum():
    # <cos 2p> = exp(-1) in the vacuum
    curve = readout_curve("line", ProtocolConfig(tier="cv", params=P48), [0])
    assert curve.p_down[0] == pytest.approx((1 + np.exp(-1)) / 2, abs=1e-12)


def test_cv_circle_readout_coherent():
    params = ModelParams(fock_dim=64)
    curve = readout_curve("circle", ProtocolConfig(tier="cv", params=params), [0])
    expected = (1 + np.cos(6 * np.sqrt(2)) * np.exp(-1)) / 2
    assert curve.p_down[0] == pytest.approx(expected, abs=1e-10)


def test_cv_line_readout_complete_dephasing():
    cv = readout_curve("line", ProtocolConfig(steps=4, tier="cv", params=P48, dephasing=0.5))
    np.testing.assert_allclose(cv.p_down, 0.5, atol=1e-10)


def test_n5_readout_monotone_in_dephasing():
    vals = [
        readout_curve("line", ProtocolConfig(steps=5, dephasing=p), [5]).p_down[0]
        for p in np.linspace(0, 0.5, 11)
    ]
    dev = np.abs(np.array(vals) - 0.5)
    assert np.all(np.diff(dev) <= 1e-12)
    assert dev[0] > 0.05


def test_conditioned_circle_differs_only_in_sign_rule():
    plain = circle_readout(ProtocolConfig(steps=4))
    cond = circle_readout(ProtocolConfig(steps=4, conditioned=True))
    assert len(cond.p_down) == len(plain.p_down)
    assert all(0 <= v <= 1 for v in cond.p_down)


def test_measure_coin_pure_states():
    state = run_line(3, "symmetric")
    both = measure_coin(state)
    assert both["down"][0] + both["up"][0] == pytest.approx(1.0)
    prob, post = measure_coin(state, "down")
    assert post.norm2 == pytest.approx(1.0)
    assert np.all(post.amps[:, 1] == 0)
    with pytest.raises(DegenerateOutcome):
        measure_coin(run_ring(0, "down"), "up")
    with pytest.raises(ValueError):
        measure_coin(state, "left")


def test_measure_coin_densities():
    rho = evolve_line_density(4, "down", 0.2)
    both = measure_coin(rho)
    assert both["down"][0] + both["up"][0] == pytest.approx(1.0)
    cv = density_from_state(run_cv_line(2, "symmetric", P48))
    prob, post = measure_coin(cv, "up")
    assert post.trace() == pytest.approx(1.0)
    assert post.coin_populations()[0] == pytest.approx(0.0)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([1, -1]))
def test_readout_operators_unitary(sign):
    for op in (m_operator(sign, P48), d_operator(P48, sign)):
        np.testing.assert_allclose(op @ op.conj().T, np.eye(2 * 48), atol=1e-10)
    for u in discrete_d_operator(3.0, sign):
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-14)


def test_m_operators_are_inverses():
    np.testing.assert_allclose(m_operator(1, P48) @ m_operator(-1, P48), np.eye(96), atol=1e-10)
    with pytest.raises(ValueError):
        m_operator(0, P48)
    with pytest.raises(ValueError):
        d_operator(P48, 2)


def test_discrete_m_shift_preserves_trace():
    rho = density_from_state(LineState.initial(CoinVector.down()), size=5).data
    out = discrete_m_shift(rho, 1)
    assert np.real(np.einsum("icic->", out)) == pytest.approx(1.0)


def test_ring_positions():
    np.testing.assert_allclose(ring_positions(3.0), [3 * np.sqrt(2), 0, -3 * np.sqrt(2), 0], atol=1e-12)


def test_sampled_curve_is_reproducible():
    cfg = ProtocolConfig(steps=6, shots=200, seed=7)
    a = line_readout(cfg).p_down
    b = line_readout(cfg).p_down
    assert a == b
    assert all(v * 200 == int(round(v * 200)) for v in a)


def test_config_validation():
    with pytest.raises(ValueError):
        ProtocolConfig(tier="exact")
    with pytest.raises(ValueError):
        ProtocolConfig(dephasing=2.0)
    with pytest.raises(ValueError):
        ProtocolConfig(shots=0)
    with pytest.raises(ValueError):
        ProtocolConfig(alpha0=-1)
    with pytest.raises(ValueError):
        readout_curve("spiral", ProtocolConfig())
    assert with_dephasing(ProtocolConfig(), 0.25).dephasing == 0.25


def test_readout_curve_validation():
    with pytest.raises(ValueError):
        ReadoutCurve([1, 2], [0.5])
    with pytest.raises(ValueError):
        ReadoutCurve([1], [1.5])
