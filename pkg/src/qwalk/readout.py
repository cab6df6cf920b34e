"""
Coin-based readout of the walks.

After the walk the coin is measured in the z basis, which decouples it from
the motion.  For the line, ``M+ = exp(+i p sigma_y)`` is applied after an up
result and ``M- = exp(-i p sigma_y)`` after a down result; for the circle
``D = exp(i x sigma_y)`` is applied to both branches.  The coin is then
measured again and the probability of *down* is reported.  Both first-outcome
branches are enumerated exactly, so curves carry no sampling noise unless
``shots`` is set.

In the discrete tier ``M+-`` become position shifts by ``-+lambda`` in the
sigma_y eigenbasis (``lambda = +-1``), and ``x`` on the ring is the diagonal
operator with the classical positions ``sqrt(2) alpha0 cos(k pi/2)`` of the
phase-space sites.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from ._validation import check_positive_float, check_steps
from .cv_model import (
    HybridFockState,
    ModelParams,
    _check_tail,
    _eig_quadrature,
    circle_step,
    coherent_state,
    four_pulse_step,
    hybrid_state,
    site_amplitude,
)
from .decoherence import (
    DephasingRate,
    HybridDensity,
    _coin_conjugate,
    _rate,
    _walk_step,
    density_from_state,
    dephase_coin,
)
from .errors import DegenerateOutcome
from .walk_core import RING_SIZE, SIGMA_Y, CoinVector, LineState, RingState

__all__ = [
    "ProtocolConfig",
    "ReadoutCurve",
    "measure_coin",
    "m_operator",
    "d_operator",
    "line_readout",
    "circle_readout",
    "readout_curve",
    "readout_point",
]

DEGENERATE_TOL = 1e-14
DOWN, UP = 0, 1
OUTCOMES = {"down": DOWN, "up": UP}

_Y_VALS, _Y_VECS = np.linalg.eigh(SIGMA_Y)  # eigenvalues (-1, +1)


@dataclass(frozen=True)
class ProtocolConfig:
    """Settings shared by both readout protocols.

    ``steps`` is the walk length (one step = one pulse-sequence application).
    The coin starts down, as the ion does after laser cooling; with the
    mean-zero coin ``(|down> + i|up>)/sqrt(2)`` the two coin branches are mirror
    images and the line readout is exactly 1/2 at every step.
    ``shots``/``seed`` switch on binomial sampling of each point.
    """

    steps: int = 10
    dephasing: float = 0.0
    tier: str = "discrete"
    params: ModelParams = field(default_factory=ModelParams)
    coin0: CoinVector | str = "down"
    alpha0: float = 3.0
    conditioned: bool = False
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", check_steps(self.steps))
        object.__setattr__(self, "dephasing", _rate(self.dephasing))
        if self.tier not in ("discrete", "cv"):
            raise ValueError(f"tier must be 'discrete' or 'cv', got {self.tier!r}")
        check_positive_float(self.alpha0, "alpha0")
        self.coin()
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")

    def coin(self) -> CoinVector:
        return CoinVector.from_token(self.coin0).check_normalized()


@dataclass(frozen=True)
class ReadoutCurve:
    steps: tuple
    p_down: tuple
    protocol: str = "line"
    dephasing: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(int(n) for n in self.steps))
        object.__setattr__(self, "p_down", tuple(float(p) for p in self.p_down))
        if len(self.steps) != len(self.p_down):
            raise ValueError("steps and p_down must have the same length")
        if any(not -1e-12 <= p <= 1 + 1e-12 for p in self.p_down):
            raise ValueError("p_down values must lie in [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p_down)


# ---------------------------------------------------------------------------
# measurement


def _project(x, c: int):
    """Unnormalized projection of ``x`` onto coin outcome ``c``; returns (prob, projected)."""
    if isinstance(x, (LineState, RingState)):
        amps = np.zeros_like(x.amps)
        amps[:, c] = x.amps[:, c]
        return float(np.sum(np.abs(amps) ** 2)), amps
    if isinstance(x, HybridFockState):
        b = np.zeros_like(x.branches)
        b[c] = x.branches[c]
        return float(np.sum(np.abs(b) ** 2)), b
    if isinstance(x, HybridDensity):
        if x.kind == "cv":
            D = x.params.fock_dim
            data = np.zeros_like(x.data)
            sl = slice(c * D, (c + 1) * D)
            data[sl, sl] = x.data[sl, sl]
        else:
            data = np.zeros_like(x.data)
            data[:, c, :, c] = x.data[:, c, :, c]
        prob = float(np.real(np.trace(data if x.kind == "cv" else data.reshape(x.matrix.shape))))
        return prob, data
    raise TypeError(f"cannot measure the coin of {type(x).__name__}")


def _rebuild(x, payload, prob: float):
    if isinstance(x, LineState):
        return LineState(x.step_count, payload / np.sqrt(prob))
    if isinstance(x, RingState):
        return RingState(payload / np.sqrt(prob))
    if isinstance(x, HybridFockState):
        return HybridFockState(payload.ravel() / np.sqrt(prob), x.params)
    return HybridDensity(payload / prob, x.kind, x.offset, x.params)


def measure_coin(x, outcome: str | None = None):
    """Projective z measurement of the coin.

    With ``outcome`` ("down" or "up") returns ``(probability, post_state)``;
    without it returns ``{"down": (...), "up": (...)}``.  Raises
    :class:`DegenerateOutcome` when a requested outcome has probability below
    ``1e-14``.
    """
    if outcome is None:
        return {name: measure_coin(x, name) for name in OUTCOMES}
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be 'down' or 'up', got {outcome!r}")
    prob, payload = _project(x, OUTCOMES[outcome])
    if prob < DEGENERATE_TOL:
        raise DegenerateOutcome(f"coin outcome {outcome!r} has probability {prob:.3g}")
    return prob, _rebuild(x, payload, prob)


# ---------------------------------------------------------------------------
# readout operators


def _sigma_y_conditioned(params: ModelParams, which: str, sign: int) -> np.ndarray:
    """exp(i sign Q sigma_y) = sum_lambda P_lambda (x) exp(i sign lambda Q)."""
    D = params.fock_dim
    w, v = _eig_quadrature(D, which)
    out = np.zeros((2 * D, 2 * D), dtype=complex)
    for lam, vec in zip(_Y_VALS, _Y_VECS.T):
        proj = np.outer(vec, vec.conj())
        fock = (v * np.exp(1j * sign * lam * w)) @ v.conj().T
        out += np.kron(proj, fock)
    return out


@lru_cache(maxsize=16)
def _m_operator(params: ModelParams, sign: int) -> np.ndarray:
    u = _sigma_y_conditioned(params, "p", sign)
    u.setflags(write=False)
    return u


def m_operator(sign: int, params: ModelParams) -> np.ndarray:
    """M+- = exp(+-i p sigma_y) on the truncated hybrid space."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return _m_operator(params, sign)


@lru_cache(maxsize=16)
def _d_operator(params: ModelParams, sign: int) -> np.ndarray:
    u = _sigma_y_conditioned(params, "x", sign)
    u.setflags(write=False)
    return u


def d_operator(params: ModelParams, sign: int = 1) -> np.ndarray:
    """D = exp(i x sigma_y) (``sign=-1`` gives its inverse)."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return _d_operator(params, sign)


def discrete_m_shift(data: np.ndarray, sign: int) -> np.ndarray:
    """Apply M+- to a 4-index line density: shift by ``-sign * lambda`` in the sigma_y eigenbasis.

    The grid must have an empty site at each end.
    """
    eig = _coin_conjugate(data, _Y_VECS.conj().T)
    out = np.zeros_like(eig)
    moves = [-sign * int(round(lam)) for lam in _Y_VALS]
    for a in range(2):
        for b in range(2):
            block = np.roll(np.roll(eig[:, a, :, b], moves[a], axis=0), moves[b], axis=1)
            out[:, a, :, b] = block
    return _coin_conjugate(out, _Y_VECS)


def ring_positions(alpha0: float) -> np.ndarray:
    return np.array([np.sqrt(2.0) * site_amplitude(alpha0, k).real for k in range(RING_SIZE)])


def discrete_d_operator(alpha0: float, sign: int = 1) -> np.ndarray:
    """Per-site coin unitaries exp(i sign x_k sigma_y); shape (4, 2, 2)."""
    xk = ring_positions(alpha0)
    return np.array(
        [(_Y_VECS * np.exp(1j * sign * x * _Y_VALS)) @ _Y_VECS.conj().T for x in xk]
    )


def _apply_site_unitaries(data: np.ndarray, us: np.ndarray) -> np.ndarray:
    return np.einsum("iab,ibjd,jcd->iajc", us, data, us.conj(), optimize=True)


# ---------------------------------------------------------------------------
# protocols


def _p_down(rho: HybridDensity) -> float:
    return float(rho.coin_populations()[DOWN])


def readout_point(rho: HybridDensity, protocol: str, config: ProtocolConfig) -> float:
    """P(down) after the decouple / operate / measure sequence, summed over both branches."""
    total = 0.0
    for outcome, sign in (("down", -1), ("up", 1)):
        try:
            prob, post = measure_coin(rho, outcome)
        except DegenerateOutcome:
            continue
        if protocol == "circle" and not config.conditioned:
            sign = 1
        if rho.kind == "cv":
            params = rho.params
            op = m_operator(sign, params) if protocol == "line" else d_operator(params, sign)
            data = op @ post.data @ op.conj().T
            _check_tail(data, params, "readout operator")
            after = HybridDensity(data, "cv", params=params)
        elif protocol == "line":
            after = HybridDensity(discrete_m_shift(post.data, sign), "line", post.offset)
        else:
            us = discrete_d_operator(config.alpha0, sign)
            after = HybridDensity(_apply_site_unitaries(post.data, us), "ring")
        total += prob * _p_down(after)
    return total


def _densities(protocol: str, config: ProtocolConfig, n_max: int) -> Iterator[HybridDensity]:
    """Yield the walk density after 0, 1, ..., n_max dephased steps."""
    p = config.dephasing
    coin0 = config.coin()
    if config.tier == "discrete":
        if protocol == "line":
            rho = density_from_state(LineState.initial(coin0), size=2 * (n_max + 1) + 1)
        else:
            rho = density_from_state(RingState.initial(coin0))
        yield rho
        for _ in range(n_max):
            rho = _walk_step(rho, p)
            yield rho
        return
    params = config.params
    if protocol == "line":
        fock = np.zeros(params.fock_dim, dtype=complex)
        fock[0] = 1.0
        u = four_pulse_step(params)
    else:
        fock = coherent_state(config.alpha0, params)
        u = circle_step(params)
    rho = density_from_state(hybrid_state(fock, coin0, params))
    yield rho
    for _ in range(n_max):
        data = u @ rho.data @ u.conj().T
        _check_tail(data, params, "walk evolution")
        rho = dephase_coin(HybridDensity(data, "cv", params=params), p)
        yield rho


def readout_curve(
    protocol: str, config: ProtocolConfig, steps: Sequence[int] | None = None
) -> ReadoutCurve:
    """Readout probabilities for each walk length in ``steps`` (default ``1 .. config.steps``)."""
    if protocol not in ("line", "circle"):
        raise ValueError(f"protocol must be 'line' or 'circle', got {protocol!r}")
    if steps is None:
        steps = range(1, config.steps + 1)
    steps = sorted({check_steps(n) for n in steps})
    wanted = set(steps)
    values = {}
    if steps:
        for n, rho in enumerate(_densities(protocol, config, max(steps))):
            if n in wanted:
                values[n] = readout_point(rho, protocol, config)
    p_down = [min(max(values[n], 0.0), 1.0) for n in steps]
    if config.shots is not None:
        rng = np.random.default_rng(config.seed)
        p_down = (rng.binomial(config.shots, p_down) / config.shots).tolist()
    return ReadoutCurve(steps, p_down, protocol, config.dephasing)


def line_readout(config: ProtocolConfig) -> ReadoutCurve:
    return readout_curve("line", config)


def circle_readout(config: ProtocolConfig) -> ReadoutCurve:
    return readout_curve("circle", config)


def with_dephasing(config: ProtocolConfig, rate) -> ProtocolConfig:
    p = rate.p if isinstance(rate, DephasingRate) else rate
    return replace(config, dephasing=p)
