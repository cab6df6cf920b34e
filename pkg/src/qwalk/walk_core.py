"""
Idealized discrete-time random walks on the integer line and on a 4-site ring.

Coin states are stored in the order ``(down, up)``.  The walker steps towards
larger positions when the coin is down and towards smaller positions when it is
up; on the ring site ``k`` sits at angle ``k * pi / 2`` and site 3 is reported
as ``-pi/2``.

With this ordering the Pauli matrices are

    sigma_z = diag(-1, +1)          (sigma_z |up> = +|up>)
    sigma_x = [[0, 1], [1, 0]]
    sigma_y = [[0, i], [-i, 0]]

so that ``exp(i p sigma_z)`` translates the down branch to the right.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from ._validation import NORM_TOL, check_steps

__all__ = [
    "HADAMARD",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "RING_ANGLES",
    "RING_LABELS",
    "CoinVector",
    "LineState",
    "RingState",
    "Distribution",
    "WalkStats",
    "classical_line_distribution",
    "classical_circle_distribution",
    "hadamard",
    "step_line",
    "run_line",
    "step_ring",
    "run_ring",
    "distribution",
    "stats",
    "ring_fidelity",
]

DOWN, UP = 0, 1

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)

RING_SIZE = 4
RING_ANGLES = (0.0, np.pi / 2, np.pi, -np.pi / 2)
RING_LABELS = ("0", "pi/2", "pi", "-pi/2")

for _m in (HADAMARD, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


@dataclass(frozen=True)
class CoinVector:
    """Two complex amplitudes over the internal states (down, up)."""

    a_down: complex
    a_up: complex

    @classmethod
    def down(cls) -> CoinVector:
        return cls(1.0 + 0j, 0j)

    @classmethod
    def up(cls) -> CoinVector:
        return cls(0j, 1.0 + 0j)

    @classmethod
    def symmetric(cls) -> CoinVector:
        """(|down> + i|up>)/sqrt(2): the coin that gives a mean-zero line walk."""
        s = 1.0 / np.sqrt(2.0)
        return cls(s + 0j, 1j * s)

    @classmethod
    def from_array(cls, arr) -> CoinVector:
        arr = np.asarray(arr, dtype=complex).reshape(-1)
        if arr.shape != (2,):
            raise ValueError(f"a coin needs exactly two amplitudes, got {arr.size}")
        return cls(complex(arr[0]), complex(arr[1]))

    @classmethod
    def from_token(cls, token: str | CoinVector) -> CoinVector:
        """Parse ``down``, ``up``, ``symmetric`` or ``"re,im,re,im"``."""
        if isinstance(token, CoinVector):
            return token
        key = token.strip().lower()
        named = {"down": cls.down, "up": cls.up, "symmetric": cls.symmetric}
        if key in named:
            return named[key]()
        parts = key.split(",")
        if len(parts) != 4:
            raise ValueError(
                f"unknown coin {token!r}: expected down, up, symmetric or 're,im,re,im'"
            )
        try:
            re_d, im_d, re_u, im_u = (float(x) for x in parts)
        except ValueError as exc:
            raise ValueError(f"unknown coin {token!r}: {exc}") from None
        return cls(complex(re_d, im_d), complex(re_u, im_u))

    def as_array(self) -> np.ndarray:
        return np.array([self.a_down, self.a_up], dtype=complex)

    @property
    def norm2(self) -> float:
        return abs(self.a_down) ** 2 + abs(self.a_up) ** 2

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def check_normalized(self, tol: float = NORM_TOL) -> CoinVector:
        if abs(self.norm2 - 1.0) > tol:
            raise ValueError(f"coin is not normalized (|a_down|^2 + |a_up|^2 = {self.norm2:.12g})")
        return self


@dataclass(frozen=True)
class LineState:
    """Pure coin-position state of the line walk after ``step_count`` steps.

    ``amps[i, c]`` is the amplitude for position ``i - step_count`` and coin
    ``c`` (0 = down, 1 = up).  The array is stored dense over ``[-N, N]``.
    """

    step_count: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (2 * self.step_count + 1, 2):
            raise ValueError(
                f"amplitude array for N={self.step_count} must have shape "
                f"({2 * self.step_count + 1}, 2), got {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def initial(cls, coin0: CoinVector) -> LineState:
        return cls(0, coin0.as_array()[None, :])

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.step_count, self.step_count + 1)

    def coin_at(self, d: int) -> CoinVector:
        if abs(d) > self.step_count:
            return CoinVector(0j, 0j)
        return CoinVector.from_array(self.amps[d + self.step_count])

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True)
class RingState:
    """Pure coin-position state on the 4-site ring; ``amps[k, c]`` for site ``k``."""

    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (RING_SIZE, 2):
            raise ValueError(f"ring amplitudes must have shape (4, 2), got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def initial(cls, coin0: CoinVector, site: int = 0) -> RingState:
        amps = np.zeros((RING_SIZE, 2), dtype=complex)
        amps[site % RING_SIZE] = coin0.as_array()
        return cls(amps)

    def coin_at(self, k: int) -> CoinVector:
        return CoinVector.from_array(self.amps[k % RING_SIZE])

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True)
class WalkStats:
    mean: float
    stddev: float


@dataclass(frozen=True)
class Distribution:
    """Probability over position labels.

    ``kind`` is ``"line"`` (integer positions) or ``"ring"`` (sites 0..3, see
    :data:`RING_LABELS` for their angles).
    """

    support: tuple
    probabilities: np.ndarray = field(repr=False)
    kind: str = "line"

    def __post_init__(self):
        probs = np.array(self.probabilities, dtype=float)
        if probs.shape != (len(self.support),):
            raise ValueError("support and probabilities must have the same length")
        if np.any(probs < 0):
            raise ValueError("probabilities must be non-negative")
        if self.kind not in ("line", "ring"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probabilities", probs)

    def __getitem__(self, label) -> float:
        if self.kind == "ring" and isinstance(label, str):
            label = RING_LABELS.index(label)
        try:
            return float(self.probabilities[self.support.index(label)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probabilities.tolist()))

    def labels(self) -> list[str]:
        if self.kind == "ring":
            return [RING_LABELS[k] for k in self.support]
        return [str(d) for d in self.support]

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def l1_distance(self, other: Distribution) -> float:
        labels = set(self.support) | set(other.support)
        return float(sum(abs(self[x] - other[x]) for x in labels))


def classical_line_distribution(N: int) -> Distribution:
    """Binomial distribution of a fair-coin walk after ``N`` steps.

    All positions in ``[-N, N]`` are listed; those with the wrong parity carry 0.
    """
    N = check_steps(N)
    support = list(range(-N, N + 1))
    probs = np.zeros(len(support))
    for k in range(N + 1):
        probs[2 * k] = comb(N, k) / 2.0**N
    return Distribution(support, probs, "line")


def classical_circle_distribution(N: int) -> Distribution:
    N = check_steps(N)
    if N == 0:
        probs = [1.0, 0.0, 0.0, 0.0]
    elif N % 2:
        probs = [0.0, 0.5, 0.0, 0.5]
    else:
        probs = [0.5, 0.0, 0.5, 0.0]
    return Distribution(range(RING_SIZE), probs, "ring")


def hadamard(coin: CoinVector) -> CoinVector:
    return CoinVector.from_array(HADAMARD @ coin.as_array())


def _shift_line(amps: np.ndarray) -> np.ndarray:
    """Down amplitudes move +1, up amplitudes move -1; grows the grid by one site each side."""
    out = np.zeros((amps.shape[0] + 2, 2), dtype=complex)
    out[2:, DOWN] = amps[:, DOWN]
    out[:-2, UP] = amps[:, UP]
    return out


def step_line(state: LineState) -> LineState:
    """One step of the Hadamard walk: coin flip at every site, then the conditional shift."""
    flipped = state.amps @ HADAMARD.T
    return LineState(state.step_count + 1, _shift_line(flipped))


def run_line(N: int, coin0: CoinVector | str = "symmetric") -> LineState:
    """Start at position 0 with ``coin0`` and take ``N`` walk steps."""
    N = check_steps(N)
    coin0 = CoinVector.from_token(coin0).check_normalized()
    state = LineState.initial(coin0)
    for _ in range(N):
        state = step_line(state)
    return state


def _shift_ring(amps: np.ndarray) -> np.ndarray:
    out = np.empty_like(amps)
    out[:, DOWN] = np.roll(amps[:, DOWN], 1)
    out[:, UP] = np.roll(amps[:, UP], -1)
    return out


def step_ring(state: RingState) -> RingState:
    return RingState(_shift_ring(state.amps @ HADAMARD.T))


def run_ring(N: int, coin0: CoinVector | str = "down") -> RingState:
    N = check_steps(N)
    coin0 = CoinVector.from_token(coin0).check_normalized()
    state = RingState.initial(coin0)
    for _ in range(N):
        state = step_ring(state)
    return state


def distribution(state: LineState | RingState) -> Distribution:
    """Born-rule position distribution (coin traced out)."""
    probs = np.sum(np.abs(state.amps) ** 2, axis=1)
    if isinstance(state, LineState):
        return Distribution(state.positions.tolist(), probs, "line")
    return Distribution(range(RING_SIZE), probs, "ring")


def stats(dist: Distribution) -> WalkStats:
    """Mean and standard deviation (about the mean) of a line distribution."""
    if dist.kind != "line":
        raise ValueError("stats are defined for line distributions only")
    d = np.asarray(dist.support, dtype=float)
    p = dist.probabilities
    mean = float(np.dot(p, d))
    var = float(np.dot(p, (d - mean) ** 2))
    return WalkStats(mean, float(np.sqrt(max(var, 0.0))))


def ring_fidelity(a: RingState, b: RingState) -> float:
    """|<a|b>|^2, i.e. overlap insensitive to a global phase."""
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def sigma_slope(coin0: CoinVector | str = "symmetric", steps: Sequence[int] = range(20, 41)) -> float:
    """Least-squares slope of the quantum-walk standard deviation against ``N``."""
    steps = [check_steps(n) for n in steps]
    sigmas = [stats(distribution(run_line(n, coin0))).stddev for n in steps]
    slope, _ = np.polyfit(steps, sigmas, 1)
    return float(slope)
