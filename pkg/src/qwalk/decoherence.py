"""
Coin dephasing and density-matrix walks.

Each step applies the walk unitary and then the phase-flip channel
``rho -> (1 - p) rho + p Z rho Z`` with ``Z = sigma_z (x) 1``.  Coin coherences
shrink by ``1 - 2p`` per step, so ``p = 1/2`` is complete dephasing and turns the
quantum walk into the classical one.

Discrete-tier densities are stored as 4-index arrays ``rho[i, c, j, c']``
(position index, coin, position index, coin), matching ``LineState.amps``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._validation import check_probability, check_steps
from .cv_model import HybridFockState, ModelParams, _check_tail, four_pulse_step, hybrid_state
from .errors import FitError
from .walk_core import (
    HADAMARD,
    RING_SIZE,
    CoinVector,
    Distribution,
    LineState,
    RingState,
)

__all__ = [
    "DephasingRate",
    "HybridDensity",
    "density_from_state",
    "dephase_coin",
    "evolve_line_density",
    "evolve_ring_density",
    "run_line_decohered",
    "run_ring_decohered",
    "evolve_cv_line_density",
    "estimate_dephasing",
    "MAX_DEPHASING",
]

MAX_DEPHASING = 0.5


@dataclass(frozen=True)
class DephasingRate:
    """Probability per step of a coin phase flip."""

    p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p", check_probability(self.p, "dephasing"))

    def __float__(self) -> float:
        return self.p


def _rate(rate) -> float:
    if isinstance(rate, DephasingRate):
        return rate.p
    return check_probability(rate, "dephasing")


@dataclass(frozen=True)
class HybridDensity:
    """Coin-position density operator.

    ``kind`` is ``"line"`` or ``"ring"`` (4-index array, positions
    ``offset .. offset + L - 1`` for the line) or ``"cv"`` (``2D x 2D``
    coin-major matrix, see :mod:`qwalk.cv_model`).
    """

    data: np.ndarray = field(repr=False)
    kind: str = "line"
    offset: int = 0
    params: ModelParams | None = None

    def __post_init__(self):
        if self.kind not in ("line", "ring", "cv"):
            raise ValueError(f"unknown density kind {self.kind!r}")
        data = np.array(self.data, dtype=complex)
        if self.kind == "cv":
            if self.params is None:
                raise ValueError("cv densities need ModelParams")
            D = self.params.fock_dim
            if data.shape != (2 * D, 2 * D):
                raise ValueError(f"cv density must be {2 * D}x{2 * D}, got {data.shape}")
        elif data.ndim != 4 or data.shape[1] != 2 or data.shape[:2] != data.shape[2:]:
            raise ValueError(f"discrete density must have shape (L, 2, L, 2), got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def matrix(self) -> np.ndarray:
        if self.kind == "cv":
            return self.data
        n = self.data.shape[0] * 2
        return self.data.reshape(n, n)

    @property
    def positions(self) -> np.ndarray:
        if self.kind == "cv":
            raise AttributeError("cv densities have no discrete positions")
        return np.arange(self.data.shape[0]) + self.offset

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def coin_populations(self) -> np.ndarray:
        """(P(down), P(up))."""
        if self.kind == "cv":
            D = self.params.fock_dim
            diag = np.real(np.diag(self.data)).reshape(2, D)
            return diag.sum(axis=1)
        return np.real(np.einsum("icic->c", self.data))

    def distribution(self) -> Distribution:
        if self.kind == "cv":
            raise ValueError("use cv_model.position_distribution for cv densities")
        probs = np.clip(np.real(np.einsum("icic->i", self.data)), 0.0, None)
        if self.kind == "ring":
            return Distribution(range(RING_SIZE), probs, "ring")
        return Distribution(self.positions.tolist(), probs, "line")


def density_from_state(state, size: int | None = None) -> HybridDensity:
    """Pure-state density; line states may be embedded in a wider grid of ``size`` sites."""
    if isinstance(state, HybridFockState):
        return HybridDensity(state.density(), "cv", params=state.params)
    if isinstance(state, RingState):
        a = state.amps
        return HybridDensity(np.einsum("ic,jd->icjd", a, a.conj()), "ring")
    if isinstance(state, LineState):
        a = state.amps
        offset = -state.step_count
        if size is not None and size > a.shape[0]:
            extra = size - a.shape[0]
            if extra % 2:
                raise ValueError("grid padding must be symmetric")
            a = np.pad(a, ((extra // 2, extra // 2), (0, 0)))
            offset -= extra // 2
        return HybridDensity(np.einsum("ic,jd->icjd", a, a.conj()), "line", offset)
    raise TypeError(f"cannot build a density from {type(state).__name__}")


def _z_mask(kind: str, params: ModelParams | None) -> np.ndarray:
    if kind == "cv":
        D = params.fock_dim
        z = np.concatenate([-np.ones(D), np.ones(D)])
        return np.outer(z, z)
    z = np.array([-1.0, 1.0])
    return np.outer(z, z)[None, :, None, :]


def dephase_coin(rho: HybridDensity, rate) -> HybridDensity:
    """Phase-flip channel ``(1 - p) rho + p Z rho Z`` on the coin."""
    p = _rate(rate)
    if p == 0.0:
        return rho
    zz = _z_mask(rho.kind, rho.params)
    # Z rho Z flips the sign of coin-off-diagonal blocks only
    data = rho.data * ((1.0 - p) + p * zz)
    return HybridDensity(data, rho.kind, rho.offset, rho.params)


def _coin_conjugate(data: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.einsum("ab,ibjd,cd->iajc", u, data, u.conj(), optimize=True)


def _shift(data: np.ndarray, periodic: bool) -> np.ndarray:
    """Down moves +1, up moves -1 on both ket and bra indices."""
    out = np.zeros_like(data)
    moves = (1, -1)
    for c in range(2):
        for d in range(2):
            block = data[:, c, :, d]
            block = np.roll(block, moves[c], axis=0)
            block = np.roll(block, moves[d], axis=1)
            if not periodic:
                # the grid is sized so nothing wraps; make that a hard guarantee
                if moves[c] > 0:
                    block[0, :] = 0
                else:
                    block[-1, :] = 0
                if moves[d] > 0:
                    block[:, 0] = 0
                else:
                    block[:, -1] = 0
            out[:, c, :, d] = block
    return out


def _walk_step(rho: HybridDensity, rate: float) -> HybridDensity:
    data = _shift(_coin_conjugate(rho.data, HADAMARD), periodic=rho.kind == "ring")
    return dephase_coin(HybridDensity(data, rho.kind, rho.offset), rate)


def evolve_line_density(
    N: int, coin0: CoinVector | str, rate, pad: int = 0
) -> HybridDensity:
    """Density after ``N`` dephased line steps on the grid ``[-(N + pad), N + pad]``."""
    N = check_steps(N)
    p = _rate(rate)
    coin0 = CoinVector.from_token(coin0).check_normalized()
    rho = density_from_state(LineState.initial(coin0), size=2 * (N + pad) + 1)
    for _ in range(N):
        rho = _walk_step(rho, p)
    return rho


def evolve_ring_density(N: int, coin0: CoinVector | str, rate) -> HybridDensity:
    N = check_steps(N)
    p = _rate(rate)
    coin0 = CoinVector.from_token(coin0).check_normalized()
    rho = density_from_state(RingState.initial(coin0))
    for _ in range(N):
        rho = _walk_step(rho, p)
    return rho


def run_line_decohered(N: int, coin0: CoinVector | str = "symmetric", rate=0.0) -> Distribution:
    """Position distribution of the line walk with per-step coin dephasing."""
    return evolve_line_density(N, coin0, rate).distribution()


def run_ring_decohered(N: int, coin0: CoinVector | str = "down", rate=0.0) -> Distribution:
    return evolve_ring_density(N, coin0, rate).distribution()


def evolve_cv_line_density(
    N: int, coin0: CoinVector | str, rate, params: ModelParams
) -> HybridDensity:
    """Oscillator-tier line walk with the same channel applied after every pulse sequence."""
    N = check_steps(N)
    p = _rate(rate)
    coin0 = CoinVector.from_token(coin0).check_normalized()
    vac = np.zeros(params.fock_dim, dtype=complex)
    vac[0] = 1.0
    rho = density_from_state(hybrid_state(vac, coin0, params))
    u = four_pulse_step(params)
    for _ in range(N):
        rho = HybridDensity(u @ rho.data @ u.conj().T, "cv", params=params)
        _check_tail(rho.data, params, "dephased evolution")
        rho = dephase_coin(rho, p)
    return rho


def estimate_dephasing(
    observed: Sequence[float],
    protocol: str = "line",
    steps: Sequence[int] | None = None,
    coin0: CoinVector | str = "down",
    alpha0: float = 3.0,
    grid_step: float = 0.01,
    xtol: float = 1e-4,
) -> DephasingRate:
    """Least-squares dephasing rate reproducing an observed readout curve.

    ``observed[i]`` is P(down) after ``steps[i]`` walk steps (default
    ``1 .. len(observed)``).  The search scans ``p`` in ``[0, 1/2]`` on a grid
    and then refines the best cell with a bounded scalar minimization.
    """
    from .readout import ProtocolConfig, readout_curve

    observed = np.asarray(observed, dtype=float)
    if observed.ndim != 1 or observed.size < 3:
        raise FitError(f"need at least 3 curve samples, got {observed.size}")
    if not np.all(np.isfinite(observed)):
        raise FitError("observed curve contains non-finite values")
    if steps is None:
        steps = list(range(1, observed.size + 1))
    steps = [check_steps(n) for n in steps]
    if len(steps) != observed.size:
        raise FitError("steps and observed values differ in length")
    if protocol not in ("line", "circle"):
        raise ValueError(f"protocol must be 'line' or 'circle', got {protocol!r}")

    def loss(p: float) -> float:
        cfg = ProtocolConfig(steps=max(steps), dephasing=float(p), coin0=coin0, alpha0=alpha0)
        curve = readout_curve(protocol, cfg, steps)
        lookup = dict(zip(curve.steps, curve.p_down))
        model = np.array([lookup[n] for n in steps])
        return float(np.sum((model - observed) ** 2))

    grid = np.linspace(0.0, MAX_DEPHASING, int(round(MAX_DEPHASING / grid_step)) + 1)
    losses = np.array([loss(p) for p in grid])
    i = int(np.argmin(losses))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    best = float(res.x) if res.fun <= losses[i] else float(grid[i])
    return DephasingRate(min(max(best, 0.0), MAX_DEPHASING))
