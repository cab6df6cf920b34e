"""
Continuous-variable (ion-trap) model of the walks.

The walker is a harmonic oscillator truncated to ``fock_dim`` number states and
the coin is the internal qubit.  Units are dimensionless (hbar = m = omega = 1)
with ``x = (a + a^dag)/sqrt(2)`` and ``p = i(a^dag - a)/sqrt(2)``, so a coherent
state ``|alpha>`` is a Gaussian centred at ``(sqrt(2) Re alpha, sqrt(2) Im alpha)``.

Hybrid vectors are laid out coin-major: index ``c * fock_dim + n`` with
``c = 0`` for down and ``c = 1`` for up.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import lgamma

import numpy as np
import scipy.linalg

from ._validation import check_positive_float, check_steps
from .errors import CompilationError, TruncationError
from .walk_core import (
    HADAMARD,
    RING_SIZE,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    CoinVector,
    Distribution,
    LineState,
    RingState,
)

__all__ = [
    "ModelParams",
    "HybridFockState",
    "ladder_ops",
    "quad_ops",
    "coherent_state",
    "hybrid_state",
    "tail_mass",
    "conditional_displacement",
    "up_displacement",
    "walk_unitary",
    "four_pulse_step",
    "conditional_rotation",
    "circle_step",
    "coin_operator",
    "apply",
    "run_cv_line",
    "run_cv_circle",
    "hermite_functions",
    "position_density",
    "position_distribution",
    "circle_site_distribution",
    "phase_sector_distribution",
    "line_state_from_walk",
    "ring_state_from_walk",
    "operator_distance",
    "fidelity",
]

# pi/2-pulse about -y and pi-pulse about x; R_X_PI @ HALF_PI_PULSE = -i * HADAMARD
HALF_PI_PULSE = scipy.linalg.expm(1j * np.pi / 4 * SIGMA_Y)
PI_PULSE = scipy.linalg.expm(-1j * np.pi / 2 * SIGMA_X)


@dataclass(frozen=True)
class ModelParams:
    """Truncation and scale settings for the oscillator model."""

    fock_dim: int = 128
    tail_tol: float = 1e-8
    step_displacement: float = 1.0

    def __post_init__(self):
        if isinstance(self.fock_dim, bool) or int(self.fock_dim) != self.fock_dim:
            raise TypeError(f"fock_dim must be an integer, got {self.fock_dim!r}")
        if self.fock_dim < 2:
            raise ValueError(f"fock_dim must be >= 2, got {self.fock_dim}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")
        check_positive_float(self.step_displacement, "step_displacement")
        object.__setattr__(self, "fock_dim", int(self.fock_dim))

    @property
    def tail_start(self) -> int:
        """First Fock level of the top 10% used for the truncation check."""
        return self.fock_dim - max(1, int(round(0.1 * self.fock_dim)))

    @property
    def low_block(self) -> int:
        """Number of Fock levels in the low 80% block used for operator comparisons."""
        return int(0.8 * self.fock_dim)


@dataclass(frozen=True)
class HybridFockState:
    """Pure qubit-oscillator state; ``vec`` has length ``2 * fock_dim``."""

    vec: np.ndarray = field(repr=False)
    params: ModelParams = ModelParams()

    def __post_init__(self):
        vec = np.array(self.vec, dtype=complex).reshape(-1)
        if vec.shape != (2 * self.params.fock_dim,):
            raise ValueError(
                f"hybrid vector must have length {2 * self.params.fock_dim}, got {vec.size}"
            )
        vec.setflags(write=False)
        object.__setattr__(self, "vec", vec)

    @property
    def branch_down(self) -> np.ndarray:
        return self.vec[: self.params.fock_dim]

    @property
    def branch_up(self) -> np.ndarray:
        return self.vec[self.params.fock_dim :]

    @property
    def branches(self) -> np.ndarray:
        return self.vec.reshape(2, self.params.fock_dim)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.vec, self.vec).real)

    def density(self) -> np.ndarray:
        return np.outer(self.vec, self.vec.conj())


# ---------------------------------------------------------------------------
# operators


@lru_cache(maxsize=32)
def _ladder(D: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, D, dtype=float)), 1).astype(complex)
    adag = a.conj().T.copy()
    a.setflags(write=False)
    adag.setflags(write=False)
    return a, adag


def ladder_ops(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation and creation matrices."""
    return _ladder(params.fock_dim)


@lru_cache(maxsize=32)
def _quads(D: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, adag = _ladder(D)
    x = (a + adag) / np.sqrt(2.0)
    p = 1j * (adag - a) / np.sqrt(2.0)
    n = np.diag(np.arange(D, dtype=float)).astype(complex)
    for m in (x, p, n):
        m.setflags(write=False)
    return x, p, n


def quad_ops(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Position, momentum and number operators on the truncated space."""
    return _quads(params.fock_dim)


@lru_cache(maxsize=64)
def _eig_quadrature(D: int, which: str) -> tuple[np.ndarray, np.ndarray]:
    x, p, _ = _quads(D)
    w, v = np.linalg.eigh(x if which == "x" else p)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def _quadrature_exp(D: int, which: str, t: float) -> np.ndarray:
    """exp(i t Q) for Q = x or p, via the spectral decomposition (exactly unitary)."""
    w, v = _eig_quadrature(D, which)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def tail_mass(state, params: ModelParams) -> float:
    """Probability in the top 10% of Fock levels (summed over coin branches)."""
    D = params.fock_dim
    if isinstance(state, HybridFockState):
        arr = state.branches
    else:
        arr = np.asarray(state)
    if arr.ndim == 2 and arr.shape == (2 * D, 2 * D):
        diag = np.real(np.diag(arr)).reshape(2, D)
        return float(diag[:, params.tail_start :].sum())
    arr = arr.reshape(-1, D)
    return float(np.sum(np.abs(arr[:, params.tail_start :]) ** 2))


def _check_tail(state, params: ModelParams, what: str) -> None:
    mass = tail_mass(state, params)
    if mass > params.tail_tol:
        raise TruncationError(
            f"{what}: {mass:.3g} probability in the top Fock levels exceeds "
            f"tail_tol={params.tail_tol:g}; increase fock_dim (currently {params.fock_dim})"
        )


def coherent_state(alpha: complex, params: ModelParams) -> np.ndarray:
    """Fock amplitudes of ``|alpha>``.

    Roughly ``|alpha|^2 + 6|alpha| + 10 <= fock_dim`` is needed; the actual
    test is the probability the untruncated state puts at or above the top 10%
    of levels, which must not exceed ``params.tail_tol``.
    """
    alpha = complex(alpha)
    D = params.fock_dim
    n = np.arange(D)
    r2 = abs(alpha) ** 2
    if alpha == 0:
        amps = np.zeros(D, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mag = -r2 / 2 + n * np.log(abs(alpha)) - np.array([0.5 * lgamma(k + 1) for k in n])
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    kept = float(np.sum(np.abs(amps) ** 2))
    tail = float(np.sum(np.abs(amps[params.tail_start :]) ** 2)) + max(0.0, 1.0 - kept)
    if tail > params.tail_tol:
        raise TruncationError(
            f"coherent state alpha={alpha:.4g} has tail mass {tail:.3g} > tail_tol="
            f"{params.tail_tol:g}; increase fock_dim (currently {D})"
        )
    return amps / np.sqrt(kept)


def hybrid_state(fock, coin: CoinVector | str, params: ModelParams) -> HybridFockState:
    """Product state ``|fock> (x) |coin>``."""
    coin = CoinVector.from_token(coin)
    fock = np.asarray(fock, dtype=complex)
    return HybridFockState(np.kron(coin.as_array(), fock), params)


def coin_operator(u2, params: ModelParams) -> np.ndarray:
    """Lift a 2x2 coin unitary to the hybrid space."""
    return np.kron(np.asarray(u2, dtype=complex), np.eye(params.fock_dim))


@lru_cache(maxsize=32)
def _conditional_displacement(params: ModelParams, s: float) -> np.ndarray:
    D = params.fock_dim
    u = np.zeros((2 * D, 2 * D), dtype=complex)
    # sigma_z = -1 on down, +1 on up
    u[:D, :D] = _quadrature_exp(D, "p", -s)
    u[D:, D:] = _quadrature_exp(D, "p", s)
    u.setflags(write=False)
    return u


def conditional_displacement(params: ModelParams, s: float | None = None) -> np.ndarray:
    """exp(i s p sigma_z): translates the down branch by +s and the up branch by -s in x."""
    s = params.step_displacement if s is None else float(s)
    return _conditional_displacement(params, s)


@lru_cache(maxsize=32)
def _up_displacement(params: ModelParams, s: float) -> np.ndarray:
    D = params.fock_dim
    u = np.eye(2 * D, dtype=complex)
    u[D:, D:] = _quadrature_exp(D, "p", -s)
    u.setflags(write=False)
    return u


def up_displacement(params: ModelParams, s: float) -> np.ndarray:
    """Displacement beam correlated with |up>: translate the up branch by ``s`` in x."""
    return _up_displacement(params, float(s))


@lru_cache(maxsize=16)
def walk_unitary(params: ModelParams) -> np.ndarray:
    """exp(i s p sigma_z) H computed directly from the generator with scipy's expm."""
    _, p, _ = _quads(params.fock_dim)
    gen = 1j * params.step_displacement * np.kron(SIGMA_Z, p)
    u = scipy.linalg.expm(gen) @ coin_operator(HADAMARD, params)
    u.setflags(write=False)
    return u


def operator_distance(a: np.ndarray, b: np.ndarray, params: ModelParams | None = None) -> float:
    """Spectral-norm distance ``min_phi ||a - e^{i phi} b||`` on the low Fock block.

    The phase is fixed by the trace overlap, which is optimal whenever ``a`` and
    ``b`` agree up to a phase (the case being certified).
    """
    if params is not None:
        D, k = params.fock_dim, params.low_block
        idx = np.concatenate([np.arange(k), D + np.arange(k)])
        a = a[np.ix_(idx, idx)]
        b = b[np.ix_(idx, idx)]
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b, 2))


@lru_cache(maxsize=16)
def four_pulse_step(params: ModelParams) -> np.ndarray:
    """Compile one walk step from four pulses and certify it against ``walk_unitary``.

    1. pi/2 pulse exp(i pi sigma_y / 4) on the coin,
    2. displacement of the up branch by +s,
    3. pi pulse exp(-i pi sigma_x / 2) exchanging down and up,
    4. displacement of the up branch by -s (same beam, opposite phase).

    Pulses 2-4 give ``-i X`` times a conditional displacement, and ``X`` times
    the pi/2 pulse is the Hadamard, so the product is ``-i exp(i s p sigma_z) H``.
    Repeating pulse 2 with the same sign would only shift both branches together.
    """
    s = params.step_displacement
    composite = (
        up_displacement(params, -s)
        @ coin_operator(PI_PULSE, params)
        @ up_displacement(params, s)
        @ coin_operator(HALF_PI_PULSE, params)
    )
    dist = operator_distance(composite, walk_unitary(params), params)
    if dist > 1e-8:
        raise CompilationError(f"four-pulse composite differs from the walk unitary by {dist:.3g}")
    composite.setflags(write=False)
    return composite


@lru_cache(maxsize=16)
def conditional_rotation(params: ModelParams) -> np.ndarray:
    """exp(i pi n sigma_z / 2): rotates the up branch by +pi/2 and the down branch by -pi/2."""
    D = params.fock_dim
    n = np.arange(D)
    phases = np.concatenate([np.exp(-1j * np.pi * n / 2), np.exp(1j * np.pi * n / 2)])
    u = np.diag(phases)
    u.setflags(write=False)
    return u


@lru_cache(maxsize=16)
def circle_step(params: ModelParams) -> np.ndarray:
    """Hadamard pulse on the coin followed by the conditional rotation."""
    u = conditional_rotation(params) @ coin_operator(HADAMARD, params)
    u.setflags(write=False)
    return u


def apply(unitary: np.ndarray, state: HybridFockState, check: bool = True) -> HybridFockState:
    out = HybridFockState(unitary @ state.vec, state.params)
    if check:
        _check_tail(out, state.params, "evolution")
    return out


def run_cv_line(N: int, coin0: CoinVector | str, params: ModelParams) -> HybridFockState:
    """Vacuum (x) coin0 followed by ``N`` four-pulse steps."""
    N = check_steps(N)
    coin0 = CoinVector.from_token(coin0).check_normalized()
    reach = N * params.step_displacement / np.sqrt(2.0) + 3.0
    if reach**2 > params.fock_dim:
        raise TruncationError(
            f"{N} steps of size {params.step_displacement:g} need roughly {int(np.ceil(reach**2))} "
            f"Fock levels; increase fock_dim (currently {params.fock_dim})"
        )
    vac = np.zeros(params.fock_dim, dtype=complex)
    vac[0] = 1.0
    state = hybrid_state(vac, coin0, params)
    step = four_pulse_step(params)
    for _ in range(N):
        state = apply(step, state)
    return state


def run_cv_circle(
    N: int, alpha0: float, coin0: CoinVector | str, params: ModelParams
) -> HybridFockState:
    """|alpha0> (x) coin0 followed by ``N`` circle steps (Hadamard, then conditional rotation)."""
    N = check_steps(N)
    alpha0 = check_positive_float(alpha0, "alpha0")
    coin0 = CoinVector.from_token(coin0).check_normalized()
    state = hybrid_state(coherent_state(alpha0, params), coin0, params)
    step = circle_step(params)
    for _ in range(N):
        state = apply(step, state)
    return state


# ---------------------------------------------------------------------------
# readout in position / phase space


def hermite_functions(n_levels: int, x) -> np.ndarray:
    """Oscillator eigenfunctions ``phi_n(x)`` for ``n < n_levels``; shape ``(n_levels, len(x))``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_levels,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if n_levels > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_levels - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def position_density(state, xs, params: ModelParams) -> np.ndarray:
    """Coin-traced position density ``<x|rho|x>`` at the points ``xs``.

    ``state`` may be a :class:`HybridFockState`, a ``2D x 2D`` hybrid density
    matrix or a ``D x D`` motional density matrix.
    """
    D = params.fock_dim
    phi = hermite_functions(D, xs)
    if isinstance(state, HybridFockState):
        psi = state.branches @ phi
        return np.sum(np.abs(psi) ** 2, axis=0)
    rho = np.asarray(state, dtype=complex)
    if rho.shape == (2 * D, 2 * D):
        rho = rho[:D, :D] + rho[D:, D:]
    return np.real(np.einsum("mx,mn,nx->x", phi, rho, phi))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def position_distribution(state, params: ModelParams, max_site: int | None = None) -> Distribution:
    """Integrate the position density over bins ``[d s - s/2, d s + s/2)``.

    Each bin is integrated with 32-point Gauss-Legendre quadrature.  Bins run
    over ``|d| <= max_site``, by default wide enough to cover every
    representable Fock level.
    """
    s = params.step_displacement
    if max_site is None:
        max_site = int(np.ceil((np.sqrt(2 * params.fock_dim + 1) + 6.0) / s))
    sites = np.arange(-max_site, max_site + 1)
    centres = sites * s
    xs = centres[:, None] + 0.5 * s * _GL_NODES[None, :]
    dens = position_density(state, xs.ravel(), params).reshape(xs.shape)
    probs = 0.5 * s * dens @ _GL_WEIGHTS
    return Distribution(sites.tolist(), np.clip(probs, 0.0, None), "line")


def site_amplitude(alpha0: float, k: int) -> complex:
    """Phase-space centre of ring site ``k``.

    Angles run clockwise in the alpha plane (the sense of free oscillator
    evolution), so that ``conditional_rotation`` moves a down coin to site k+1.
    """
    return alpha0 * np.exp(-0.5j * np.pi * k)


def circle_site_distribution(
    state: HybridFockState, alpha0: float, params: ModelParams
) -> Distribution:
    """Site probabilities by projection onto the four coherent states ``|alpha_k>``.

    Not renormalized: projections of different sites overlap by ``exp(-|alpha_j - alpha_k|^2)``.
    """
    probs = []
    for k in range(RING_SIZE):
        ref = coherent_state(site_amplitude(alpha0, k), params)
        probs.append(float(np.sum(np.abs(state.branches @ ref.conj()) ** 2)))
    return Distribution(range(RING_SIZE), probs, "ring")


def phase_sector_distribution(
    state: HybridFockState, params: ModelParams, n_radial: int = 200, n_angular: int = 64
) -> Distribution:
    """Husimi-Q mass in the four quadrants centred on the ring sites.

    Angles follow :func:`site_amplitude` (clockwise in the alpha plane).
    """
    D = params.fock_dim
    r_max = np.sqrt(D) + 4.0
    r_nodes, r_weights = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * r_max * (r_nodes + 1.0)
    r_w = 0.5 * r_max * r_weights
    n = np.arange(D)
    # |<beta|n>| = exp(-r^2/2) r^n / sqrt(n!), nodes never touch r = 0
    mag = np.exp(
        -0.5 * r[:, None] ** 2
        + n[None, :] * np.log(r)[:, None]
        - np.array([0.5 * lgamma(k + 1) for k in n])[None, :]
    )
    t_nodes, t_weights = np.polynomial.legendre.leggauss(n_angular)
    half = np.pi / 4
    probs = []
    for k in range(RING_SIZE):
        theta = k * np.pi / 2 + half * t_nodes
        # beta = r exp(-i theta), so conj(beta)^n carries exp(i n theta)
        phase = np.exp(1j * np.outer(n, theta))
        q = sum(np.abs(mag @ (branch[:, None] * phase)) ** 2 for branch in state.branches) / np.pi
        probs.append(float((r_w * r) @ q @ (half * t_weights)))
    return Distribution(range(RING_SIZE), np.clip(probs, 0.0, None), "ring")


def line_state_from_walk(state: LineState, params: ModelParams) -> HybridFockState:
    """Embed an ideal line-walk state as Gaussian packets centred on ``d * s``."""
    out = np.zeros((2, params.fock_dim), dtype=complex)
    for d, coins in zip(state.positions, state.amps):
        if np.any(coins):
            packet = coherent_state(d * params.step_displacement / np.sqrt(2.0), params)
            out += coins[:, None] * packet[None, :]
    return HybridFockState(out.ravel(), params)


def ring_state_from_walk(state: RingState, alpha0: float, params: ModelParams) -> HybridFockState:
    """Embed an ideal ring-walk state on the coherent states of :func:`site_amplitude`."""
    out = np.zeros((2, params.fock_dim), dtype=complex)
    for k, coins in enumerate(state.amps):
        if np.any(coins):
            out += coins[:, None] * coherent_state(site_amplitude(alpha0, k), params)[None, :]
    return HybridFockState(out.ravel(), params)


def fidelity(a, b) -> float:
    """|<a|b>|^2 for two pure states (vectors or :class:`HybridFockState`)."""
    va = a.vec if isinstance(a, HybridFockState) else np.asarray(a)
    vb = b.vec if isinstance(b, HybridFockState) else np.asarray(b)
    return float(abs(np.vdot(va, vb)) ** 2)

