"""Partial trace over the coin and Wigner functions of the motional state."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cv_model import HybridFockState, ModelParams, tail_mass
from .errors import TruncationWarning

__all__ = ["WignerGrid", "trace_out_coin", "wigner_function", "default_grid", "purity"]


@dataclass(frozen=True)
class WignerGrid:
    """``values[i, j] = W(xs[j], ps[i])``: rows are momenta, columns positions."""

    xs: np.ndarray = field(repr=False)
    ps: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    imag_residue: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0]) if len(self.xs) > 1 else 1.0

    @property
    def dp(self) -> float:
        return float(self.ps[1] - self.ps[0]) if len(self.ps) > 1 else 1.0

    def total(self) -> float:
        """Riemann-sum normalization."""
        return float(self.values.sum() * self.dx * self.dp)

    def x_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dp

    def p_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dx


def default_grid(points: int = 121, extent: float = 8.0) -> np.ndarray:
    return np.linspace(-extent, extent, points)


def trace_out_coin(state, params: ModelParams | None = None) -> np.ndarray:
    """Reduced motional density matrix ``sum_c <c|rho|c>``.

    Accepts a :class:`HybridFockState` or a ``2D x 2D`` coin-major density matrix
    (``params`` is then required to know ``D``).
    """
    if isinstance(state, HybridFockState):
        b = state.branches
        return b.T @ b.conj()
    if params is None:
        raise ValueError("params are required to trace a density matrix")
    D = params.fock_dim
    rho = np.asarray(state, dtype=complex)
    if rho.shape != (2 * D, 2 * D):
        raise ValueError(f"expected a {2 * D}x{2 * D} hybrid density matrix, got {rho.shape}")
    return rho[:D, :D] + rho[D:, D:]


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def wigner_function(rho, xs, ps, params: ModelParams | None = None) -> WignerGrid:
    """Wigner function ``(1/pi) Tr[rho D(alpha) P D(alpha)^dag]`` with ``alpha = (x + i p)/sqrt(2)``.

    The displaced-parity expectation is summed over the Fock matrix elements
    ``<n|D(alpha) P D(alpha)^dag|m>``, which obey a two-term (Laguerre) recursion
    in ``m`` and ``n`` starting from ``exp(-2|alpha|^2)``.  Cost is ``O(D^2)``
    per grid point, vectorized over the grid.
    """
    rho = np.asarray(rho, dtype=complex)
    D = rho.shape[0]
    if params is not None and D == params.fock_dim:
        mass = tail_mass_density(rho, params)
        if mass > params.tail_tol:
            warnings.warn(
                f"motional state has {mass:.3g} probability in the top Fock levels; "
                "values near the grid edge may be unreliable",
                TruncationWarning,
                stacklevel=2,
            )
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    X, P = np.meshgrid(xs, ps)
    alpha = (X + 1j * P) / np.sqrt(2.0)
    two_a = 2.0 * alpha
    two_ac = two_a.conj()
    sqrt_n = np.sqrt(np.arange(D, dtype=float))

    # row[n] holds w_{m n}; for m = 0, w_{0n} = (2 alpha)^n / sqrt(n!) * w_{00}
    row = np.empty((D,) + alpha.shape, dtype=complex)
    row[0] = np.exp(-2.0 * np.abs(alpha) ** 2)
    for n in range(1, D):
        row[n] = two_a * row[n - 1] / sqrt_n[n]

    acc = rho[0, 0] * row[0]
    if D > 1:
        acc += np.tensordot(rho[0, 1:], row[1:], axes=1)
        acc += np.tensordot(rho[1:, 0], row[1:].conj(), axes=1)
    for m in range(1, D):
        # advance row from w_{m-1, .} to w_{m, .} in place; entries below m are stale
        prev = row[m].copy()
        row[m] = (two_ac * prev - sqrt_n[m] * row[m - 1]) / sqrt_n[m]
        for n in range(m + 1, D):
            cur = row[n].copy()
            row[n] = (two_a * row[n - 1] - sqrt_n[m] * prev) / sqrt_n[n]
            prev = cur
        # rho_{mn} w_{mn} + rho_{nm} conj(w_{mn}) over n > m, plus the diagonal
        acc += rho[m, m] * row[m]
        if m + 1 < D:
            upper = row[m + 1 :]
            acc += np.tensordot(rho[m, m + 1 :], upper, axes=1)
            acc += np.tensordot(rho[m + 1 :, m], upper.conj(), axes=1)
    values = acc / np.pi
    residue = float(np.max(np.abs(values.imag), initial=0.0))
    return WignerGrid(xs, ps, values.real.copy(), residue)


def tail_mass_density(rho: np.ndarray, params: ModelParams) -> float:
    return float(np.real(np.trace(rho[params.tail_start :, params.tail_start :])))
