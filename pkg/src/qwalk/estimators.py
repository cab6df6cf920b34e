"""scikit-learn style wrappers around the walk simulators and the dephasing fit.

Step counts play the role of ``X`` (one column, or a flat sequence):

>>> LineWalk().fit([[4]]).transform([[4]]).round(4)[0, ::2]
array([0.0625, 0.375 , 0.125 , 0.375 , 0.0625])
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_probability, check_steps
from .decoherence import MAX_DEPHASING, estimate_dephasing, run_line_decohered, run_ring_decohered
from .readout import ProtocolConfig, readout_curve
from .walk_core import (
    CoinVector,
    classical_circle_distribution,
    classical_line_distribution,
)

__all__ = ["LineWalk", "CircleWalk", "DephasingEstimator", "check_steps_array"]


def check_steps_array(X) -> np.ndarray:
    """Flatten ``X`` to a 1-d integer array of non-negative step counts."""
    arr = np.asarray(X)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single column of step counts, got shape {arr.shape}")
        arr = arr[:, 0]
    elif arr.ndim != 1:
        raise ValueError(f"expected 1-d or single-column step counts, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("no step counts given")
    if not np.all(np.isfinite(arr.astype(float))) or np.any(arr.astype(float) % 1 != 0):
        raise ValueError("step counts must be whole numbers")
    return np.array([check_steps(int(n)) for n in arr], dtype=int)


class _WalkTransformer(TransformerMixin, BaseEstimator):
    def _check_params(self):
        CoinVector.from_token(self.coin0).check_normalized()
        check_probability(self.dephasing, "dephasing")

    def fit(self, X, y=None):
        self._check_params()
        steps = check_steps_array(X)
        self.n_features_in_ = 1
        self.max_steps_ = int(steps.max())
        self.support_ = self._support(self.max_steps_)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "support_")
        steps = check_steps_array(X)
        if steps.max() > self.max_steps_ and self.support_.size != 4:
            raise ValueError(
                f"fitted for at most {self.max_steps_} steps, asked for {int(steps.max())}"
            )
        out = np.zeros((steps.size, self.support_.size))
        index = {int(k): i for i, k in enumerate(self.support_)}
        for row, n in enumerate(steps):
            dist = self._distribution(int(n))
            for label, p in zip(dist.support, dist.probabilities):
                out[row, index[int(label)]] = p
        return out


class LineWalk(_WalkTransformer):
    """Position distributions of the line walk, one row per step count.

    Columns are positions ``-max_steps_ .. max_steps_`` (``support_``).
    ``classical=True`` gives the binomial walk; ``dephasing`` is the per-step
    coin phase-flip probability.
    """

    def __init__(self, coin0="symmetric", dephasing=0.0, classical=False):
        self.coin0 = coin0
        self.dephasing = dephasing
        self.classical = classical

    def _support(self, n_max: int) -> np.ndarray:
        return np.arange(-n_max, n_max + 1)

    def _distribution(self, n: int):
        if self.classical:
            return classical_line_distribution(n)
        return run_line_decohered(n, self.coin0, self.dephasing)


class CircleWalk(_WalkTransformer):
    """Site distributions of the 4-site ring walk; columns are sites 0..3."""

    def __init__(self, coin0="down", dephasing=0.0, classical=False):
        self.coin0 = coin0
        self.dephasing = dephasing
        self.classical = classical

    def _support(self, n_max: int) -> np.ndarray:
        return np.arange(4)

    def _distribution(self, n: int):
        if self.classical:
            return classical_circle_distribution(n)
        return run_ring_decohered(n, self.coin0, self.dephasing)


class DephasingEstimator(RegressorMixin, BaseEstimator):
    """Fit the per-step dephasing probability to a measured readout curve.

    ``fit(steps, p_down)`` sets ``dephasing_``; ``predict(steps)`` returns the
    simulated readout curve at that rate.
    """

    def __init__(self, protocol="line", coin0="down", alpha0=3.0, grid_step=0.01):
        self.protocol = protocol
        self.coin0 = coin0
        self.alpha0 = alpha0
        self.grid_step = grid_step

    def fit(self, X, y):
        steps = check_steps_array(X)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != steps.shape:
            raise ValueError("X and y must have the same number of samples")
        rate = estimate_dephasing(
            y,
            self.protocol,
            steps.tolist(),
            coin0=self.coin0,
            alpha0=self.alpha0,
            grid_step=self.grid_step,
        )
        self.n_features_in_ = 1
        self.dephasing_ = rate.p
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "dephasing_")
        steps = check_steps_array(X)
        cfg = ProtocolConfig(
            steps=int(steps.max()),
            dephasing=min(self.dephasing_, MAX_DEPHASING),
            coin0=self.coin0,
            alpha0=self.alpha0,
        )
        curve = readout_curve(self.protocol, cfg, steps.tolist())
        lookup = dict(zip(curve.steps, curve.p_down))
        return np.array([lookup[int(n)] for n in steps])
