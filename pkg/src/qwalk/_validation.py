"""Input validation helpers shared by the functional API, the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

NORM_TOL = 1e-9


def check_steps(steps, name: str = "steps") -> int:
    """Return ``steps`` as a non-negative int or raise ``ValueError``."""
    if isinstance(steps, bool) or not isinstance(steps, numbers.Integral):
        if isinstance(steps, float) and steps.is_integer():
            steps = int(steps)
        else:
            raise TypeError(f"{name} must be an integer, got {steps!r}")
    steps = int(steps)
    if steps < 0:
        raise ValueError(f"{name} must be >= 0, got {steps}")
    return steps


def check_probability(p, name: str = "dephasing", upper: float = 1.0) -> float:
    p = float(p)
    if not np.isfinite(p) or p < 0.0 or p > upper:
        raise ValueError(f"{name} must lie in [0, {upper:g}], got {p!r}")
    return p



def check_positive_float(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value
