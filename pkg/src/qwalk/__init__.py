"""Discrete-time quantum random walks on a line and a 4-site circle.

Two model tiers are provided: an ideal coin-position walk (:mod:`qwalk.walk_core`)
and a trapped-ion model with a spin coin and a truncated motional Fock space
(:mod:`qwalk.cv_model`).  Dephasing, Wigner functions and the coin-readout
benchmark protocols are built on top of both.
"""
from .cv_model import ModelParams, run_cv_circle, run_cv_line
from .decoherence import (
    DephasingRate,
    estimate_dephasing,
    run_line_decohered,
    run_ring_decohered,
)
from .errors import (
    CompilationError,
    DegenerateOutcome,
    FitError,
    QWalkError,
    TruncationError,
    TruncationWarning,
)
from .estimators import CircleWalk, DephasingEstimator, LineWalk
from .readout import ProtocolConfig, ReadoutCurve, circle_readout, line_readout, readout_curve
from .walk_core import (
    CoinVector,
    Distribution,
    classical_circle_distribution,
    classical_line_distribution,
    run_line,
    run_ring,
    stats,
)
from .wigner import trace_out_coin, wigner_function

__version__ = "0.1.0"

__all__ = [
    "CircleWalk",
    "CoinVector",
    "CompilationError",
    "DegenerateOutcome",
    "DephasingEstimator",
    "DephasingRate",
    "Distribution",
    "FitError",
    "LineWalk",
    "ModelParams",
    "ProtocolConfig",
    "QWalkError",
    "ReadoutCurve",
    "TruncationError",
    "TruncationWarning",
    "circle_readout",
    "classical_circle_distribution",
    "classical_line_distribution",
    "estimate_dephasing",
    "line_readout",
    "readout_curve",
    "run_cv_circle",
    "run_cv_line",
    "run_line",
    "run_line_decohered",
    "run_ring",
    "run_ring_decohered",
    "stats",
    "trace_out_coin",
    "wigner_function",
]
