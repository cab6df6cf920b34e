"""Command-line experiment runner.

Exit codes: 0 success, 2 malformed flags, 3 out-of-range values, 4 Fock-space
truncation failure, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io as qio
from .cv_model import (
    ModelParams,
    circle_site_distribution,
    phase_sector_distribution,
    position_distribution,
    run_cv_circle,
    run_cv_line,
)
from .decoherence import (
    MAX_DEPHASING,
    estimate_dephasing,
    evolve_cv_line_density,
    run_line_decohered,
    run_ring_decohered,
)
from .errors import FitError, TruncationError
from .readout import ProtocolConfig, readout_curve
from .walk_core import CoinVector, classical_circle_distribution, classical_line_distribution
from .wigner import default_grid, trace_out_coin, wigner_function

COMMANDS = (
    "line",
    "circle",
    "cv-line",
    "cv-circle",
    "wigner",
    "readout-line",
    "readout-circle",
    "estimate",
    "sweep",
)

EXIT_OK, EXIT_USAGE, EXIT_RANGE, EXIT_TRUNCATION, EXIT_IO = 0, 2, 3, 4, 5

# coin defaults: mean-zero coin for line walks, down for the circle and readout
DEFAULT_COIN = {
    "line": "symmetric",
    "cv-line": "symmetric",
    "wigner": "symmetric",
    "circle": "down",
    "cv-circle": "down",
    "readout-line": "down",
    "readout-circle": "down",
    "estimate": "down",
    "sweep": None,
}


class RangeError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class ExperimentSpec:
    command: str
    steps: list = field(default_factory=lambda: [0])
    coin0: str = "symmetric"
    dephasing: list = field(default_factory=lambda: [0.0])
    fock_dim: int = 128
    alpha0: float = 3.0
    step_displacement: float = 1.0
    output_path: str | None = None
    format: str = "csv"
    seed: int | None = None
    classical: bool = False
    conditioned: bool = False
    tier: str = "discrete"
    shots: int | None = None
    protocol: str = "line"
    input_path: str | None = None
    walk: str = "line"
    grid_points: int = 121
    extent: float = 8.0
    sectors: bool = False

    @property
    def n(self) -> int:
        return self.steps[0]

    @property
    def p(self) -> float:
        return self.dephasing[0]

    @property
    def params(self) -> ModelParams:
        return ModelParams(fock_dim=self.fock_dim, step_displacement=self.step_displacement)


def _add_common(sp, steps_default=None, multi=False):
    nargs = "+" if multi else None
    sp.add_argument("--steps", "-N", type=int, nargs=nargs, default=steps_default,
                    required=steps_default is None, help="number of walk steps")
    sp.add_argument("--dephasing", "-p", type=float, nargs=nargs, default=0.0,
                    help="coin phase-flip probability per step")
    sp.add_argument("--coin", default=None,
                    help="initial coin: down, up, symmetric or 're,im,re,im'")
    sp.add_argument("--output", "-o", default=None, help="output file (stdout if omitted)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_cv(sp):
    sp.add_argument("--fock-dim", type=int, default=128, help="Fock-space truncation")
    sp.add_argument("--step-displacement", type=float, default=1.0,
                    help="position step per walk step (dimensionless x units)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk", description="Quantum random walks on a line and a circle."
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    for name, helptext in (("line", "line walk distribution"), ("circle", "circle walk distribution")):
        sp = sub.add_parser(name, help=helptext)
        _add_common(sp)
        sp.add_argument("--classical", action="store_true", help="classical coin-flip walk")

    sp = sub.add_parser("cv-line", help="line walk in the oscillator model, binned positions")
    _add_common(sp)
    _add_cv(sp)

    sp = sub.add_parser("cv-circle", help="circle walk in phase space")
    _add_common(sp)
    _add_cv(sp)
    sp.add_argument("--alpha0", type=float, default=3.0, help="initial coherent amplitude")
    sp.add_argument("--sectors", action="store_true",
                    help="bin Husimi Q by phase quadrant instead of coherent-state projection")

    sp = sub.add_parser("wigner", help="Wigner function of the line-walk motional state")
    _add_common(sp, steps_default=5)
    _add_cv(sp)
    sp.add_argument("--grid-points", type=int, default=121)
    sp.add_argument("--extent", type=float, default=8.0, help="grid covers [-extent, extent]^2")

    for name in ("readout-line", "readout-circle"):
        sp = sub.add_parser(name, help=f"{name.split('-')[1]} readout curve for steps 1..N")
        _add_common(sp, steps_default=10)
        _add_cv(sp)
        sp.add_argument("--tier", choices=("discrete", "cv"), default="discrete")
        sp.add_argument("--alpha0", type=float, default=3.0)
        sp.add_argument("--shots", type=int, default=None, help="sample each point with this many shots")
        sp.add_argument("--seed", type=int, default=None)
        if name == "readout-circle":
            sp.add_argument("--conditioned", action="store_true",
                            help="apply D after up and its inverse after down")

    sp = sub.add_parser("estimate", help="fit the dephasing rate to a readout curve file")
    sp.add_argument("--input", "-i", required=True, help="curve file (CSV step,p_down or JSON)")
    sp.add_argument("--protocol", choices=("line", "circle"), default="line")
    sp.add_argument("--coin", default=None)
    sp.add_argument("--alpha0", type=float, default=3.0)
    sp.add_argument("--output", "-o", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="json")

    sp = sub.add_parser("sweep", help="distributions over a grid of steps x dephasing")
    sp.add_argument("--walk", choices=("line", "circle"), default="line")
    _add_common(sp, multi=True)
    return parser


def _validate(spec: ExperimentSpec) -> ExperimentSpec:
    for n in spec.steps:
        if n < 0:
            raise RangeError("--steps", f"must be >= 0, got {n}")
    upper = MAX_DEPHASING if spec.command == "estimate" else 1.0
    for p in spec.dephasing:
        if not (np.isfinite(p) and 0.0 <= p <= upper):
            raise RangeError("--dephasing", f"must lie in [0, {upper:g}], got {p}")
    if spec.fock_dim < 2:
        raise RangeError("--fock-dim", f"must be >= 2, got {spec.fock_dim}")
    if not (np.isfinite(spec.alpha0) and spec.alpha0 > 0):
        raise RangeError("--alpha0", f"must be positive, got {spec.alpha0}")
    if not (np.isfinite(spec.step_displacement) and spec.step_displacement > 0):
        raise RangeError("--step-displacement", f"must be positive, got {spec.step_displacement}")
    if spec.shots is not None and spec.shots < 1:
        raise RangeError("--shots", f"must be positive, got {spec.shots}")
    if spec.grid_points < 2:
        raise RangeError("--grid-points", f"must be >= 2, got {spec.grid_points}")
    if not (np.isfinite(spec.extent) and spec.extent > 0):
        raise RangeError("--extent", f"must be positive, got {spec.extent}")
    try:
        CoinVector.from_token(spec.coin0).check_normalized()
    except ValueError as exc:
        raise RangeError("--coin", str(exc)) from None
    if spec.command == "sweep" and not spec.output_path:
        raise RangeError("--output", "sweep needs an output directory")
    return spec


def parse_args(argv=None) -> ExperimentSpec:
    """Parse and validate; exits 2 on malformed flags and 3 on out-of-range values."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    as_list = lambda v: list(v) if isinstance(v, (list, tuple)) else [v]  # noqa: E731
    coin = getattr(ns, "coin", None)
    if coin is None:
        coin = DEFAULT_COIN[ns.command] or ("symmetric" if ns.walk == "line" else "down")
    spec = ExperimentSpec(
        command=ns.command,
        steps=as_list(getattr(ns, "steps", 0)),
        coin0=coin,
        dephasing=as_list(getattr(ns, "dephasing", 0.0)),
        fock_dim=getattr(ns, "fock_dim", 128),
        alpha0=getattr(ns, "alpha0", 3.0),
        step_displacement=getattr(ns, "step_displacement", 1.0),
        output_path=ns.output,
        format=ns.format,
        seed=getattr(ns, "seed", None),
        classical=getattr(ns, "classical", False),
        conditioned=getattr(ns, "conditioned", False),
        tier=getattr(ns, "tier", "discrete"),
        shots=getattr(ns, "shots", None),
        protocol=getattr(ns, "protocol", "line"),
        input_path=getattr(ns, "input", None),
        walk=getattr(ns, "walk", "line"),
        grid_points=getattr(ns, "grid_points", 121),
        extent=getattr(ns, "extent", 8.0),
        sectors=getattr(ns, "sectors", False),
    )
    try:
        return _validate(spec)
    except RangeError as exc:
        parser.print_usage(sys.stderr)
        print(f"qwalk: error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_RANGE) from None


# ---------------------------------------------------------------------------
# commands


def _meta(spec: ExperimentSpec, **extra) -> dict:
    meta = {"command": spec.command, "steps": spec.n, "dephasing": spec.p, "coin": spec.coin0}
    meta.update(extra)
    return meta


def _render_distribution(dist, spec: ExperimentSpec, **extra) -> str:
    if spec.format == "json":
        return qio.dumps_json(qio.distribution_to_json(dist, _meta(spec, **extra)))
    return qio.distribution_to_csv(dist)


def _walk_distribution(walk: str, n: int, p: float, spec: ExperimentSpec):
    if walk == "line":
        if spec.classical:
            return classical_line_distribution(n)
        return run_line_decohered(n, spec.coin0, p)
    if spec.classical:
        return classical_circle_distribution(n)
    return run_ring_decohered(n, spec.coin0, p)


def _cmd_walk(spec: ExperimentSpec) -> str:
    dist = _walk_distribution(spec.command, spec.n, spec.p, spec)
    return _render_distribution(dist, spec, classical=spec.classical)


def _cmd_cv_line(spec: ExperimentSpec) -> str:
    params = spec.params
    if spec.p > 0:
        state = evolve_cv_line_density(spec.n, spec.coin0, spec.p, params).data
    else:
        state = run_cv_line(spec.n, spec.coin0, params)
    return _render_distribution(
        position_distribution(state, params, max_site=spec.n + 4), spec,
        fock_dim=spec.fock_dim, step_displacement=spec.step_displacement,
    )


def _cmd_cv_circle(spec: ExperimentSpec) -> str:
    if spec.p > 0:
        raise RangeError("--dephasing", "cv-circle supports pure evolution only (use 0)")
    params = spec.params
    state = run_cv_circle(spec.n, spec.alpha0, spec.coin0, params)
    if spec.sectors:
        dist = phase_sector_distribution(state, params)
    else:
        dist = circle_site_distribution(state, spec.alpha0, params)
    return _render_distribution(
        dist, spec, fock_dim=spec.fock_dim, alpha0=spec.alpha0,
        binning="sectors" if spec.sectors else "coherent",
    )


def _cmd_wigner(spec: ExperimentSpec) -> str:
    params = spec.params
    if spec.p > 0:
        rho = trace_out_coin(evolve_cv_line_density(spec.n, spec.coin0, spec.p, params).data, params)
    else:
        rho = trace_out_coin(run_cv_line(spec.n, spec.coin0, params))
    grid = default_grid(spec.grid_points, spec.extent)
    w = wigner_function(rho, grid, grid, params)
    if spec.format == "json":
        return qio.dumps_json(qio.wigner_to_json(w, _meta(spec, fock_dim=spec.fock_dim)))
    return qio.wigner_to_csv(w)


def _protocol_config(spec: ExperimentSpec, n: int, p: float) -> ProtocolConfig:
    return ProtocolConfig(
        steps=n,
        dephasing=p,
        tier=spec.tier,
        params=spec.params,
        coin0=spec.coin0,
        alpha0=spec.alpha0,
        conditioned=spec.conditioned,
        shots=spec.shots,
        seed=spec.seed,
    )


def _cmd_readout(spec: ExperimentSpec) -> str:
    protocol = spec.command.split("-", 1)[1]
    curve = readout_curve(protocol, _protocol_config(spec, spec.n, spec.p))
    if spec.format == "json":
        return qio.dumps_json(qio.curve_to_json(curve, _meta(spec, tier=spec.tier)))
    return qio.curve_to_csv(curve)


def _cmd_estimate(spec: ExperimentSpec) -> str:
    curve = qio.read_curve(spec.input_path)
    rate = estimate_dephasing(
        curve.p_down, spec.protocol, curve.steps, coin0=spec.coin0, alpha0=spec.alpha0
    )
    model = readout_curve(
        spec.protocol,
        ProtocolConfig(steps=max(curve.steps), dephasing=rate.p, coin0=spec.coin0, alpha0=spec.alpha0),
        curve.steps,
    )
    residual = float(np.sum((model.as_array() - curve.as_array()) ** 2))
    spec.dephasing = [rate.p]
    spec.steps = [max(curve.steps)]
    if spec.format == "json":
        payload = {
            "type": "estimate",
            "protocol": spec.protocol,
            "dephasing": float(qio.fmt(rate.p)),
            "residual": float(qio.fmt(residual)),
            "meta": {"input": Path(spec.input_path).name, "samples": len(curve.steps)},
        }
        return qio.dumps_json(payload)
    return f"protocol,dephasing,residual\n{spec.protocol},{qio.fmt(rate.p)},{qio.fmt(residual)}\n"


def _sweep_threads() -> int:
    raw = os.environ.get("QWALK_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _cmd_sweep(spec: ExperimentSpec) -> str:
    outdir = Path(spec.output_path)
    outdir.mkdir(parents=True, exist_ok=True)
    points = [(n, p) for n in spec.steps for p in spec.dephasing]

    def run_point(point):
        n, p = point
        sub = replace(spec, command=spec.walk, steps=[n], dephasing=[p])
        dist = _walk_distribution(spec.walk, n, p, sub)
        name = f"{spec.walk}_N{n}_p{qio.fmt(p)}.{spec.format}"
        (outdir / name).write_text(_render_distribution(dist, sub))
        return {"steps": n, "dephasing": float(qio.fmt(p)), "path": name}

    with ThreadPoolExecutor(max_workers=_sweep_threads()) as pool:
        entries = list(pool.map(run_point, points))
    index = {"type": "sweep_index", "walk": spec.walk, "points": entries}
    (outdir / "index.json").write_text(qio.dumps_json(index))
    return ""


HANDLERS = {
    "line": _cmd_walk,
    "circle": _cmd_walk,
    "cv-line": _cmd_cv_line,
    "cv-circle": _cmd_cv_circle,
    "wigner": _cmd_wigner,
    "readout-line": _cmd_readout,
    "readout-circle": _cmd_readout,
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
}


def run(spec: ExperimentSpec) -> int:
    """Execute ``spec``; writes the artifact and prints a one-line summary."""
    start = time.perf_counter()
    try:
        text = HANDLERS[spec.command](spec)
        if spec.command != "sweep":
            if spec.output_path:
                Path(spec.output_path).write_text(text)
            else:
                sys.stdout.write(text)
    except TruncationError as exc:
        print(f"qwalk: truncation error: {exc} (hint: increase --fock-dim)", file=sys.stderr)
        return EXIT_TRUNCATION
    except RangeError as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except FitError as exc:
        print(f"qwalk: error: --input: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (OSError, ValueError) as exc:
        if isinstance(exc, ValueError) and spec.command != "estimate":
            raise
        print(f"qwalk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    elapsed = time.perf_counter() - start
    summary = (
        f"{spec.command} N={','.join(map(str, spec.steps))} "
        f"p={','.join(qio.fmt(p) for p in spec.dephasing)} "
        f"output={spec.output_path or '-'} time={elapsed:.3f}s"
    )
    print(summary, file=sys.stdout if spec.output_path else sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
