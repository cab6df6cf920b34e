"""CSV/JSON serialization of distributions, readout curves and Wigner grids.

Numbers are written with 12 significant digits and JSON keys are sorted, so
identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .readout import ReadoutCurve
from .walk_core import Distribution
from .wigner import WignerGrid

SCHEMAS = ("distribution", "readout_curve", "wigner_grid", "estimate", "sweep_index")


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _num(x: float) -> float:
    return float(fmt(x))


def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(f"unknown schema {name!r}")
    text = resources.files("qwalk.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def dumps_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def distribution_to_csv(dist: Distribution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["position", "probability"])
    for label, p in zip(dist.labels(), dist.probabilities):
        w.writerow([label, fmt(p)])
    return buf.getvalue()


def distribution_to_json(dist: Distribution, meta: dict | None = None) -> dict:
    return {
        "type": "distribution",
        "kind": dist.kind,
        "positions": dist.labels(),
        "probabilities": [_num(p) for p in dist.probabilities],
        "meta": meta or {},
    }


def curve_to_csv(curve: ReadoutCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "p_down"])
    for n, p in zip(curve.steps, curve.p_down):
        w.writerow([n, fmt(p)])
    return buf.getvalue()


def curve_to_json(curve: ReadoutCurve, meta: dict | None = None) -> dict:
    return {
        "type": "readout_curve",
        "protocol": curve.protocol,
        "dephasing": _num(curve.dephasing),
        "steps": list(curve.steps),
        "p_down": [_num(p) for p in curve.p_down],
        "meta": meta or {},
    }


def read_curve(path: str | Path) -> ReadoutCurve:
    """Load a readout curve written by :func:`curve_to_csv` or :func:`curve_to_json`."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        data = json.loads(text)
        return ReadoutCurve(
            data["steps"], data["p_down"], data.get("protocol", "line"), data.get("dephasing", 0.0)
        )
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"step", "p_down"}:
        raise ValueError(f"{path}: expected CSV columns 'step,p_down'")
    return ReadoutCurve([int(r["step"]) for r in rows], [float(r["p_down"]) for r in rows])


def wigner_to_csv(grid: WignerGrid) -> str:
    """Header row ``p\\x, x_0, x_1, ...``; each following row is ``p_i, W(x_0, p_i), ...``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p\\x"] + [fmt(x) for x in grid.xs])
    for p, row in zip(grid.ps, grid.values):
        w.writerow([fmt(p)] + [fmt(v) for v in row])
    return buf.getvalue()


def wigner_to_json(grid: WignerGrid, meta: dict | None = None) -> dict:
    return {
        "type": "wigner_grid",
        "xs": [_num(x) for x in grid.xs],
        "ps": [_num(p) for p in grid.ps],
        "values": [[_num(v) for v in row] for row in grid.values],
        "meta": meta or {},
    }


def read_wigner_csv(path: str | Path) -> WignerGrid:
    rows = list(csv.reader(Path(path).read_text().splitlines()))
    xs = np.array([float(x) for x in rows[0][1:]])
    ps = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return WignerGrid(xs, ps, values)
