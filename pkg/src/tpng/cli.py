"""Command line entry point: ``tpng <subcommand>``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import weights
from .colored import simulate_colored, verify_superadditivity, X_matrix
from .core import SimConfig, simulate, height
from .experiments import ExperimentSpec, ResourceGuardError, run_experiment
from .svg import render_svg
from .verify import run_all_verifications


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _boundary(text: str | None):
    """``1.5`` is a Poisson intensity; ``0.3,2.7`` (or a single value with a trailing comma) is a position list."""
    if text is None:
        return None
    if "," in text:
        return _floats(text)
    return float(text)


def parse_partition(text: str, n: int) -> list[list[int]]:
    """``1|2,3`` or ``1|2-3`` -> [[1], [2, 3]]."""
    blocks = []
    for part in text.split("|"):
        block = []
        for item in part.split(","):
            item = item.strip()
            if "-" in item:
                a, b = item.split("-")
                block.extend(range(int(a), int(b) + 1))
            elif item:
                block.append(int(item))
        blocks.append(block)
    weights.interval_partition(blocks, n)
    return blocks


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _default(o):
    import numpy as np

    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(type(o).__name__)


def cmd_simulate(a) -> int:
    cfg = SimConfig(t=a.t, width=a.size, height=a.size, seed=a.seed,
                    sources=_boundary(a.sources), sinks=_boundary(a.sinks))
    d = simulate(cfg)
    if a.svg:
        render_svg(d, a.svg, max_segments=a.max_segments)
    out = d.to_json()
    out["far_corner_height"] = height(d, a.size, a.size)
    if a.json:
        _dump(out, a.json)
    else:
        print(json.dumps({"nucleations": len(d.nucleations), "crossings": len(d.c_x), "corners": len(d.k_x),
                          "far_corner_height": out["far_corner_height"]}))
    return 0


def cmd_colored(a) -> int:
    d = simulate_colored(a.n, a.t, a.seed)
    out = {"n": a.n, "t": a.t, "seed": a.seed, "X": X_matrix(d).tolist()}
    code = 0
    if a.check_superadditivity:
        rep = verify_superadditivity(d)
        out["superadditivity"] = rep.to_json()
        code = 0 if rep.passed else 1
    if a.svg:
        render_svg(d, a.svg)
    _dump(out, a.json)
    return code


def cmd_verify_weights(a) -> int:
    if a.partition:
        rep = weights.verify_mod2_erasure(a.n, parse_partition(a.partition, a.n)).to_json()
    elif a.m is not None:
        rep = weights.verify_color_ignorance(a.n, a.m).to_json()
    else:
        rep = weights.verify_stochastic(a.n).to_json()
    _dump(rep, a.json)
    return 0 if rep["pass"] else 1


SPEC_FLAGS = ("t_values", "sizes", "replicas", "seed", "csv_path", "json_path", "threads", "max_points")


def build_spec(kind: str, a) -> ExperimentSpec:
    data = {}
    if getattr(a, "config", None):
        data = json.loads(Path(a.config).read_text(encoding="utf-8"))
        data.pop("kind", None)
    for key in SPEC_FLAGS:
        val = getattr(a, key, None)
        if val is not None:
            data[key] = val
    opts = dict(data.get("options", {}))
    for key in ("lambda", "x", "y", "scale", "area_factor", "times", "cells"):
        val = getattr(a, key.replace("lambda", "lam"), None)
        if val is not None:
            opts[key] = val
    data["options"] = opts
    return ExperimentSpec(kind=kind, **data)


def cmd_experiment(a) -> int:
    spec = build_spec(a.command, a)
    try:
        res = run_experiment(spec)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not spec.json_path:
        print(json.dumps({"aggregates": res.aggregates, "checks": res.checks}, default=_default, sort_keys=True))
    return 0


def cmd_verify_all(a) -> int:
    rep = run_all_verifications(a.level, a.seed)
    _dump(rep if a.json else {"pass": rep["pass"], "failures": rep["failures"], "seconds": rep["seconds"]}, a.json)
    return 0 if rep["pass"] else 1


def _experiment_parser(sub, name: str, help_: str) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help_)
    p.add_argument("--config", help="JSON file with experiment fields; flags override it")
    p.add_argument("--t", dest="t_values", type=_floats, help="comma-separated t values")
    p.add_argument("--size", dest="sizes", type=_floats, help="comma-separated sizes")
    p.add_argument("--replicas", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", dest="csv_path")
    p.add_argument("--json", dest="json_path")
    p.add_argument("--threads", type=int, help="worker processes (also capped by TPNG_THREADS)")
    p.add_argument("--max-points", dest="max_points", type=float, help="resource guard on expected point count")
    p.set_defaults(func=cmd_experiment)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tpng", description="t-PNG simulation and verification tools")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample one diagram on [0, S]^2")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--size", type=float, required=True)
    p.add_argument("--sources", help="Poisson intensity, or comma-separated positions")
    p.add_argument("--sinks", help="Poisson intensity, or comma-separated heights")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg")
    p.add_argument("--json")
    p.add_argument("--max-segments", type=int, default=10_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("colored", help="sample the step colored model on [0, n]^2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check-superadditivity", action="store_true")
    p.add_argument("--svg")
    p.add_argument("--json")
    p.set_defaults(func=cmd_colored)

    p = sub.add_parser("verify-weights", help="exhaustive symbolic checks of the colored weights")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, help="check color ignorance down to m colors")
    p.add_argument("--partition", help="interval partition for the mod-2 check, e.g. '1|2,3' or '1|2-3'")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify_weights)

    _experiment_parser(sub, "hydro", "N(s, s)/s against 2/sqrt(1-t)")
    _experiment_parser(sub, "alpha-lln", "alpha-point density against 1/(1-t)")
    _experiment_parser(sub, "coupling", "t-run versus t=0 run on shared nucleations")
    _experiment_parser(sub, "colored-farm", "step colored replicas").set_defaults(command="colored")
    p = _experiment_parser(sub, "scaling", "two-sample KS of N(s x, y/s) against N(x, y)")
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--area-factor", dest="area_factor", type=float)
    p = _experiment_parser(sub, "burke", "output-process statistics of the stationary model")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--times", type=_floats, help="also test particle snapshots at these heights")
    p.add_argument("--cells", type=int)

    p = sub.add_parser("verify-all", help="run every verification suite")
    p.add_argument("--level", default="default", choices=["quick", "default", "full"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify_all)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return a.func(a)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
