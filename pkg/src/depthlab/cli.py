"""Command-line entry point.

Exit status is 0 on success, 2 on a usage error and 1 when the command
itself fails.  Results go to standard output as JSON (or CSV for point
clouds) unless ``--out`` names a ``.json`` or ``.csv`` file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import geometry as geo
from .cloud import CloudError, PointCloud, cloud_from_csv, cloud_to_csv, format_float
from .contamination import FAR_CLUSTER, REPLAY, SMEAR, ContaminationPlan, PlanError, contaminate
from .depth import depth
from .experiments import BudgetExceeded, ExperimentConfig, ExperimentError, run_experiment
from .limit import DirectionGrid, FactorizationError, Lattice, evaluate_w, simulate_bridge
from .models import EllipticalModel, ModelError, sample_elliptical
from .regions import LevelError, depth_contours, depth_region, tukey_median


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not all(np.isfinite(vals)):
        raise UsageError(f"{what}: values must be finite")
    return vals


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None


def _read_cloud(path: str) -> PointCloud:
    return cloud_from_csv(Path(path).read_text(encoding="utf-8"))


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from None


def _out_kind(path: str | None) -> str | None:
    if path is None:
        return None
    ext = Path(path).suffix.lower()
    if ext not in (".csv", ".json"):
        raise UsageError(f"--out must end in .csv or .json, got {path!r}")
    return ext[1:]


def _emit(args, payload: dict | list, csv_text=None, default_csv: bool = False) -> None:
    """Write JSON (or the CSV rendering) to ``--out`` or standard output."""
    kind = _out_kind(args.out)
    if kind is None:
        text = csv_text() if default_csv else _dumps(payload) + "\n"
        sys.stdout.write(text)
        return
    if kind == "csv":
        if csv_text is None:
            raise UsageError("this command has no CSV output; use a .json path")
        text = csv_text()
    else:
        text = _dumps(payload) + "\n"
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _region_rows(level, region: geo.ConvexRegion) -> list[str]:
    return [f"{level},{region.kind},{i},{format_float(x)},{format_float(y)}"
            for i, (x, y) in enumerate(region.vertices)]


# -- verbs ---------------------------------------------------------------------


def cmd_depth(args) -> None:
    cloud = _read_cloud(args.input)
    z = _floats(args.point, "--point")
    if len(z) != cloud.dim:
        raise CloudError(f"--point has dim {len(z)}, cloud has dim {cloud.dim}")
    dv = depth(cloud, z, n_dirs=args.n_dirs, seed=args.seed)
    res = dv.to_dict()
    _emit(args, res, lambda: "count,n,depth\n" f"{dv.count},{dv.n},{format_float(dv.value)}\n")


def cmd_median(args) -> None:
    tm = tukey_median(_read_cloud(args.input))

    def csv():
        lines = ["role,level,kind,vertex,x,y",
                 f"median,{tm.level},point,0,{format_float(tm.point[0])},{format_float(tm.point[1])}"]
        lines += ["set," + r for r in _region_rows(tm.level, tm.region)]
        return "\n".join(lines) + "\n"

    _emit(args, tm.to_dict(), csv)


def cmd_region(args) -> None:
    res = depth_region(_read_cloud(args.input), args.level)
    _emit(args, res.to_dict(),
          lambda: "\n".join(["level,kind,vertex,x,y"] + _region_rows(res.level, res.region)) + "\n")


def cmd_contour(args) -> None:
    res = depth_contours(_read_cloud(args.input), _ints(args.levels, "--levels"))

    def csv():
        lines = ["level,kind,vertex,x,y"]
        for r in res:
            lines += _region_rows(r.level, r.region)
        return "\n".join(lines) + "\n"

    _emit(args, [r.to_dict() for r in res], csv)


def cmd_sample(args) -> None:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    model = EllipticalModel.from_dict(_read_json(args.model))
    cloud = sample_elliptical(model, args.n, args.seed)
    _emit(args, {"points": cloud.points.tolist()}, lambda: cloud_to_csv(cloud), default_csv=True)


def cmd_contaminate(args) -> None:
    cloud = _read_cloud(args.input)
    direction = tuple(_floats(args.direction, "--direction")) if args.direction else \
        tuple([1.0] + [0.0] * (cloud.dim - 1))
    pts = _read_cloud(args.replay).points if args.replay else None
    if args.strategy == REPLAY and pts is None:
        raise UsageError("--strategy replay needs --replay")
    plan = ContaminationPlan(args.epsilon, args.strategy, args.radius, direction, pts)
    out = contaminate(cloud, plan, args.seed)
    _emit(args, {"points": out.points.tolist()}, lambda: cloud_to_csv(out), default_csv=True)


def cmd_limit(args) -> None:
    grid = DirectionGrid(args.m)
    field = evaluate_w(simulate_bridge(grid, args.seed), grid, Lattice(args.radius, args.spacing))

    def csv():
        lines = ["z_x,z_y,w"]
        lines += [f"{format_float(x)},{format_float(y)},{format_float(w)}"
                  for (x, y), w in zip(field.points, field.w_values)]
        return "\n".join(lines) + "\n"

    _emit(args, field.summary(), csv)


def cmd_experiment(args) -> None:
    obj = _read_json(args.config)
    if args.seed is not None:
        obj = {**obj, "seed": args.seed}
    cfg = ExperimentConfig.from_dict(obj)
    res = run_experiment(cfg, threads=args.threads, budget_seconds=args.budget_seconds)
    payload = res.to_dict()
    kind = _out_kind(args.out)
    if kind is None:
        sys.stdout.write(_dumps(payload) + "\n")
        return
    text = res.to_csv() if kind == "csv" else _dumps(payload) + "\n"
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(_dumps({"kind": res.kind, "config_hash": res.config_hash,
                             "seed": res.seed, "summary": payload["summary"]}) + "\n")


# -- parser --------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="depthlab", allow_abbrev=False,
                                description="Halfspace depth, depth regions and Tukey medians.")
    p.add_argument("--version", action="version", version=f"depthlab {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, help_):
        return sub.add_parser(name, help=help_, allow_abbrev=False)

    def out(sp):
        sp.add_argument("--out", help="write to a .csv or .json file instead of stdout")

    sp = verb("depth", "depth of one point")
    sp.add_argument("--input", required=True)
    sp.add_argument("--point", required=True, help='coordinates, e.g. "0,0"')
    sp.add_argument("--n-dirs", type=_positive_int, default=1000,
                    help="sampled directions when d > 2")
    sp.add_argument("--seed", type=int, default=0)
    out(sp)
    sp.set_defaults(func=cmd_depth)

    sp = verb("median", "Tukey median and median set")
    sp.add_argument("--input", required=True)
    out(sp)
    sp.set_defaults(func=cmd_median)

    sp = verb("region", "depth region at one level")
    sp.add_argument("--input", required=True)
    sp.add_argument("--level", type=int, required=True)
    out(sp)
    sp.set_defaults(func=cmd_region)

    sp = verb("contour", "nested depth regions")
    sp.add_argument("--input", required=True)
    sp.add_argument("--levels", required=True, help='ascending levels, e.g. "1,2,3"')
    out(sp)
    sp.set_defaults(func=cmd_contour)

    sp = verb("sample", "draw from an elliptical model")
    sp.add_argument("--model", required=True, help="model JSON file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    out(sp)
    sp.set_defaults(func=cmd_sample)

    sp = verb("contaminate", "replace a fraction of a sample")
    sp.add_argument("--input", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--strategy", choices=(FAR_CLUSTER, SMEAR, REPLAY), default=FAR_CLUSTER)
    sp.add_argument("--radius", type=float, default=0.0)
    sp.add_argument("--direction", help='far_cluster direction, e.g. "1,0"')
    sp.add_argument("--replay", help="CSV of replacement points")
    sp.add_argument("--seed", type=int, default=0)
    out(sp)
    sp.set_defaults(func=cmd_contaminate)

    sp = verb("limit", "simulate the limiting depth process")
    sp.add_argument("--m", type=int, default=512, help="number of grid directions")
    sp.add_argument("--radius", type=float, default=8.0)
    sp.add_argument("--spacing", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    out(sp)
    sp.set_defaults(func=cmd_limit)

    sp = verb("experiment", "run a Monte Carlo experiment")
    sp.add_argument("--config", required=True, help="experiment config JSON")
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--threads", type=_positive_int, default=1)
    sp.add_argument("--budget-seconds", type=float, default=None)
    out(sp)
    sp.set_defaults(func=cmd_experiment)
    return p


RUNTIME_ERRORS = (CloudError, ModelError, PlanError, LevelError, ExperimentError,
                  BudgetExceeded, FactorizationError, geo.GeometryError, OSError, ValueError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        args.func(args)
    except UsageError as exc:
        print(f"depthlab {args.verb}: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"depthlab {args.verb}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
