"""Command line interface: ``rgbmesh <command> ...`` or ``python -m rgbmesh``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .coarsen import coarsen_marked_elements, coarsen_rgb, coarsen_to_initial
from .io import OVERLAYS, read_dat, render_svg, write_dat
from .marking import Circle, mark_circle, point_to_element
from .mesh import MeshError
from .quality import quality_report
from .refine import refine_rgb


def _read_points(path: str) -> np.ndarray:
    pts = np.loadtxt(path, ndmin=2, comments="#")
    if pts.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns per point")
    return pts


def _parse_circle(spec: str) -> Circle:
    try:
        cx, cy, r = (float(v) for v in spec.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad circle {spec!r}, expected cx,cy,r") from None
    return Circle((cx, cy), r)


def _refine_marks(mesh, mark: str):
    if mark == "all":
        return np.arange(mesh.n_elements)
    kind, _, arg = mark.partition(":")
    if kind == "circle":
        return mark_circle(mesh, _parse_circle(arg))
    if kind == "points":
        return point_to_element(mesh, _read_points(arg))
    raise argparse.ArgumentTypeError(f"unknown mark {mark!r}")


def cmd_refine(args):
    mesh = read_dat(args.mesh)
    out = refine_rgb(mesh, _refine_marks(mesh, args.mark))
    write_dat(out, args.out)
    print(f"refined: {mesh.n_elements} -> {out.n_elements} elements, {mesh.n_nodes} -> {out.n_nodes} nodes")
    return 0


def cmd_coarsen(args):
    mesh = read_dat(args.mesh)
    if args.mark == "all":
        out = coarsen_rgb(mesh, np.arange(mesh.n_nodes))
    elif args.mark.startswith("points:"):
        out = coarsen_marked_elements(mesh, point_to_element(mesh, _read_points(args.mark[7:])))
    else:
        raise argparse.ArgumentTypeError(f"unknown mark {args.mark!r}")
    write_dat(out, args.out)
    print(f"coarsened: {mesh.n_elements} -> {out.n_elements} elements, {mesh.n_nodes} -> {out.n_nodes} nodes")
    return 0


def cmd_recover(args):
    mesh = read_dat(args.mesh)
    out, steps = coarsen_to_initial(mesh, max_steps=args.max_steps)
    write_dat(out, args.out)
    print(f"M = {steps}")
    return 0


def cmd_check(args):
    mesh = read_dat(args.mesh)
    initial = coarsen_to_initial(mesh)[0] if args.similarity else None
    report = quality_report(mesh, weak_bdd=args.weak_bdd, initial=initial)
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.ok else 1


def cmd_demo_circle(args):
    initial = read_dat(args.mesh) if args.mesh else ex.strip4()
    frames = ex.run_moving_circle(initial, n_min=args.nmin, n_max=args.nmax, steps=args.steps,
                                  radius=args.radius)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for f in frames:
        (out / f"t{f.t}_refined.svg").write_text(render_svg(f.refined))
        write_dat(f.coarsened, out / f"t{f.t}_coarsened")
        print(f"t={f.t} center=({f.center[0]:.3f},{f.center[1]:.3f}) "
              f"refined_nodes={f.refined.n_nodes} coarsened_nodes={f.coarsened.n_nodes}")
    return 0


def cmd_ratios(args):
    initial = read_dat(args.mesh)
    circle = _parse_circle(args.circle) if args.circle else None
    sys.stdout.write(ex.run_ratio_experiment(initial, circle, args.levels).to_csv())
    return 0


def cmd_bench(args):
    sizes = [int(float(s)) for s in args.sizes.split(",")]
    print("n_nodes,mean_seconds")
    for n, t in ex.run_scalability(sizes, repeats=args.repeat):
        print(f"{n},{t:.6g}")
    return 0


def cmd_render(args):
    mesh = read_dat(args.mesh)
    overlays = [o for o in args.overlay.split(",") if o] if args.overlay else []
    Path(args.svg).write_text(render_svg(mesh, overlays))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rgbmesh", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("refine", help="refine marked elements")
    s.add_argument("--mesh", required=True)
    s.add_argument("--mark", required=True, help="all | circle:cx,cy,r | points:FILE")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_refine)

    s = sub.add_parser("coarsen", help="coarsen at marked nodes")
    s.add_argument("--mesh", required=True)
    s.add_argument("--mark", required=True, help="all | points:FILE")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_coarsen)

    s = sub.add_parser("recover", help="coarsen repeatedly back to the initial mesh")
    s.add_argument("--mesh", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--max-steps", type=int, default=None)
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("check", help="print a quality report as JSON")
    s.add_argument("--mesh", required=True)
    s.add_argument("--weak-bdd", action="store_true")
    s.add_argument("--similarity", action="store_true")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("demo-circle", help="moving circle refine/coarsen loop")
    s.add_argument("--nmin", type=int, required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--mesh", default=None, help="initial mesh directory (default: 2x1 strip)")
    s.add_argument("--radius", type=float, default=ex.DEFAULT_RADIUS)
    s.set_defaults(func=cmd_demo_circle)

    s = sub.add_parser("ratios", help="refinement/coarsening ratio tables as CSV")
    s.add_argument("--mesh", required=True)
    s.add_argument("--levels", type=int, required=True)
    s.add_argument("--circle", default=None, help="cx,cy,r (default 0.759,0.545,0.3)")
    s.set_defaults(func=cmd_ratios)

    s = sub.add_parser("bench", help="time coarsen-all passes")
    s.add_argument("--sizes", default="1e3,1e4,1e5")
    s.add_argument("--repeat", type=int, default=20)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("render", help="write an SVG picture")
    s.add_argument("--mesh", required=True)
    s.add_argument("--svg", required=True)
    s.add_argument("--overlay", default="", help=f"comma list from {','.join(OVERLAYS)}")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MeshError, ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
