"""``yieldcrit`` command-line front end.

    yieldcrit solve   --geometry PATH --n INT --mode single|multi [--tol F] [--max-iters I] [--out DIR]
    yieldcrit sweep   --geometry PATH --n INT [--fractions 0.25,0.5,0.75,0.9 | --Y y1,y2,...]
    yieldcrit scale   --tau-y F --mu-f F --rho-s F --rho-f F --g F --L-hat F [--geometry PATH --n INT]
    yieldcrit analyze --geometry PATH --n INT --cells CELLS.csv

``--geometry`` takes a JSON spec file or ``corpus:NAME`` for a built-in shape.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import corpus, io
from .analysis import histogram
from .flow import PhysicalScales, buoyancy_number, sweep_to_critical
from .grid import DomainMasks, GeometryError, build_grid, rasterize
from .projections import ConstraintMode
from .solver import SolverConfig, SolverError, compute_yc, solve

DEFAULT_FRACTIONS = "0.25,0.5,0.75,0.9"


class CLIError(Exception):
    pass


def _floats(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def load_masks(geometry: str, n: int) -> DomainMasks:
    if geometry.startswith("corpus:"):
        try:
            spec, margin = corpus.by_name(geometry[len("corpus:"):]), 1
        except KeyError as e:
            raise CLIError(e.args[0]) from None
    else:
        spec, margin = io.load_geometry(geometry)
    return rasterize(spec, build_grid(n), margin=margin)


def solver_config(args) -> SolverConfig:
    kw = {}
    for name in ("tol", "max_iters", "tau", "sigma"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    return SolverConfig(**kw)


def _header(command, args, masks):
    return [
        f"# yieldcrit {command}",
        f"geometry = {args.geometry}",
        f"n = {masks.grid.n}",
        f"components = {masks.n_components}",
        f"solid_area = {io.fmt(masks.solid_area)}",
        f"fluid_area = {io.fmt(masks.fluid_area)}",
    ]


def run_solve(args) -> int:
    masks = load_masks(args.geometry, args.n)
    mode = ConstraintMode.parse(args.mode)
    sol = solve(masks, mode, solver_config(args))
    out = io.ensure_dir(args.out)
    lines = _header("solve", args, masks) + [
        f"mode = {mode.value}",
        f"Y_c = {io.fmt(sol.yc)}",
        f"TV = {io.fmt(sol.tv)}",
        f"iterations = {sol.iterations}",
        f"converged = {str(sol.converged).lower()}",
        f"mean_residual = {io.fmt(sol.mean)}",
        f"normalization_residual = {io.fmt(sol.normalization_residual)}",
    ]
    if not args.no_pgm:
        offset, step = io.write_field_pgm(out / "field.pgm", sol.v)
        lines += ["raster = field.pgm", f"raster_offset = {io.fmt(offset)}", f"raster_step = {io.fmt(step)}"]
    if not args.no_csv:
        io.write_cells_csv(out / "cells.csv", sol.v, masks.labels)
    lines += [""] + io.quantization_lines(sol.v, masks)
    if not args.no_report:
        io.write_text(out / "report.txt", lines)
    print(f"Y_c = {io.fmt(sol.yc)}")
    if not sol.converged:
        print(f"warning: not converged after {sol.iterations} iterations", file=sys.stderr)
    return 0


def run_sweep(args) -> int:
    masks = load_masks(args.geometry, args.n)
    cfg = solver_config(args)
    yc = solve(masks, ConstraintMode.parse(args.mode), cfg).yc
    Ys = args.Y if args.Y is not None else [f * yc for f in args.fractions]
    if not Ys:
        raise CLIError("no sweep points")
    res = sweep_to_critical(masks, sorted(Ys), cfg, yc=yc, max_workers=args.workers)
    out = io.ensure_dir(args.out)
    io.write_sweep_csv(out / "sweep.csv", res.rows)
    lines = _header("sweep", args, masks) + [f"Y_c = {io.fmt(yc)}",
                                             f"tv_nonincreasing = {str(res.tv_nonincreasing).lower()}", ""]
    for k, s in enumerate(res.solutions):
        name = f"profile_{k:02d}.pgm"
        offset, step = io.write_field_pgm(out / name, s.omega)
        lines.append(f"{name} Y = {io.fmt(s.Y)} offset = {io.fmt(offset)} step = {io.fmt(step)} "
                     f"converged = {str(s.converged).lower()}")
    io.write_text(out / "sweep_report.txt", lines)
    for r in res.rows:
        print(f"Y = {io.fmt(r.Y)} tv = {io.fmt(r.tv)} rate_bound_ok = {str(r.rate_bound_ok).lower()}")
    return 0


def run_scale(args) -> int:
    scales = PhysicalScales(args.tau_y, args.mu_f, args.rho_s, args.rho_f, args.g, args.L_hat)
    Y, omega0 = buoyancy_number(scales)
    print(f"Y = {io.fmt(Y)}")
    print(f"omega0 = {io.fmt(omega0)}")
    if args.geometry:
        if args.n is None:
            raise CLIError("--n is required together with --geometry")
        masks = load_masks(args.geometry, args.n)
        yc = solve(masks, ConstraintMode.parse(args.mode), solver_config(args)).yc
        print(f"Y_c = {io.fmt(yc)}")
        print(verdict(Y, yc))
    return 0


def verdict(Y, yc) -> str:
    if Y >= yc:
        return "SETTLED"
    return f"FLOWING (Y_c - Y = {io.fmt(yc - Y)})"


def run_analyze(args) -> int:
    masks = load_masks(args.geometry, args.n)
    v, labels = io.read_cells_csv(args.cells)
    if v.shape != masks.grid.shape:
        raise CLIError(f"{args.cells}: {v.shape[0]}x{v.shape[1]} cells, geometry has n={masks.grid.n}")
    if not np.array_equal(labels, masks.labels):
        raise CLIError(f"{args.cells}: cell classes do not match the geometry")
    out = io.ensure_dir(args.out)
    centers, counts = histogram(v, args.bins)
    io.write_histogram_csv(out / "histogram.csv", centers, counts)
    lines = _header("analyze", args, masks) + [f"cells = {args.cells}",
                                               f"Y_c = {io.fmt(compute_yc(v, masks))}", ""]
    lines += io.quantization_lines(v, masks)
    io.write_text(out / "analysis.txt", lines)
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="yieldcrit", description="Critical yield number of rigid particles in a Bingham fluid.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, geometry_required=True, mode="single"):
        sp.add_argument("--geometry", required=geometry_required, help="JSON spec or corpus:NAME")
        sp.add_argument("--n", type=int, required=geometry_required)
        sp.add_argument("--mode", choices=[m.value for m in ConstraintMode], default=mode,
                        help="particle constraint (default %(default)s)")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--max-iters", type=int, dest="max_iters")
        sp.add_argument("--tau", type=float)
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--out", default=".")

    s = sub.add_parser("solve", help="solve the limit problem and write field, cells and report")
    common(s)
    s.add_argument("--no-pgm", action="store_true")
    s.add_argument("--no-csv", action="store_true")
    s.add_argument("--no-report", action="store_true")
    s.set_defaults(func=run_solve)

    s = sub.add_parser("sweep", help="viscous flow at several yield numbers below/above Y_c")
    # the flow's critical number is the per-particle one
    common(s, mode="multi")
    s.add_argument("--fractions", type=_floats, default=_floats(DEFAULT_FRACTIONS),
                   help="multiples of Y_c (default %(default)s)")
    s.add_argument("--Y", type=_floats, default=None, help="absolute yield numbers (overrides --fractions)")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=run_sweep)

    s = sub.add_parser("scale", help="buoyancy number from physical parameters")
    common(s, geometry_required=False, mode="multi")
    for name in ("tau-y", "mu-f", "rho-s", "rho-f", "g", "L-hat"):
        s.add_argument(f"--{name}", type=float, required=True, dest=name.replace("-", "_"))
    s.set_defaults(func=run_scale)

    s = sub.add_parser("analyze", help="quantisation and histogram of a saved cell dump")
    common(s)
    s.add_argument("--cells", required=True)
    s.add_argument("--bins", type=int, default=64)
    s.set_defaults(func=run_analyze)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, GeometryError, SolverError, ValueError, OSError) as e:
        print(f"yieldcrit: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
