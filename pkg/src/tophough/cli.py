"""Command-line interface: ``tophough {detect,generate,diagram,benchmark}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .detect import detect
from .geometry import KernelSpec, NormalizationMode
from .io import PointFormatError, points_csv, read_points, write_atomic
from .persistence import (
    SelectionPolicy,
    build_nerve,
    compute_persistence,
    diagram_csv,
    lines_json,
)
from .scenes import LineSpec, SceneGenerationError, demo_scene, gen_scene
from .subdivision import CellField, OutsideDomainError
from .svg import diagram_svg, scene_svg

EXIT_USAGE = 2


class CliError(Exception):
    pass


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return x


def _counts(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("point counts must be >= 1")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tophough", description="Line detection by persistent local maxima of a "
                                "kernel score over line space.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect lines in a point file (CSV or JSON)")
    d.add_argument("input", help="points: CSV rows 'x,y' or a JSON array of [x, y] pairs")
    d.add_argument("--kernel", choices=["hat", "rbf"], default="hat")
    d.add_argument("--sigma", type=_positive, required=True, help="kernel width in input units")
    d.add_argument("--epsilon", type=_positive, required=True, help="approximation error budget in score units")
    d.add_argument("--mode", choices=["mean", "sum"], default="mean", help="score normalisation (default mean)")
    pol = d.add_mutually_exclusive_group(required=True)
    pol.add_argument("--top-k", type=int, help="keep the k most persistent maxima")
    pol.add_argument("--alpha", type=float, help="keep maxima with persistence >= alpha")
    d.add_argument("--max-depth", type=int, default=30)
    d.add_argument("--out-lines", default="lines.json")
    d.add_argument("--out-diagram", default="diagram.csv")
    d.add_argument("--out-field", help="also cache the cell field as JSON")
    d.add_argument("--svg", help="write points and detected lines as SVG")
    d.add_argument("--diagram-svg", help="write the persistence diagram as SVG")

    g = sub.add_parser("generate", help="generate a synthetic scene")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--demo", action="store_true", help="the fixed three-line demo scene (18/12/8 points)")
    g.add_argument("--lines", type=int, help="number of random lines")
    g.add_argument("--points", type=_counts, help="points per line, comma separated")
    g.add_argument("--noise", type=float, default=0.0, help="orthogonal noise half-width")
    g.add_argument("--extent", type=_positive, default=32.0, help="side of the square image")
    g.add_argument("--index", type=int, default=0, help="scene index within the seed's stream")
    g.add_argument("--out", default="scene.json", help="scene JSON, or point CSV if the name ends in .csv")
    g.add_argument("--svg", help="write the scene as SVG")

    m = sub.add_parser("diagram", help="persistence diagram of a cached cell field")
    m.add_argument("field", help="cell field JSON written by 'detect --out-field'")
    m.add_argument("--out", default="diagram.csv")
    m.add_argument("--svg")
    m.add_argument("--no-twist", action="store_true", help="disable the theta=0/pi gluing (debugging)")

    b = sub.add_parser("benchmark", help="run one of the evaluation studies")
    b.add_argument("study", choices=["gap", "quality", "sigma-sweep", "eps-sweep"])
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--trials", type=int, help="trials (gap, quality) or trials per configuration (sweeps)")
    b.add_argument("--out-dir", default=".")
    return p


def _policy(args) -> SelectionPolicy:
    try:
        return SelectionPolicy(top_k=args.top_k, alpha=args.alpha)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_detect(args) -> int:
    policy = _policy(args)
    pts = read_points(args.input)
    mode = NormalizationMode(args.mode)
    det = detect(pts, KernelSpec(args.kernel, args.sigma), args.epsilon, policy, mode, max_depth=args.max_depth)
    outputs = {
        args.out_lines: lines_json(det.lines) + "\n",
        args.out_diagram: diagram_csv(det.pairs, det.field, det.cloud),
    }
    if args.out_field:
        outputs[args.out_field] = det.field.to_json() + "\n"
    if args.svg:
        outputs[args.svg] = scene_svg(pts, [d.line for d in det.lines], title=Path(args.input).name)
    if args.diagram_svg:
        outputs[args.diagram_svg] = diagram_svg([q.birth for q in det.pairs], [q.death for q in det.pairs])
    for path, text in outputs.items():
        write_atomic(path, text)
    for d in det.lines:
        print(f"r={d.line.r:.6g} theta={d.line.theta:.6g} score={d.score:.6g} persistence={d.persistence:.6g}")
    return 0


def cmd_generate(args) -> int:
    if args.demo:
        if args.lines is not None or args.points is not None:
            raise CliError("--demo fixes the lines; drop --lines/--points")
        scene = demo_scene(args.seed)
    else:
        if args.points is None:
            raise CliError("--points is required unless --demo is given")
        counts = args.points
        if args.lines is not None and len(counts) == 1:
            counts = counts * args.lines
        if args.lines is not None and len(counts) != args.lines:
            raise CliError(f"--lines {args.lines} does not match {len(counts)} point counts")
        if args.noise < 0:
            raise CliError("--noise must be >= 0")
        specs = [LineSpec(n, args.noise) for n in counts]
        scene = gen_scene(specs, args.extent, args.seed, args.index)
    text = points_csv(scene.points) if args.out.lower().endswith(".csv") else scene.to_json() + "\n"
    write_atomic(args.out, text)
    if args.svg:
        write_atomic(args.svg, scene_svg(scene.points, scene.truth_lines, title=f"seed {args.seed}"))
    print(f"{len(scene.points)} points on {len(scene.truth)} lines -> {args.out}")
    return 0


def cmd_diagram(args) -> int:
    try:
        field = CellField.from_json(Path(args.field).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {args.field}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{args.field} is not a cell field: {exc}") from None
    pairs = compute_persistence(build_nerve(field, twisted=not args.no_twist))
    write_atomic(args.out, diagram_csv(pairs, field))
    if args.svg:
        write_atomic(args.svg, diagram_svg([q.birth for q in pairs], [q.death for q in pairs]))
    print(f"{len(pairs)} pairs -> {args.out}")
    return 0


def cmd_benchmark(args) -> int:
    kw = {"seed": args.seed}
    if args.trials is not None:
        if args.trials < 1:
            raise CliError("--trials must be >= 1")
        key = "n_trials" if args.study in ("gap", "quality") else "trials_per_cfg"
        kw[key] = args.trials
    run = {
        "gap": experiments.gap_experiment,
        "quality": experiments.quality_experiment,
        "sigma-sweep": experiments.sigma_sweep,
        "eps-sweep": experiments.eps_sweep,
    }[args.study]
    rows, summary = run(**kw)
    raw, summ = experiments.write_outputs(args.out_dir, args.study, rows, summary)
    print(f"{raw}\n{summ}")
    return 0


COMMANDS = {"detect": cmd_detect, "generate": cmd_generate, "diagram": cmd_diagram, "benchmark": cmd_benchmark}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CliError, PointFormatError, SceneGenerationError, OutsideDomainError, ValueError) as exc:
        print(f"tophough {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
