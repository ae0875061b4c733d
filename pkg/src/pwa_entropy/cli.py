"""Command-line front end: ``pwa-entropy <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 data or invariant failure, 4 cover
verification failure, 5 depth cap exceeded.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from gmpy2 import mpq

from . import reporting as rep
from .conformal import run_contrast
from .entropy import METHODS, PLACEMENTS, entropy_report, dyadic_cover
from .errors import (
    CoverageFailure,
    DepthCapExceeded,
    EmptyCandidateSet,
    InvariantViolation,
    OrbitTruncated,
    ParameterOutOfRange,
    SchemaError,
)
from .geometry import Metric, Point, format_rational, parse_rational
from .orbits import attractor_profile, lyapunov_batch, orbit
from .pwa import A, B, build_rhombus, describe, load_map
from .symbolic import DEFAULT_DEPTH_CAP, iter_partitions

EXIT_USAGE, EXIT_DATA, EXIT_COVER, EXIT_DEPTH = 2, 3, 4, 5

# lets "--x -1/2" parse as a value rather than an option
_NEGATIVE_RATIONAL = re.compile(r"^-\d+(/\d+)?$")


def rational(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def method_list(text):
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {','.join(METHODS)}")
    return items


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults, except the uninformative ``None``."""

    def _get_help_string(self, action):
        if action.default is None:
            return action.help
        return super()._get_help_string(action)


class Run:
    """Collects outputs for one invocation and writes the manifest."""

    def __init__(self, args):
        self.args = args
        params = {k: (format_rational(v) if isinstance(v, type(mpq(0))) else v)
                  for k, v in sorted(vars(args).items()) if k not in ("func",)}
        self.manifest = rep.RunManifest(args.command, params)

    def emit(self, path, text):
        if path is None:
            return
        if path == "-":
            sys.stdout.write(text)
            self.manifest.outputs.append("<stdout>")
        else:
            Path(path).write_text(text)
            self.manifest.outputs.append(str(path))

    @property
    def quiet(self):
        a = self.args
        return any(getattr(a, k, None) == "-" for k in ("csv", "json", "svg", "partition_csv"))

    def say(self, text):
        if not self.quiet:
            print(text)

    def finish(self):
        doc = rep.json_text(self.manifest.to_dict())
        target = self.args.manifest
        if target is None:
            files = [o for o in self.manifest.outputs if o != "<stdout>"]
            target = files[0] + ".manifest.json" if files else None
        if target is not None:
            Path(target).write_text(doc)


def _map_from_args(args, run):
    if getattr(args, "map", None) is not None:
        try:
            text = Path(args.map).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read {args.map}: {exc}") from None
        m = load_map(text)
    else:
        m = build_rhombus(args.t, Metric(getattr(args, "metric", "l1")))
    run.manifest.map_hash = rep.map_hash(m)
    return m


def cmd_info(args, run):
    m = _map_from_args(args, run)
    info = describe(m)
    run.emit(args.json, rep.json_text(info))
    lines = [f"metric {info['metric']}, lipschitz {info['lipschitz']} ({info['verdict']})"]
    for p in info["pieces"]:
        lines.append(f"  {p['label']}: linear {p['linear']} offset {p['offset']} "
                     f"|L|_1={p['norm_l1']} |L|_inf={p['norm_linf']} "
                     f"sv_l2={p['singular_values_l2']} conformal={p['conformal']}")
    run.say("\n".join(lines))


def cmd_cells(args, run):
    m = _map_from_args(args, run)
    parts = list(iter_partitions(m, args.n_max, args.depth_cap, args.threads))
    counts = [(p.depth, len(p.cells)) for p in parts]
    run.emit(args.csv, rep.csv_text(["n", "count", "rate"], rep.cells_rows(counts)))
    if args.partition_csv:
        rows = [r for p in parts for r in rep.partition_rows(m, p)]
        run.emit(args.partition_csv, rep.csv_text(["depth", "itinerary", "area", "vertices"], rows))
    if args.svg:
        run.emit(args.svg, rep.partition_svg(m, parts[-1], title=f"depth {args.n_max}"))
    run.say("\n".join(f"n={n}: {c} cells" for n, c in counts))


def cmd_entropy(args, run):
    m = _map_from_args(args, run)
    report = entropy_report(m, args.n_max, args.eps, args.mesh, args.methods, args.n_min,
                            args.sep_eps, args.depth_cap, args.threads)
    run.emit(args.csv, rep.csv_text(["method", "n", "count", "rate", "residual"], rep.entropy_rows(report)))
    run.emit(args.json, rep.json_text(rep.entropy_json(report)))
    lines = []
    for k, s in report.series.items():
        lines.append(f"{k}: counts {[c for _, c in s.counts]} last-rate {s.last_rate:.6f} "
                     f"slope {s.fit.slope:.6f} residual {s.fit.residual:.3g}")
    run.say("\n".join(lines))


def cmd_orbit(args, run):
    m = _map_from_args(args, run)
    res = orbit(m, Point(args.x, args.y), args.steps)
    run.emit(args.csv, rep.csv_text(["step", "x", "y", "piece"], rep.orbit_rows(m, res)))
    if args.svg:
        run.emit(args.svg, rep.orbit_svg(m, res.points, (A, B)))
    run.say(f"status {res.status.value}; " + " -> ".join(str(p) for p in res.points))


def cmd_lyapunov(args, run):
    m = _map_from_args(args, run)
    batch = lyapunov_batch(m, args.samples, args.steps, args.seed)
    rows = [[k, e.n, rep.fmt_float(e.value), rep.fmt_float(e.bound)] for k, e in batch]
    run.emit(args.csv, rep.csv_text(["sample", "n", "value", "bound"], rows))
    if batch:
        worst = max(e.value for _, e in batch)
        run.say(f"{len(batch)} complete orbits; max exponent {worst:.6f}; bound {batch[0][1].bound:.6f}")
    else:
        run.say("no complete orbits")


def cmd_attractor(args, run):
    m = _map_from_args(args, run)
    prof = attractor_profile(m, args.samples, args.steps, args.seed)
    rows = [[i, format_rational(d)] for i, d in prof.max_distance]
    run.emit(args.csv, rep.csv_text(["step", "max_dist"], rows))
    run.say(f"{prof.sample_count} samples, {prof.truncated} truncated; "
            f"final max distance {float(prof.max_distance[-1][1]):.3e}")


def cmd_cover(args, run):
    metric = Metric(args.metric)
    run.manifest.map_hash = rep.map_hash(build_rhombus(args.t, metric))
    n_min = args.n if args.n_min is None else args.n_min
    rows, last, failure = [], None, None
    for n in range(n_min, args.n + 1):
        try:
            est = dyadic_cover(args.t, n, args.eps, args.per_triangle, args.mesh, args.depth_cap, metric,
                              args.placement)
        except CoverageFailure as exc:
            count = args.per_triangle * 2 ** (n + 1)
            rows.append([n, count, rep.fmt_float(float(args.eps) + exc.gap), "false"])
            failure = failure or exc
            continue
        rows.append([n, est.count, rep.fmt_float(est.max_radius), "true"])
        last = est
    run.emit(args.csv, rep.csv_text(["n", "centers", "max_radius", "verified"], rows))
    if args.svg and last is not None:
        m = build_rhombus(args.t, metric)
        part = list(iter_partitions(m, last.n, args.depth_cap))[-1]
        run.emit(args.svg, rep.partition_svg(m, part, last.centers))
    run.say("\n".join(f"n={r[0]}: {r[1]} centers, max radius {r[2]}, verified {r[3]}" for r in rows))
    if failure is not None:
        raise failure


def cmd_contrast(args, run):
    report = run_contrast(args.depth, args.estimator_depth, args.mesh)
    run.emit(args.json, rep.json_text(rep.contrast_json(report)))
    run.emit(args.csv, rep.csv_text(["experiment", "method", "n", "count", "rate"], rep.contrast_rows(report)))
    if args.svg:
        from .conformal import builtin_conformal_map

        n = min(args.depth, 6)
        docs = []
        for m in (builtin_conformal_map(), build_rhombus(mpq(1, 2))):
            part = list(iter_partitions(m, n))[-1]
            docs.append(rep.partition_svg(m, part))
        run.emit(args.svg, rep.side_by_side_svg(*docs))
    lines = []
    for e in report.experiments:
        lines.append(f"{e.name}: conformal={e.conformal} rates "
                     + ", ".join(f"{k}={v:.4f}" for k, v in e.rates.items())
                     + f" verdicts {e.verdicts}")
    lines.append("contrast " + ("holds" if report.passed else "does not hold"))
    run.say("\n".join(lines))


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    parser = argparse.ArgumentParser(
        prog="pwa-entropy", formatter_class=fmt,
        description="Exact partitions, entropy estimates, orbits and covers for piecewise affine maps.",
        epilog="exit codes: 0 success, 2 usage, 3 data or invariant failure, "
               "4 cover verification failure, 5 depth cap exceeded")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, source="t"):
        p = sub.add_parser(name, help=help_text, description=help_text, formatter_class=fmt)
        p._negative_number_matcher = _NEGATIVE_RATIONAL
        if source == "t-or-map":
            g = p.add_mutually_exclusive_group(required=True)
            g.add_argument("--t", type=rational, help="rhombus side parameter p/q in (0,1)")
            g.add_argument("--map", help="JSON map file")
        elif source == "t":
            p.add_argument("--t", type=rational, default=mpq(1, 2), help="rhombus side parameter p/q in (0,1)")
        p.add_argument("--manifest", help="manifest path; by default written next to the first output file")
        p.add_argument("--threads", type=int, default=1, help="worker threads for partition refinement")
        p.set_defaults(func=func)
        return p

    def metric_flag(p, help_text="plane metric for --t maps (a --map file carries its own)"):
        p.add_argument("--metric", choices=[m.value for m in Metric], default="l1", help=help_text)

    def depth_cap_flag(p):
        p.add_argument("--depth-cap", type=int, default=DEFAULT_DEPTH_CAP, help="largest depth allowed")

    p = command("info", cmd_info, "print the pieces, norms and contraction verdict", "t-or-map")
    metric_flag(p)
    p.add_argument("--json", help="write JSON ('-' for stdout)")

    p = command("cells", cmd_cells, "count refined-partition cells per depth", "t-or-map")
    p.add_argument("--n-max", type=int, default=5, help="deepest refinement")
    depth_cap_flag(p)
    p.add_argument("--csv", help="n,count,rate table ('-' for stdout)")
    p.add_argument("--partition-csv", help="depth,itinerary,area,vertices for every cell")
    p.add_argument("--svg", help="render the deepest partition")

    p = command("entropy", cmd_entropy, "entropy estimates by several methods", "t-or-map")
    metric_flag(p)
    p.add_argument("--n-max", type=int, default=8, help="last depth")
    p.add_argument("--n-min", type=int, default=1, help="first depth")
    p.add_argument("--eps", type=rational, default=mpq(1, 2), help="spanning radius")
    p.add_argument("--sep-eps", type=rational, default=None, help="separation radius; 2*eps when omitted")
    p.add_argument("--mesh", type=rational, default=mpq(1, 64), help="candidate grid pitch")
    p.add_argument("--methods", type=method_list, default="cells,transition",
                   help="comma list from " + ",".join(METHODS))
    depth_cap_flag(p)
    p.add_argument("--csv", help="method,n,count,rate,residual table ('-' for stdout)")
    p.add_argument("--json", help="full report ('-' for stdout)")

    p = command("orbit", cmd_orbit, "exact orbit of one point", "t-or-map")
    p.add_argument("--x", type=rational, required=True, help="start x as p/q")
    p.add_argument("--y", type=rational, required=True, help="start y as p/q")
    p.add_argument("--steps", type=int, default=10, help="iterations")
    p.add_argument("--csv", help="step,x,y,piece table ('-' for stdout)")
    p.add_argument("--svg", help="draw the orbit")

    p = command("lyapunov", cmd_lyapunov, "norm-growth Lyapunov estimates along seeded orbits")
    p.add_argument("--samples", type=int, default=100, help="number of seeded starts")
    p.add_argument("--steps", type=int, default=200, help="orbit length")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--csv", help="sample,n,value,bound table ('-' for stdout)")

    p = command("attractor", cmd_attractor, "distance of seeded orbits to {A, B}")
    p.add_argument("--samples", type=int, default=1000, help="number of seeded starts")
    p.add_argument("--steps", type=int, default=50, help="orbit length")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--csv", help="step,max_dist table ('-' for stdout)")

    p = command("cover", cmd_cover, "verify the dyadic-triangle cover")
    metric_flag(p, "plane metric under the Bowen distance")
    p.add_argument("--n", type=int, default=6, help="depth (last depth when --n-min is given)")
    p.add_argument("--n-min", type=int, default=None, help="first depth of a range")
    p.add_argument("--eps", type=rational, default=mpq(1, 2), help="cover radius")
    p.add_argument("--per-triangle", type=int, default=2, help="centers per dyadic triangle")
    p.add_argument("--placement", choices=PLACEMENTS, default="l1",
                   help="center layout: l1-adapted slabs or points on the apex median")
    p.add_argument("--mesh", type=rational, default=mpq(1, 128), help="verification grid pitch")
    depth_cap_flag(p)
    p.add_argument("--csv", help="n,centers,max_radius,verified table ('-' for stdout)")
    p.add_argument("--svg", help="draw the last verified cover")

    p = command("contrast", cmd_contrast, "conformal contraction versus the rhombus map", None)
    p.add_argument("--depth", type=int, default=12, help="depth of the exact routes")
    p.add_argument("--estimator-depth", type=int, default=6, help="depth of the grid estimators")
    p.add_argument("--mesh", type=rational, default=mpq(1, 32), help="grid estimator pitch")
    p.add_argument("--json", help="full report ('-' for stdout)")
    p.add_argument("--csv", help="experiment,method,n,count,rate table ('-' for stdout)")
    p.add_argument("--svg", help="side-by-side depth-6 partitions")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run = Run(args)
    try:
        args.func(args, run)
    except ParameterOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, InvariantViolation, EmptyCandidateSet, OrbitTruncated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CoverageFailure as exc:
        run.finish()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COVER
    except DepthCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPTH
    run.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
