"""
Command-line front end: ``psispace gen|dist|member|converge|scan``.

Exit codes: 0 success or member, 1 non-member, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import fileio, manifolds, metrics, neighborhoods, scanning
from .regions import Ball, Box

EXIT_OK, EXIT_NONMEMBER, EXIT_ERROR = 0, 1, 2

CONVERGE_HEADER = "delta,d_H,d_nu,d_psi,scan,gs_member,ls_member"


class UsageError(ValueError):
    pass


def _floats(text, what):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _axis(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid axis must be a:b:s, got {text!r}")
    try:
        a, b, s = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid axis must be a:b:s, got {text!r}") from None
    return a, b, s


def _grid(specs, n):
    """One ``a:b:s`` per axis, or a single one repeated on every axis."""
    if not specs:
        return scanning.default_grid(n)
    axes = [_axis(t) for t in specs]
    if len(axes) == 1:
        axes *= n
    if len(axes) != n:
        raise UsageError(f"--grid given {len(axes)} axes for ambient dimension {n}")
    return scanning.box_grid(axes)


def _region(args, n):
    if args.kbox is not None and (args.center is not None or args.kradius is not None):
        raise UsageError("give either --kbox or --center/--kradius, not both")
    if args.kradius is not None or args.center is not None:
        if args.kradius is None or not args.kradius > 0:
            raise UsageError("--kradius must be a positive number")
        center = _floats(args.center, "--center") if args.center else [0.0] * n
        if len(center) != n:
            raise UsageError(f"--center needs {n} coordinates")
        return Ball(center, args.kradius)
    bounds = _floats(args.kbox, "--kbox") if args.kbox else [-1.0, 1.0]
    if len(bounds) != 2:
        raise UsageError("--kbox needs exactly two numbers lo,hi")
    lo, hi = bounds
    if not hi > lo:
        raise UsageError("--kbox needs lo < hi")
    return Box([lo] * n, [hi] * n)


def _load(path):
    return fileio.load(path)


def _unlabeled(W):
    return W.base if isinstance(W, manifolds.LabeledSubmanifold) else W


def _fmt(x):
    return repr(float(x))


# gen


def cmd_gen(args):
    kind = args.kind
    if kind == "circle":
        W = manifolds.circle(args.radius, count=args.samples)
    elif kind == "sphere":
        W = manifolds.sphere(args.ambient, args.radius, args.samples, seed=args.seed)
    elif kind in ("affine-plane", "line"):
        d = 1 if kind == "line" else args.dim
        W = manifolds.affine_plane(args.ambient, d, extent=args.extent, count=args.samples)
    elif kind == "graph":
        W = manifolds.graph_of_function(
            2, 1, offset=[args.offset], linear=[[args.slope]], quadratic=[[[args.curvature]]],
            extent=args.extent, count=args.samples,
        )
    elif kind == "torus":
        W = manifolds.torus((args.radius, args.minor_radius), (args.samples, args.minor_samples))
    elif kind == "empty":
        W = manifolds.empty(args.ambient, args.dim)
    elif kind in ("parallel-copies", "perturb"):
        if args.base is None or args.delta is None:
            raise UsageError(f"gen {kind} needs --base and --delta")
        base = _unlabeled(_load(args.base))
        if kind == "parallel-copies":
            W = manifolds.parallel_copies(base, args.delta)
        else:
            W = manifolds.perturb_normal(base, args.delta, mode=args.mode)
    else:
        raise UsageError(f"unknown generator {kind!r}")
    fileio.save(W, args.output)
    print(f"samples={len(W)} total_weight={_fmt(W.total_weight())}")
    return EXIT_OK


# dist


def cmd_dist(args):
    W, W2 = _unlabeled(_load(args.a)), _unlabeled(_load(args.b))
    if (W.ambient_dim, W.intrinsic_dim) != (W2.ambient_dim, W2.intrinsic_dim):
        raise ValueError(
            f"dimension mismatch: (n={W.ambient_dim}, d={W.intrinsic_dim}) vs "
            f"(n={W2.ambient_dim}, d={W2.intrinsic_dim})"
        )
    if args.metric == "scan":
        value = scanning.scan_metric(W, W2, _grid(args.grid, W.ambient_dim), args.rho)
        print("scan")
        print(_fmt(value))
        return EXIT_OK
    rep = metrics.gr_w_distance(W, W2, args.grid_points, args.rmax, args.threads)
    print(metrics.DistanceReport.HEADER)
    print(rep.csv_row())
    return EXIT_OK


# member


_TESTS = {
    "gs": neighborhoods.in_gs_neighborhood,
    "ls": neighborhoods.in_ls_neighborhood,
    "ms": neighborhoods.in_ms_neighborhood,
    "ss": neighborhoods.in_ss_neighborhood,
}


def cmd_member(args):
    W, W2 = _load(args.a), _load(args.b)
    if args.kind in ("gs", "ls"):
        W, W2 = _unlabeled(W), _unlabeled(W2)
    n = (W.base if isinstance(W, manifolds.LabeledSubmanifold) else W).ambient_dim
    spec = neighborhoods.NeighborhoodSpec(_region(args, n), args.eps, args.label_eps)
    report = _TESTS[args.kind](W, W2, spec)
    print(report.to_text())
    print(f"member: {'yes' if report.member else 'no'}")
    return EXIT_OK if report.member else EXIT_NONMEMBER


# converge


def _family(base, family, delta):
    if family == "normal":
        return manifolds.perturb_normal(base, delta)
    if family == "parallel-copies":
        return manifolds.parallel_copies(base, delta)
    if family == "tilt":
        return manifolds.perturb_normal(base, delta, mode="tilt")
    raise UsageError(f"unknown family {family!r}")


def converge_rows(base, family, deltas, spec, grid_points=512, r_max=None, workers=1, scan_grid=None, rho=1.0):
    """One row per delta: ``(delta, d_H, d_nu, d_psi, scan, gs_member, ls_member)``."""
    rows = []
    for delta in deltas:
        W2 = _family(base, family, delta)
        rep = metrics.gr_w_distance(base, W2, grid_points, r_max, workers)
        scan = scanning.scan_metric(base, W2, scan_grid, rho)
        gs = neighborhoods.in_gs_neighborhood(base, W2, spec).member
        ls = neighborhoods.in_ls_neighborhood(base, W2, spec).member
        rows.append((delta, rep.d_H, rep.d_nu, rep.d_psi, scan, gs, ls))
    return rows


def cmd_converge(args):
    if args.family not in ("normal", "parallel-copies", "tilt"):
        raise UsageError(f"unknown family {args.family!r}")
    deltas = _floats(args.deltas, "--deltas")
    if not deltas or any(not (d > 0 and math.isfinite(d)) for d in deltas):
        raise UsageError("--deltas must be positive numbers")
    base = _unlabeled(_load(args.base))
    spec = neighborhoods.NeighborhoodSpec(_region(args, base.ambient_dim), args.eps)
    rows = converge_rows(
        base, args.family, deltas, spec, args.grid_points, args.rmax, args.threads,
        _grid(args.grid, base.ambient_dim), args.rho,
    )
    lines = [CONVERGE_HEADER]
    for delta, dh, dnu, dpsi, scan, gs, ls in rows:
        lines.append(",".join([_fmt(delta), _fmt(dh), _fmt(dnu), _fmt(dpsi), _fmt(scan),
                               str(gs).lower(), str(ls).lower()]))
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.svg:
        series = {name: [r[i] for r in rows] for i, name in enumerate(["d_H", "d_nu", "d_psi", "scan"], start=1)}
        Path(args.svg).write_text(loglog_svg(deltas, series, title=f"{args.family} family"), encoding="utf-8")
    return EXIT_OK


_COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def loglog_svg(x, series, title="", width=480, height=320):
    """Minimal log-log line plot; nonpositive values are dropped."""
    pad = 48
    pts = {k: [(a, b) for a, b in zip(x, v) if a > 0 and b > 0] for k, v in series.items()}
    xs = [a for v in pts.values() for a, _ in v] or [1.0]
    ys = [b for v in pts.values() for _, b in v] or [1.0]
    lx0, lx1 = math.log10(min(xs)), math.log10(max(xs))
    ly0, ly1 = math.log10(min(ys)), math.log10(max(ys))
    lx1, ly1 = (lx1 if lx1 > lx0 else lx0 + 1), (ly1 if ly1 > ly0 else ly0 + 1)

    def to_px(a, b):
        u = pad + (math.log10(a) - lx0) / (lx1 - lx0) * (width - 2 * pad)
        v = height - pad - (math.log10(b) - ly0) / (ly1 - ly0) * (height - 2 * pad)
        return f"{u:.2f},{v:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2:.0f}" y="{height - 10}" text-anchor="middle" font-size="12">delta (log)</text>',
        f'<text x="{pad}" y="{height - pad + 16}" font-size="10">{10 ** lx0:.3g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" font-size="10">{10 ** lx1:.3g}</text>',
        f'<text x="4" y="{height - pad}" font-size="10">{10 ** ly0:.3g}</text>',
        f'<text x="4" y="{pad}" font-size="10">{10 ** ly1:.3g}</text>',
    ]
    for i, (name, p) in enumerate(pts.items()):
        colour = _COLOURS[i % len(_COLOURS)]
        if p:
            path = " ".join(to_px(a, b) for a, b in sorted(p))
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{path}"/>')
        out.append(f'<text x="{width - pad - 60}" y="{pad + 14 * i}" font-size="11" fill="{colour}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# scan


def cmd_scan(args):
    W = _unlabeled(_load(args.input))
    section = scanning.scan_section(W, _grid(args.grid, W.ambient_dim), args.rho)
    text = section.to_csv()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads (output is unaffected)")
    common.add_argument("--grid-points", type=_positive_int, default=512, help="radius grid size for d_nu")
    common.add_argument("--rmax", type=_positive_float, default=None, help="radius grid upper end for d_nu")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized generators")

    region = argparse.ArgumentParser(add_help=False)
    region.add_argument("--center", help="ball K center, comma-separated")
    region.add_argument("--kradius", type=float, help="ball K radius")
    region.add_argument("--kbox", help="cube K = [lo,hi]^n as lo,hi (default -1,1)")

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--grid", action="append", help="scan grid axis a:b:s (repeat per axis)")
    scan.add_argument("--rho", type=_positive_float, default=scanning.DEFAULT_RHO, help="scan radius")

    parser = argparse.ArgumentParser(prog="psispace", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a fixture as an MFD file")
    p.add_argument("kind", choices=["circle", "sphere", "affine-plane", "line", "graph", "torus", "empty",
                                    "parallel-copies", "perturb"])
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--radius", type=_positive_float, default=1.0)
    p.add_argument("--minor-radius", type=_positive_float, default=0.5)
    p.add_argument("--samples", type=_positive_int, default=512)
    p.add_argument("--minor-samples", type=_positive_int, default=32)
    p.add_argument("--ambient", type=_positive_int, default=2)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--extent", type=_positive_float, default=1.0)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--slope", type=float, default=0.0)
    p.add_argument("--curvature", type=float, default=0.0)
    p.add_argument("--base")
    p.add_argument("--delta", type=float)
    p.add_argument("--mode", choices=["constant", "smooth-bump", "tilt"], default="constant")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("dist", parents=[common, scan], help="distance between two MFD files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", choices=["psi", "scan"], default="psi")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("member", parents=[common, region], help="basic-neighbourhood membership")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--kind", choices=sorted(_TESTS), default="gs")
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--label-eps", type=_positive_float, default=None)
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("converge", parents=[common, region, scan], help="distances along a one-parameter family")
    p.add_argument("--family", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--deltas", required=True)
    p.add_argument("--eps", type=_positive_float, default=0.5)
    p.add_argument("-o", "--output")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("scan", parents=[common, scan], help="scan section of an MFD file as CSV")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
