"""Command-line interface: problem files in, curve files, CSV tables and SVG out.

Exit codes: 0 success, 2 usage or malformed input, 3 infeasible problem,
4 numerical failure.  Errors are reported on stderr as a one-line JSON
object ``{"error": kind, "reason": text}``.

Curve files are JSON; floats are written with ``repr`` so control points
survive a round trip bit for bit.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bench
from .biarc import HermiteData, InfeasibleProblem, interpolate
from .phcurve import CuspError, PHSegment7, hodograph
from .spline import SplineNode, build

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4
CURVE_FORMAT = "phbiarc-curve/1"
CANDIDATES_FORMAT = "phbiarc-candidates/1"


class UsageError(ValueError):
    """Malformed input files or inconsistent options (exit code 2)."""


# ---------------------------------------------------------------- problem files

class Problem:
    def __init__(self, data, lam=1.0, beta0=0.0, beta1=0.0):
        self.data, self.lam, self.beta0, self.beta1 = data, lam, beta0, beta1


_PROBLEM_KEYS = {"p0", "p1", "theta0", "theta1", "t0", "t1", "k0", "k1", "length", "lambda", "beta0", "beta1"}


def _pair(text, key):
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise UsageError(f"{key}: expected two numbers, got {text!r}")
    try:
        x, y = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"{key}: not a number pair: {text!r}") from None
    return complex(x, y)


def _real(text, key):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{key}: not a number: {text!r}") from None


def parse_problem(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    fields = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _PROBLEM_KEYS:
            raise UsageError(f"line {n}: unknown key {key!r}")
        if key in fields:
            raise UsageError(f"line {n}: duplicate key {key!r}")
        fields[key] = value
    for j in "01":
        if f"theta{j}" in fields and f"t{j}" in fields:
            raise UsageError(f"give either theta{j} or t{j}, not both")
        if f"theta{j}" not in fields and f"t{j}" not in fields:
            raise UsageError(f"missing tangent: theta{j} or t{j}")
    for key in ("p0", "p1", "k0", "k1", "length"):
        if key not in fields:
            raise UsageError(f"missing key {key!r}")
    tangents = []
    for j in "01":
        if f"theta{j}" in fields:
            th = _real(fields[f"theta{j}"], f"theta{j}")
            tangents.append(complex(math.cos(th), math.sin(th)))
        else:
            tangents.append(_pair(fields[f"t{j}"], f"t{j}"))
    lam = _real(fields.get("lambda", "1"), "lambda")
    if not lam > 0:
        raise UsageError("lambda must be positive")
    try:
        data = HermiteData(_pair(fields["p0"], "p0"), _pair(fields["p1"], "p1"), tangents[0], tangents[1],
                           _real(fields["k0"], "k0"), _real(fields["k1"], "k1"),
                           _real(fields["length"], "length"))
    except InfeasibleProblem:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Problem(data, lam, _real(fields.get("beta0", "0"), "beta0"), _real(fields.get("beta1", "0"), "beta1"))


def format_problem(data, lam=1.0, beta0=0.0, beta1=0.0):
    """ProblemFile text with vector tangents, exact to the last bit."""
    def pair(z):
        return f"{z.real!r} {z.imag!r}"
    lines = [f"p0 = {pair(data.P0)}", f"p1 = {pair(data.P1)}", f"t0 = {pair(data.t0)}",
             f"t1 = {pair(data.t1)}", f"k0 = {data.k0!r}", f"k1 = {data.k1!r}", f"length = {data.L!r}",
             f"lambda = {float(lam)!r}", f"beta0 = {float(beta0)!r}", f"beta1 = {float(beta1)!r}"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- curve files

def _xy(z):
    return [float(z.real), float(z.imag)]


def segment_record(seg):
    return {"control_points": [_xy(p) for p in seg.points],
            "preimage": [_xy(w) for w in seg.preimage],
            "scale": float(seg.scale),
            "arc_length": seg.arc_length(),
            "energy": seg.bending_energy()}


def biarc_metadata(biarc):
    p = biarc.params
    return {"alpha0": biarc.alpha0, "alpha1": biarc.alpha1, "branch": "+" if p.branch == 1 else "-",
            "lambda": p.lam, "beta0": p.beta0, "beta1": p.beta1, "zeta_d": p.zeta_d,
            "arc_length": biarc.arc_length(), "energy": biarc.energy}


def curve_document(segments, kind, metadata):
    return {"format": CURVE_FORMAT, "kind": kind,
            "segments": [segment_record(s) for s in segments], "metadata": metadata}


def biarc_document(interp, index=None):
    index = interp.selected_index if index is None else index
    b = interp.candidates[index]
    meta = biarc_metadata(b)
    meta.update(candidate_index=index, selected_index=interp.selected_index,
                candidate_energies=interp.energies)
    return curve_document(b.segments, "biarc", meta)


def dumps(doc):
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


class CurveRecord:
    """A parsed curve file: segments laid end to end, each on a unit of global parameter."""

    def __init__(self, segments, kind, metadata):
        self.segments, self.kind, self.metadata = segments, kind, metadata

    def control_points(self):
        return [s.points for s in self.segments]


def parse_curve(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"curve file is not JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != CURVE_FORMAT:
        raise UsageError(f"not a {CURVE_FORMAT} document")
    segs = []
    try:
        for rec in doc["segments"]:
            pts = np.array([complex(x, y) for x, y in rec["control_points"]])
            pre = np.array([complex(x, y) for x, y in rec["preimage"]])
            if pts.shape != (8,) or pre.shape != (4,):
                raise UsageError("segment needs 8 control points and 4 preimage coefficients")
            segs.append(PHSegment7(pre, pts, float(rec["scale"]), hodograph(pre)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"malformed segment record: {exc}") from None
    if not segs:
        raise UsageError("curve file has no segments")
    return CurveRecord(segs, doc.get("kind", ""), doc.get("metadata", {}))


# ---------------------------------------------------------------- csv helpers

def _num(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def _table(header, rows):
    """Fixed-width text table, 6 significant digits."""
    def cell(v):
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return "/"
        return f"{v:.6g}" if isinstance(v, float) else str(v)
    cells = [list(header)] + [[cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.rjust(wd) for c, wd in zip(r, widths)) + "\n" for r in cells)


# ---------------------------------------------------------------- commands

def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(args, text):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_interpolate(args):
    prob = parse_problem(_read(args.problem))
    interp = interpolate(prob.data, prob.lam, prob.beta0, prob.beta1)
    if args.csv:
        if args.all_candidates:
            rows = [(i, c.params.branch, c.alpha0, c.alpha1, c.energy, int(i == interp.selected_index))
                    for i, c in enumerate(interp.candidates)]
            return _csv(["index", "branch", "alpha0", "alpha1", "energy", "selected"], rows)
        b = interp.selected
        rows = [(j, i, p.real, p.imag) for j, s in enumerate(b.segments) for i, p in enumerate(s.points)]
        return _csv(["segment", "index", "x", "y"], rows)
    if args.all_candidates:
        doc = {"format": CANDIDATES_FORMAT, "selected_index": interp.selected_index,
               "candidates": [biarc_document(interp, i) for i in range(len(interp.candidates))]}
        return dumps(doc)
    return dumps(biarc_document(interp))


_NODE_COLUMNS = ("x", "y", "theta", "kappa")


def parse_nodes(text):
    """Nodes CSV with header ``x,y,theta,kappa`` and optional ``length`` and ``s`` columns."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise UsageError("nodes file has no rows")
    header = set(rows[0].keys())
    missing = [c for c in _NODE_COLUMNS if c not in header]
    if missing:
        raise UsageError(f"nodes file lacks columns: {', '.join(missing)}")
    nodes, lengths, s_vals = [], [], []
    for n, r in enumerate(rows, 2):
        try:
            x, y, th, k = (float(r[c]) for c in _NODE_COLUMNS)
            nodes.append(SplineNode.make(complex(x, y), complex(math.cos(th), math.sin(th)), k))
            if "length" in header and (r["length"] or "").strip():
                lengths.append(float(r["length"]))
            if "s" in header:
                s_vals.append(float(r["s"]))
        except (TypeError, ValueError):
            raise UsageError(f"nodes file line {n}: malformed number") from None
    return nodes, lengths, (s_vals if "s" in header else None)


def cmd_spline(args):
    nodes, lengths, s_vals = parse_nodes(_read(args.nodes))
    curve = None
    if args.reference == "log-spiral":
        if s_vals is None:
            raise UsageError("--reference needs an 's' column in the nodes file")
        curve = bench.LogSpiral(args.omega)
    if args.lengths is not None:
        try:
            lengths = [float(v) for v in args.lengths.split(",") if v.strip()]
        except ValueError:
            raise UsageError("--lengths: malformed number list") from None
    elif not lengths and curve is not None:
        lengths = [curve.length(a, b) for a, b in zip(s_vals, s_vals[1:])]
    if len(lengths) != len(nodes) - 1:
        raise UsageError(f"expected {len(nodes) - 1} span lengths, got {len(lengths)}")
    sp = build(nodes, lengths, args.lam, args.beta0, args.beta1)
    knots = sp.knot_report()
    meta = {"n_spans": sp.n_spans, "arc_length": sp.arc_length(), "energy": sp.energy(),
            "spans": [biarc_metadata(b) for b in sp.spans],
            "knots": [k._asdict() for k in knots],
            "max_knot_mismatch": max((max(k.position, k.tangent, k.curvature) for k in knots), default=0.0)}
    if curve is not None:
        errs = [bench.e_err(b, curve, bench.reparam_phi(b, curve, a, c))
                for b, a, c in zip(sp.spans, s_vals, s_vals[1:])]
        meta.update(reference={"curve": "log-spiral", "omega": args.omega},
                    span_errors=errs, max_error=max(errs))
    segs = [s for b in sp.spans for s in b.segments]
    return dumps(curve_document(segs, "spline", meta))


def _order_rows(reports):
    return [(r.h, r.e_err, r.decay_exponent) for r in reports]


def _dps(args):
    return args.dps if args.dps > 0 else None


def cmd_bench(args):
    sub = args.bench
    if sub == "spiral-order":
        hs = [2.0**-k for k in range(args.kmin, args.kmax + 1)]
        rows = _order_rows(bench.decay_table(bench.LogSpiral(args.omega), hs, args.method, _dps(args)))
        header, rows = ["h", "E_err", "decay"], rows
    elif sub == "single-compare":
        hs = [2.0**-k for k in range(args.kmin, args.kmax + 1)]
        c = bench.LogSpiral(args.omega)
        bi = bench.decay_table(c, hs, "biarc", _dps(args))
        si = bench.decay_table(c, hs, "single", _dps(args))
        header = ["h", "E_err_biarc", "decay_biarc", "E_err_single", "decay_single"]
        rows = [(a.h, a.e_err, a.decay_exponent, b.e_err, b.decay_exponent) for a, b in zip(bi, si)]
    elif sub == "circle-order":
        Ns = [2**k for k in range(1, int(math.log2(args.nmax)) + 1)]
        reps = bench.circle_table(Ns, _dps(args))
        header = ["N", "phi", "E_err", "decay"]
        rows = [(N, 2.0 * math.pi / N, r.e_err, r.decay_exponent) for N, r in zip(Ns, reps)]
    elif sub == "lambda-opt":
        prob = parse_problem(_read(args.problem))
        res = bench.optimize_lambda(prob.data)
        k = min(range(len(res.grid)), key=lambda i: res.grid[i][1])
        header = ["kind", "lambda", "energy"]
        rows = [("minimum" if i == k else "grid", lam, e if math.isfinite(e) else None)
                for i, (lam, e) in enumerate(res.grid)]
        if args.continuous:
            ref = bench.optimize_lambda(prob.data, continuous=True)
            rows.append(("continuous", ref.lam, ref.energy))
    elif sub == "beta-opt":
        prob = parse_problem(_read(args.problem))
        lam = prob.lam if args.lam is None else args.lam
        start = bench.min_energy(prob.data, lam)[0]
        header = ["kind", "lambda", "beta0", "beta1", "energy"]
        rows = [("start", lam, 0.0, 0.0, start)]
        res = bench.optimize_beta(prob.data, lam)
        rows.append(("beta", lam, res.beta0, res.beta1, res.energy))
        if args.joint:
            jl, jr = bench.optimize_joint(prob.data)
            rows.append(("joint", jl, jr.beta0, jr.beta1, jr.energy))
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown bench {sub!r}")
    if args.format == "table":
        return _table(header, rows)
    return _csv(header, rows)


def _f(v):
    return f"{v:.9g}"


def render_svg(record, porcupine_scale=0.1, samples=200, width=800):
    """SVG 1.1 drawing of a curve record with control polygons and porcupine quills."""
    segs = record.segments
    m = len(segs)
    curve_pts = []
    for s in segs:
        u = np.linspace(0.0, 1.0, 65)
        pts = s.point(u)
        curve_pts.extend(pts if not curve_pts else pts[1:])
    quills = []
    for g in np.linspace(0.0, float(m), max(int(samples), 2)):
        j = min(int(g), m - 1)
        try:
            fr = segs[j].evaluate(g - j)
        except CuspError:
            continue
        quills.append((fr.point, fr.point + porcupine_scale * fr.signed_curvature * fr.normal, fr.signed_curvature))
    every = [complex(p) for p in curve_pts] + [complex(p) for s in segs for p in s.points]
    every += [q[1] for q in quills]
    xs = [p.real for p in every]
    ys = [p.imag for p in every]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
    x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad
    height = max(1, round(width * (y1 - y0) / (x1 - x0)))

    def path(points):
        return " ".join(f"{_f(p.real)},{_f(p.imag)}" for p in points)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
           f'viewBox="{_f(x0)} {_f(-y1)} {_f(x1 - x0)} {_f(y1 - y0)}">',
           "<!-- y axis flipped: curve coordinates are y-up, SVG screen coordinates are y-down -->",
           '<g transform="scale(1,-1)" fill="none" stroke-linecap="round">',
           '<g id="porcupine" stroke-width="1" vector-effect="non-scaling-stroke">']
    for a, b, k in quills:
        color = "#d62728" if k > 0 else ("#1f77b4" if k < 0 else "#7f7f7f")
        out.append(f'<line x1="{_f(a.real)}" y1="{_f(a.imag)}" x2="{_f(b.real)}" y2="{_f(b.imag)}" '
                   f'stroke="{color}" vector-effect="non-scaling-stroke"/>')
    out.append("</g>")
    out.append('<g id="control-polygon" stroke="#2ca02c" stroke-dasharray="4 3">')
    for s in segs:
        out.append(f'<polyline points="{path(s.points)}" stroke-width="1" vector-effect="non-scaling-stroke"/>')
        for p in s.points:
            out.append(f'<circle cx="{_f(p.real)}" cy="{_f(p.imag)}" r="{_f(0.006 * (x1 - x0))}" '
                       'fill="#2ca02c" stroke="none"/>')
    out.append("</g>")
    out.append(f'<polyline id="curve" points="{path(curve_pts)}" stroke="#000000" stroke-width="2" '
               'vector-effect="non-scaling-stroke"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_render(args):
    record = parse_curve(_read(args.curve))
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    return render_svg(record, args.porcupine_scale, args.samples)


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser():
    p = _Parser(prog="phbiarc", description="G2 interpolation with prescribed arc length by PH biarcs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("interpolate", help="biarc interpolant of a problem file")
    q.add_argument("problem", help="problem file (key = value lines), '-' for stdin")
    q.add_argument("--all-candidates", action="store_true", help="emit every candidate, not only the selected one")
    fmt = q.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="curve file output (default)")
    fmt.add_argument("--csv", action="store_true", help="CSV output")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_interpolate)

    q = sub.add_parser("spline", help="local G2 spline through a nodes CSV")
    q.add_argument("nodes", help="CSV with columns x,y,theta,kappa and optional length,s")
    q.add_argument("--lengths", help="comma separated span lengths (overrides the length column)")
    q.add_argument("--reference", choices=["log-spiral"], help="measure E_err against this curve at the s column")
    q.add_argument("--omega", type=float, default=0.2)
    q.add_argument("--lambda", dest="lam", type=float, default=1.0)
    q.add_argument("--beta0", type=float, default=0.0)
    q.add_argument("--beta1", type=float, default=0.0)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_spline)

    q = sub.add_parser("bench", help="numerical experiments as CSV tables")
    bsub = q.add_subparsers(dest="bench", required=True, parser_class=_Parser)
    for name in ("spiral-order", "single-compare", "circle-order", "lambda-opt", "beta-opt"):
        b = bsub.add_parser(name)
        b.add_argument("--format", choices=["csv", "table"], default="csv")
        b.add_argument("-o", "--output")
        b.set_defaults(func=cmd_bench)
        if name in ("spiral-order", "single-compare"):
            b.add_argument("--omega", type=float, default=0.2)
            b.add_argument("--kmin", type=int, default=0)
            b.add_argument("--kmax", type=int, default=8)
        if name == "spiral-order":
            b.add_argument("--method", choices=["biarc", "single"], default="biarc")
        if name == "circle-order":
            b.add_argument("--nmax", type=int, default=512)
        if name in ("spiral-order", "single-compare", "circle-order"):
            b.add_argument("--dps", type=int, default=40,
                           help="decimal digits for the multiprecision rebuild; 0 stays in double precision")
        if name in ("lambda-opt", "beta-opt"):
            b.add_argument("problem")
        if name == "lambda-opt":
            b.add_argument("--continuous", action="store_true", help="refine around the grid minimum")
        if name == "beta-opt":
            b.add_argument("--lambda", dest="lam", type=float, help="defaults to the problem file's lambda")
            b.add_argument("--joint", action="store_true", help="also optimize lambda, beta0, beta1 together")

    q = sub.add_parser("render", help="SVG with control polygon and porcupine curvature plot")
    q.add_argument("curve", help="curve file")
    q.add_argument("--porcupine-scale", type=float, default=0.1)
    q.add_argument("--samples", type=int, default=200, help="number of porcupine quills")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_render)
    return p


def _fail(kind, reason, code):
    sys.stderr.write(json.dumps({"error": kind, "reason": reason}) + "\n")
    return code


def main(argv=None):
    try:
        args = make_parser().parse_args(argv)
        if getattr(args, "bench", None) in ("spiral-order", "single-compare") and args.kmin > args.kmax:
            raise UsageError("--kmin must not exceed --kmax")
        if getattr(args, "bench", None) == "circle-order" and args.nmax < 2:
            raise UsageError("--nmax must be at least 2")
        _write(args, args.func(args))
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except InfeasibleProblem as exc:
        return _fail("infeasible", str(exc), EXIT_INFEASIBLE)
    except (ArithmeticError, CuspError, np.linalg.LinAlgError) as exc:
        return _fail("numerical", str(exc) or type(exc).__name__, EXIT_NUMERICAL)
    except ValueError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
