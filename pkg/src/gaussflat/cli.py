"""Command-line front end.

Usage::

    gaussflat gen --input shape.json --seed 0 --output W.json
    gaussflat flatten --input W.json [--delta D] [--alpha A] [--format csv]
    gaussflat mean --input W.json
    gaussflat theta --input W.json
    gaussflat dist --input A.json --input B.json
    gaussflat proximity --input W.json --input W2.json --radius 0.5
    gaussflat multiplicity --input W.json --input W2.json --epsilon 0.1
    gaussflat probe --input W.json --jitters 0.125,0.0625 --seed 0

Exit status is 0 on success, 2 on invalid input and 3 when the pipeline
cannot proceed; the error class name is printed on stderr.
"""

import argparse
import io
import json
import math
import sys

from . import formats
from .errors import GaussflatError, InvariantViolation, ParseError, PipelineError
from .grassmann import karcher_mean, plane_to_json
from .hyperspace import GaussGraph, gauss_graph, gauss_proximity, hyper_distance
from .manifold import SampledManifold, covering_multiplicity, gauss_diameter, generate, theta
from .retraction import (
    RetractionConfig,
    probe_continuity,
    retract,
    transversality_margin,
)

COMMANDS = ("gen", "flatten", "mean", "theta", "dist", "proximity", "multiplicity", "probe")
INPUTS = {"gen": 1, "flatten": 1, "mean": 1, "theta": 1, "dist": 2, "proximity": 2, "multiplicity": 2, "probe": 1}


def fmt(x):
    """Decimal with 12 significant digits; blank for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def emit_csv(trace):
    """Per-stage ``tau,gauss_diameter,margin`` table of a retraction trace."""
    out = io.StringIO()
    out.write("tau,gauss_diameter,margin\n")
    for tau, V in sorted(trace.stages, key=lambda s: s[0]):
        margin = transversality_margin(V, trace.mu) if trace.mu is not None else None
        out.write(f"{fmt(tau)},{fmt(gauss_diameter(V))},{fmt(margin)}\n")
    return out.getvalue()


def _finite(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def probe_to_json(report):
    return {
        "rows": [
            {"jitter": r.jitter, "dphi": _finite(r.dphi), "dmu": _finite(r.dmu),
             "dhyper": _finite(r.dhyper), "error": r.error}
            for r in report.rows
        ],
        "non_increasing": report.non_increasing,
        "final": {k: _finite(v) for k, v in report.final.items()},
        "tends_to_zero": report.tends_to_zero,
    }


def probe_csv(report):
    lines = ["jitter,dphi,dmu,dhyper,error"]
    for r in report.rows:
        lines.append(f"{fmt(r.jitter)},{fmt(r.dphi)},{fmt(r.dmu)},{fmt(r.dhyper)},{r.error or ''}")
    return "\n".join(lines) + "\n"


def parse_jitters(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvariantViolation(f"--jitters must be a comma-separated list of numbers: {exc}") from exc
    if not values or any(not v > 0 for v in values):
        raise InvariantViolation("--jitters needs at least one positive value")
    return values


def build_parser():
    p = argparse.ArgumentParser(prog="gaussflat", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", action="append", default=[], help="input file (repeat for two-input commands)")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--jitters", default=",".join(str(2.0 ** -k) for k in range(3, 11)))
    p.add_argument("--radius", type=float)
    p.add_argument("--epsilon", type=float)
    return p


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _as_graph(obj):
    if isinstance(obj, SampledManifold):
        return gauss_graph(obj)
    if isinstance(obj, GaussGraph):
        return obj
    raise InvariantViolation("dist needs manifold or Gauss graph files")


def _manifold(obj, path):
    if not isinstance(obj, SampledManifold):
        raise InvariantViolation(f"{path} is not a manifold file")
    return obj


def run(args):
    """Execute a parsed command and return the output text."""
    want = INPUTS[args.command]
    if len(args.input) != want:
        raise InvariantViolation(f"{args.command} takes exactly {want} --input file(s), got {len(args.input)}")
    overrides = {"delta": args.delta, "alpha": args.alpha}
    cfg = RetractionConfig(**{k: v for k, v in overrides.items() if v is not None})
    texts = [_read(p) for p in args.input]

    if args.command == "gen":
        try:
            spec = json.loads(texts[0])
        except json.JSONDecodeError as exc:
            raise ParseError(f"shape file: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(spec, dict):
            raise InvariantViolation("shape file must hold a JSON object")
        return formats.dumps_manifold(generate(spec, seed=args.seed))

    objs = [formats.loads_any(t) for t in texts]
    if args.command == "dist":
        return fmt(hyper_distance(_as_graph(objs[0]), _as_graph(objs[1]))) + "\n"
    Ws = [_manifold(o, p) for o, p in zip(objs, args.input)]
    W = Ws[0]

    if args.command == "flatten":
        trace = retract(W, cfg)
        return emit_csv(trace) if args.format == "csv" else formats.dumps(formats.trace_to_json(trace))
    if args.command == "mean":
        return formats.dumps(plane_to_json(karcher_mean(W, cfg.delta, max_iter=cfg.max_iter)))
    if args.command == "theta":
        f = theta(W)
        if args.format == "json":
            return formats.dumps(formats.step_to_json(f))
        return "breakpoint,value\n" + "".join(f"{b!r},{v!r}\n" for b, v in formats.step_rows(f))
    if args.command == "proximity":
        if args.radius is None:
            raise InvariantViolation("proximity needs --radius")
        return fmt(gauss_proximity(Ws[0], Ws[1], args.radius)) + "\n"
    if args.command == "multiplicity":
        if args.epsilon is None or not args.epsilon > 0:
            raise InvariantViolation("multiplicity needs a positive --epsilon")
        rep = covering_multiplicity(Ws[0], Ws[1], args.epsilon)
        hist = rep.histogram()
        if args.format == "csv":
            return "multiplicity,count\n" + "".join(f"{k},{v}\n" for k, v in sorted(hist.items()))
        return formats.dumps({"histogram": {str(k): v for k, v in sorted(hist.items())},
                              "unmatched": int(rep.unmatched)})
    # probe
    report = probe_continuity(W, parse_jitters(args.jitters), seed=args.seed, cfg=cfg)
    return probe_csv(report) if args.format == "csv" else formats.dumps(probe_to_json(report))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = run(args)
    except GaussflatError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3 if isinstance(exc, PipelineError) else 2
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
