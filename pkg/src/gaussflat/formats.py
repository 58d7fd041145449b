"""JSON and CSV file formats.

Manifold files::

    {"n": 3, "d": 2, "domain": "ball",
     "samples": [{"x": [...], "tangent": [[col], ...], "w": 0.01}, ...]}

are written one sample per line, and the loader reports the line of the
offending sample when an invariant fails. Floats are written with ``repr``
so every artifact re-parses to bitwise identical arrays.
"""

import json
import re

import numpy as np

from .errors import GeometryOutsideBall, InvariantViolation, ParseError
from .grassmann import frame_from_columns, plane_from_json, plane_to_json
from .hyperspace import GaussGraph
from .manifold import AffinePlane, SampledManifold, StepFunction, estimate_weights
from .retraction import RetractionConfig, RetractionTrace

_SAMPLES_KEY = re.compile(r'"samples"\s*:\s*\[')


def _loads(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _sample_lines(text):
    """Line number of each element of the top-level ``samples`` array."""
    m = _SAMPLES_KEY.search(text)
    if m is None:
        return []
    decoder = json.JSONDecoder()
    pos, lines = m.end(), []
    while True:
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text) or text[pos] == "]":
            return lines
        lines.append(text.count("\n", 0, pos) + 1)
        _, pos = decoder.raw_decode(text, pos)


# -- manifolds ------------------------------------------------------------------

def manifold_to_json(W):
    out = {"n": W.ambient_dim, "d": W.plane_dim, "domain": W.domain}
    if W.approximate_weights:
        out["meta"] = {"approximate_weights": True}
    out["samples"] = [
        {"x": x.tolist(), "tangent": [c.tolist() for c in F.T], "w": float(w)}
        for x, F, w in zip(W.points, W.frames, W.weights)
    ]
    return out


def dumps_manifold(W):
    """Manifold file text, one sample per line."""
    head = manifold_to_json(W)
    samples = head.pop("samples")
    text = json.dumps(head)[:-1] + ', "samples": ['
    if samples:
        text += "\n" + ",\n".join(json.dumps(s) for s in samples) + "\n"
    return text + "]}\n"


def manifold_from_json(obj, lines=None):
    """Validate a parsed manifold object; ``lines`` maps samples to file lines."""
    try:
        n, d = int(obj["n"]), int(obj["d"])
        domain = obj.get("domain", "ball")
        samples = obj["samples"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolation(f"manifold object lacks n, d or samples: {exc}") from exc
    if not 0 <= d <= n or n < 1:
        raise InvariantViolation(f"need 0 <= d <= n and n >= 1, got n={n}, d={d}")

    def where(k):
        return f"sample {k} (line {lines[k]})" if lines and k < len(lines) else f"sample {k}"

    X = np.zeros((len(samples), n))
    F = np.zeros((len(samples), n, d))
    w = np.zeros(len(samples))
    has_w = []
    for k, s in enumerate(samples):
        try:
            X[k] = np.asarray(s["x"], dtype=float)
            cols = s.get("tangent", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvariantViolation(f"{where(k)}: bad point: {exc}") from exc
        if not np.all(np.isfinite(X[k])):
            raise InvariantViolation(f"{where(k)}: non-finite coordinates")
        if domain == "ball" and np.linalg.norm(X[k]) >= 1:
            raise GeometryOutsideBall(f"{where(k)}: |x| = {np.linalg.norm(X[k]):.6g} >= 1 in a ball-domain file")
        if len(cols) != d or any(len(c) != n for c in cols):
            raise InvariantViolation(f"{where(k)}: tangent must list {d} columns of length {n}")
        F[k] = frame_from_columns(cols, n, d, where=where(k))
        has_w.append("w" in s)
        if "w" in s:
            w[k] = float(s["w"])
            if not w[k] > 0:
                raise InvariantViolation(f"{where(k)}: weight must be positive, got {w[k]}")
    approximate = bool(obj.get("meta", {}).get("approximate_weights", False))
    if samples and not any(has_w):
        w = estimate_weights(X, d)
        approximate = True
    elif not all(has_w):
        raise InvariantViolation("either every sample or no sample may carry a weight")
    return SampledManifold(X, F, w, domain, approximate)


def loads_manifold(text):
    obj = _loads(text, "manifold file")
    return manifold_from_json(obj, _sample_lines(text))


def load_manifold(path):
    with open(path) as fh:
        return loads_manifold(fh.read())


# -- graphs -----------------------------------------------------------------------

def graph_to_json(G):
    return {
        "n": G.ambient_dim,
        "d": G.plane_dim,
        "points": [
            {"s": s.tolist(), "tangent": [c.tolist() for c in F.T]}
            for s, F in zip(G.sphere, G.frames)
        ],
        "basepoint": True,
    }


def graph_from_json(obj):
    try:
        pts = obj["points"]
        if pts:
            n = len(pts[0]["s"]) - 1
            d = len(pts[0]["tangent"])
        else:
            n, d = int(obj["n"]), int(obj["d"])
        S = np.array([p["s"] for p in pts], dtype=float).reshape(len(pts), n + 1)
        F = np.array([frame_from_columns(p["tangent"], n, d, where=f"point {k}") for k, p in enumerate(pts)])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InvariantViolation(f"malformed Gauss graph: {exc}") from exc
    if not obj.get("basepoint", True):
        raise InvariantViolation("Gauss graphs always contain the basepoint")
    return GaussGraph(S, F.reshape(len(pts), n, d))


# -- step functions ---------------------------------------------------------------

def step_rows(f):
    return [(b, v) for b, v in zip(f.breakpoints, f.values)]


def step_to_json(f):
    return {"breakpoints": list(f.breakpoints), "values": list(f.values)}


def step_from_json(obj):
    return StepFunction(tuple(obj["breakpoints"]), tuple(obj["values"]))


# -- traces ------------------------------------------------------------------------

def config_to_json(cfg):
    return {
        "delta": cfg.delta, "alpha": cfg.alpha, "root_tol": cfg.root_tol,
        "cluster_radius": cfg.cluster_radius, "slab_width": cfg.slab_width,
        "t_floor": cfg.t_floor, "max_iter": cfg.max_iter, "stages": cfg.stages,
    }


def affine_to_json(ap):
    return {"direction": plane_to_json(ap.direction), "origin": ap.origin.tolist()}


def affine_from_json(obj):
    return AffinePlane(plane_from_json(obj["direction"]), obj["origin"])


def trace_to_json(trace):
    return {
        "config": config_to_json(trace.config) if trace.config else None,
        "phi": trace.phi,
        "mu": plane_to_json(trace.mu) if trace.mu is not None else None,
        "margin": trace.margin,
        "stages": [{"tau": tau, "manifold": manifold_to_json(V)} for tau, V in trace.stages],
        "result": [affine_to_json(ap) for ap in trace.result],
        "diagnostics": list(trace.diagnostics),
    }


def trace_from_json(obj):
    try:
        cfg = RetractionConfig(**obj["config"]) if obj.get("config") else None
        return RetractionTrace(
            phi=float(obj["phi"]),
            mu=plane_from_json(obj["mu"]) if obj.get("mu") else None,
            margin=obj.get("margin"),
            stages=[(float(s["tau"]), manifold_from_json(s["manifold"])) for s in obj["stages"]],
            result=[affine_from_json(a) for a in obj["result"]],
            diagnostics=list(obj.get("diagnostics", [])),
            config=cfg,
        )
    except (KeyError, TypeError) as exc:
        raise InvariantViolation(f"malformed trace: {exc}") from exc


def loads_any(text):
    """Parse a manifold, graph, plane or trace file by its keys."""
    obj = _loads(text, "input file")
    if not isinstance(obj, dict):
        raise InvariantViolation("top-level JSON value must be an object")
    if "samples" in obj:
        return manifold_from_json(obj, _sample_lines(text))
    if "points" in obj:
        return graph_from_json(obj)
    if "frame" in obj:
        return plane_from_json(obj)
    if "stages" in obj:
        return trace_from_json(obj)
    raise InvariantViolation("unrecognised file: expected a manifold, graph, plane or trace")


def dumps(obj):
    """Deterministic compact JSON text with a trailing newline."""
    return json.dumps(obj) + "\n"

