"""Acceptance criteria, one test each, printing a PASS/FAIL line per criterion."""

import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from gaussflat import (
    GaussGraph,
    Plane,
    RetractionConfig,
    SampledManifold,
    StepFunction,
    compactify,
    covering_multiplicity,
    gauss_diameter,
    gauss_graph,
    graph,
    hyper_distance,
    hyper_distance_brute,
    karcher_mean,
    lambda_gradient,
    parallel_planes,
    perturb,
    phi,
    plane_distance,
    points,
    probe_continuity,
    restrict,
    retract,
    sampling_resolution,
    shrink_stage,
    smooth_a,
    sphere,
)
from gaussflat.cli import main
from gaussflat.errors import GaussflatError
from gaussflat.grassmann import frame_distances

JITTERS = [2.0 ** -k for k in range(3, 11)]


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail
    return emit


def plane_union(rng, n, d, planes):
    """Random direction and up to ``planes`` well separated origins."""
    P = Plane(np.linalg.qr(rng.standard_normal((n, n)))[0][:, :d])
    C = P.complement().frame
    spacing = 0.1 if d == 3 else 0.05
    origins = []
    for _ in range(500):
        if len(origins) == planes:
            break
        c = C @ rng.uniform(-1, 1, n - d)
        c *= rng.uniform(0, 0.6) / max(np.linalg.norm(c), 1e-12)
        if all(np.linalg.norm(c - o) > 6 * spacing for o in origins):
            origins.append(c)
    return P, np.array(origins), spacing


def test_criterion_1_plane_union_fixed_point(report):
    rng = np.random.default_rng(1)
    shapes = [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (5, 3), (5, 4)]
    worst_phi = worst_dir = worst_origin = 0.0
    failures = []
    for k in range(20):
        n, d = shapes[k % len(shapes)]
        d = min(d, 3)
        P, origins, spacing = plane_union(rng, n, d, 1 + k % 4)
        W = parallel_planes(P, origins, spacing=spacing)
        trace = retract(W)
        res = sampling_resolution(W)
        worst_phi = max(worst_phi, abs(trace.phi - 1))
        dirs = [plane_distance(ap.direction, P) for ap in trace.result]
        worst_dir = max([worst_dir] + dirs)
        got = np.array([ap.origin for ap in trace.result])
        if len(got) != len(origins):
            failures.append(f"instance {k}: {len(got)} planes for {len(origins)}")
            continue
        err = np.linalg.norm(origins[:, None] - got[None], axis=-1).min(axis=1).max()
        worst_origin = max(worst_origin, err / res)
    ok = not failures and worst_phi <= 1e-9 and worst_dir <= 1e-9 and worst_origin <= 2
    report(1, ok, f"20 unions: max|phi-1| = {worst_phi:.1e}, max direction error = {worst_dir:.1e}, "
                  f"max origin error = {worst_origin:.2e} x resolution {failures or ''}")


def test_criterion_2_sphere_closed_form(report):
    alpha = np.pi / 8
    cfg = RetractionConfig(delta=np.pi / 8, alpha=alpha)
    trace = retract(sphere([0, 0, 0], 0.5, 300), cfg)
    closed = (-7 + np.sqrt(57)) / 2
    f = lambda y: np.pi / 2 if y > 0.5 else 0.0
    oracle = brentq(lambda x: quad(f, x, 2 * x, points=[0.5])[0] / x + alpha * x - alpha, 1e-6, 1, xtol=1e-15)
    ok = abs(trace.phi - oracle) < 1e-6 and abs(trace.phi - closed) < 1e-6 and trace.result == []
    report(2, ok, f"phi = {trace.phi:.15f}, closed form {closed:.15f}, bisection oracle {oracle:.15f}, "
                  f"result planes = {len(trace.result)}")


def random_corpus(seed=3, size=100):
    rng = np.random.default_rng(seed)
    out = []
    heights = ["sin", "quadratic", "bump", "saddle"]
    while len(out) < size:
        kind = len(out) % 4
        n = int(rng.integers(2, 5))
        try:
            if kind == 0:
                d = int(rng.integers(1, min(n, 3)))
                base = Plane(np.linalg.qr(rng.standard_normal((n, n)))[0][:, :d])
                h = heights[int(rng.integers(0, 4))] if d > 1 else heights[int(rng.integers(0, 3))]
                off = base.complement().frame @ rng.uniform(-0.3, 0.3, n - d)
                out.append(graph(base, h, rng.uniform(0.01, 0.4), 150 if d == 1 else 300, offset=off))
            elif kind == 1:
                r = rng.uniform(0.1, 0.5)
                c = rng.standard_normal(n)
                c *= rng.uniform(0, 0.95 - r) / np.linalg.norm(c)
                out.append(sphere(c, r, max(2 * n, 120), seed=int(rng.integers(1 << 30))))
            elif kind == 2:
                d = int(rng.integers(1, n))
                P, origins, spacing = plane_union(rng, n, d, int(rng.integers(1, 4)))
                out.append(parallel_planes(P, origins, spacing=max(spacing, 0.1)))
            else:
                m = int(rng.integers(1, 30))
                X = rng.standard_normal((m, n))
                X *= (rng.uniform(0, 0.95, m) / np.linalg.norm(X, axis=1))[:, None]
                out.append(points(X))
        except GaussflatError:
            continue
    return out


def test_criterion_3_cutoff_inequality(report):
    cfg = RetractionConfig()
    ok_count = fails = 0
    worst = 0.0
    for W in random_corpus():
        try:
            value = phi(W, cfg)
        except GaussflatError:
            continue
        ok_count += 1
        diam = gauss_diameter(restrict(W, value))
        worst = max(worst, diam)
        fails += not diam < cfg.alpha
    report(3, fails == 0, f"phi succeeded on {ok_count}/100 instances; max diam at cutoff = {worst:.6f} "
                          f"< alpha = {cfg.alpha:.6f}; violations = {fails}")


def line_energy_oracle(angles, weights, lo, hi, step=1e-4):
    """Grid minimizer of sum w d^2 over line angles in R^2 (angles mod pi)."""
    grid = np.arange(lo, hi + step / 2, step)
    diff = (grid[:, None] - angles[None] + np.pi / 2) % np.pi - np.pi / 2
    return grid[np.argmin((weights * diff ** 2).sum(axis=1))]


def test_criterion_4_karcher_mean(report):
    rng = np.random.default_rng(4)
    worst_err = worst_grad = 0.0
    for _ in range(50):
        m = int(rng.integers(2, 9))
        c = rng.uniform(0, np.pi)
        angles = c + rng.uniform(-0.3, 0.3, m)
        radii = rng.uniform(0, 0.95, m)
        w = rng.uniform(0.2, 2, m)
        X = radii[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        F = np.stack([np.cos(angles), np.sin(angles)], axis=1)[:, :, None]
        W = SampledManifold(X, F, w)
        mu = karcher_mean(W)
        best = line_energy_oracle(angles, w * (1 - radii), c - 0.5, c + 0.5)
        oracle = Plane(np.array([[np.cos(best)], [np.sin(best)]]))
        worst_err = max(worst_err, plane_distance(mu, oracle))
        worst_grad = max(worst_grad, lambda_gradient(W, mu).norm)
    bound_viol, checked = 0, 0
    for W in random_corpus():
        try:
            V = shrink_stage(W, 0, phi(W))
        except GaussflatError:
            continue
        if len(V) == 0 or V.plane_dim == 0:
            continue
        mu = karcher_mean(V)
        checked += 1
        bound_viol += frame_distances(mu.frame[None], V.frames).max() > gauss_diameter(V) + 1e-8
    ok = worst_err < 1e-3 and worst_grad < 1e-8 and bound_viol == 0
    report(4, ok, f"50 Gr_1(R^2) means: max error vs grid oracle = {worst_err:.2e}, "
                  f"max first-order norm = {worst_grad:.1e}; mean-to-tangent bound held on {checked - bound_viol}/{checked}")


def random_graph(rng, m, n, d):
    X = rng.standard_normal((m, n)) * rng.uniform(0.1, 4)
    F = np.linalg.qr(rng.standard_normal((m, n, n)))[0][:, :, :d]
    return GaussGraph(compactify(X), F)


def test_criterion_5_hausdorff_oracle(report):
    rng = np.random.default_rng(5)
    pairs = []
    for _ in range(4):
        pairs.append((random_graph(rng, 2000, 2, 1), random_graph(rng, 2000, 2, 1)))
    W = graph(Plane.span(np.eye(3)[:, :1]), "sin", 0.1, 2000)
    pairs.append((gauss_graph(W), gauss_graph(perturb(W, 0.01, seed=1))))
    for _ in range(5):
        pairs.append((random_graph(rng, 800, 3, 2), random_graph(rng, 800, 3, 2)))
    while len(pairs) < 50:
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, n))
        pairs.append((random_graph(rng, int(rng.integers(1, 600)), n, d),
                      random_graph(rng, int(rng.integers(1, 600)), n, d)))
    t0 = time.perf_counter()
    worst = max(abs(hyper_distance(A, B) - hyper_distance_brute(A, B)) for A, B in pairs)
    elapsed = time.perf_counter() - t0
    sym = tri = ident = 0.0
    for k in range(500):
        n, d = [(2, 1), (3, 1), (3, 2), (4, 2)][k % 4]
        A, B, C = (random_graph(rng, int(rng.integers(0, 40)), n, d) for _ in range(3))
        ab, bc, ac = hyper_distance(A, B), hyper_distance(B, C), hyper_distance(A, C)
        sym = max(sym, abs(ab - hyper_distance(B, A)))
        tri = max(tri, ac - ab - bc)
        ident = max(ident, hyper_distance(A, A))
    ok = worst <= 1e-12 and sym <= 1e-9 and tri <= 1e-9 and ident <= 1e-9
    report(5, ok, f"50 pairs (up to 2000 points): max |tree - brute| = {worst:.1e} ({elapsed:.1f}s); "
                  f"500 triples: symmetry {sym:.1e}, triangle excess {max(tri, 0):.1e}, d(A,A) {ident:.1e}")


def test_criterion_6_smoothing_properties(report):
    rng = np.random.default_rng(6)
    x = np.linspace(0.01, 1, 100)
    bad = []
    zero = smooth_a(StepFunction(), 0.3)
    if not np.array_equal(zero(x), 0.3 * x):
        bad.append("a(0) != alpha x")
    for k in range(20):
        m = int(rng.integers(1, 8))
        b = np.sort(rng.choice(np.arange(0, 0.99, 0.01), m, replace=False))
        f = StepFunction(tuple(b), tuple(np.sort(rng.uniform(0, 2, m))))
        alpha = rng.uniform(0.01, 0.785)
        a = smooth_a(f, alpha)(x)
        if not (np.all(a >= f(x)) and np.all(a >= alpha * x) and np.all(np.diff(a) > 0)):
            bad.append(f"step function {k}")
    report(6, not bad, f"a(f) >= f, a(f) >= alpha x, strict increase on 100 points x 20 functions, "
                       f"a(0) = alpha x exactly; failures: {bad or 'none'}")


def circles(radii, count=400):
    parts = [sphere([0.0, 0.0], r, count) for r in radii]
    return SampledManifold(np.concatenate([p.points for p in parts]),
                           np.concatenate([p.frames for p in parts]),
                           np.concatenate([p.weights for p in parts]))


def test_criterion_7_covering_discriminator(report):
    eps = 0.1
    W = circles([0.5])
    double = covering_multiplicity(W, circles([0.5, 0.5 + eps / 4]), eps)
    same = covering_multiplicity(W, W, eps)
    moved = SampledManifold(W.points * 0.9 + [2 * eps, 0], W.frames, W.weights)
    away = covering_multiplicity(circles([0.45]), moved, eps)
    ok = np.all(double.counts == 2) and np.all(same.counts == 1) and np.all(away.counts == 0)
    report(7, ok, f"concentric circles {double.histogram()}, identity {same.histogram()}, "
                  f"2*eps translate {away.histogram()} (unmatched {away.unmatched}/{len(moved)})")


def probe_corpus():
    e2, e3 = np.eye(2), np.eye(3)
    unions = {
        "lines in R^2": parallel_planes(Plane.span(e2[:, :1]), [[0, 0.3], [0, -0.35]], spacing=0.02),
        "lines in R^3": parallel_planes(Plane.span(e3[:, :1]), [[0, 0.3, 0], [0, -0.3, 0.1]], spacing=0.05),
        "planes in R^3": parallel_planes(Plane.span(e3[:, :2]), [[0, 0, 0.3], [0, 0, -0.3]], spacing=0.05),
    }
    graphs = {
        "sine curve in R^2": graph(Plane.span(e2[:, :1]), "sin", 0.03, 200),
        "sine curve in R^3": graph(Plane.span(e3[:, :1]), "sin", 0.03, 200),
        "bump surface in R^3": graph(Plane.span(e3[:, :2]), "bump", 0.03, 400),
        "parabola in R^2": graph(Plane.span(e2[:, :1]), "quadratic", 0.03, 200, offset=[0, 0.2]),
    }
    return {**unions, **graphs}


def test_criterion_8_continuity_probes(report):
    bad, finals = [], []
    for name, W in probe_corpus().items():
        for seed in range(3):
            rep = probe_continuity(W, JITTERS, seed=seed)
            finals.append(max(rep.final.values()))
            if not (all(rep.non_increasing.values()) and all(rep.tends_to_zero.values())):
                bad.append(f"{name} seed {seed}")
    report(8, not bad, f"7 corpora x 3 seeds, jitters 2^-3..2^-10: all columns non-increasing, "
                       f"largest final delta {max(finals):.2e}; failures: {bad or 'none'}")


def test_criterion_9_zero_dimensional(report):
    rng = np.random.default_rng(9)
    bad = []
    for n in [1, 2, 3, 5]:
        X = rng.standard_normal((25, n))
        X *= (rng.uniform(0, 0.99, 25) / np.linalg.norm(X, axis=1))[:, None]
        trace = retract(points(X))
        got = {tuple(ap.origin) for ap in trace.result}
        if trace.phi != 1.0 or got != set(map(tuple, X)) or len(trace.result) != len(X):
            bad.append(n)
    report(9, not bad, f"0-planes in R^1, R^2, R^3, R^5: phi = 1 and positions bitwise unchanged; failures: {bad or 'none'}")


SHAPES = {
    "planes": '{"kind": "parallel_planes", "direction": [[1, 0, 0]], "origins": [[0, 0.3, 0], [0, -0.3, 0.1]], "spacing": 0.05}',
    "sphere": '{"kind": "sphere", "center": [0.1, 0, 0], "radius": 0.5, "count": 200}',
    "graph": '{"kind": "graph", "base": [[1, 0, 0]], "height": "sin", "amplitude": 0.05, "count": 200}',
}


def artifact_commands(d):
    cmds = []
    for name in SHAPES:
        cmds.append(["gen", "--input", f"{d}/{name}.shape", "--seed", "11", "--output", f"{d}/{name}.json"])
    for name in SHAPES:
        cmds.append(["flatten", "--input", f"{d}/{name}.json", "--output", f"{d}/{name}.trace.json"])
        cmds.append(["flatten", "--input", f"{d}/{name}.json", "--format", "csv", "--output", f"{d}/{name}.csv"])
        cmds.append(["theta", "--input", f"{d}/{name}.json", "--output", f"{d}/{name}.theta.csv"])
    cmds.append(["mean", "--input", f"{d}/graph.json", "--output", f"{d}/graph.mean.json"])
    cmds.append(["dist", "--input", f"{d}/graph.json", "--input", f"{d}/planes.json", "--output", f"{d}/dist.txt"])
    cmds.append(["probe", "--input", f"{d}/graph.json", "--seed", "5", "--output", f"{d}/probe.json"])
    return cmds


def test_criterion_10_determinism(report, tmp_path):
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        for name, text in SHAPES.items():
            (d / f"{name}.shape").write_text(text)
        for cmd in artifact_commands(d):
            if k == 0:
                assert main(cmd) == 0
            else:
                # second run in a fresh interpreter
                subprocess.run([sys.executable, "-m", "gaussflat", *cmd], check=True)
        runs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    same = runs[0] == runs[1]
    report(10, same, f"{len(runs[0])} artifact files from two runs (in-process and fresh interpreter) "
                     f"{'byte-identical' if same else 'differ'}")
