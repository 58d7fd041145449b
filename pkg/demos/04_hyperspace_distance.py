"""Comparing manifolds through their affine Gauss images.

Each sample becomes a pair (point on the sphere S^n, tangent plane); the
point at infinity collapses all planes into a single basepoint. The
Hausdorff distance between two such sets is computed with a k-d tree and
matches the all-pairs computation exactly.
"""

import time

import numpy as np

from gaussflat import (
    Plane,
    compactify,
    covering_multiplicity,
    gauss_graph,
    gauss_proximity,
    graph,
    hyper_distance,
    hyper_distance_brute,
    parallel_planes,
    perturb,
    sphere,
)

print("compactify(0) =", compactify([0.0, 0.0]), " compactify(inf) =", compactify(None, 2))

W = graph(Plane.span(np.eye(3)[:, :2]), "bump", 0.1, 1600)
A = gauss_graph(W)
for eps in [0.1, 0.01, 0.001]:
    B = gauss_graph(perturb(W, eps, seed=0))
    t = time.perf_counter()
    fast = hyper_distance(A, B)
    t_fast = time.perf_counter() - t
    t = time.perf_counter()
    slow = hyper_distance_brute(A, B)
    t_slow = time.perf_counter() - t
    print(f"perturbation {eps:<6}: distance {fast:.6f} (tree {t_fast:.2f}s, brute {slow:.6f} in {t_slow:.2f}s)")

# Directed C^1 proximity: a flat plane and its translate by 0.03.
P = Plane.span(np.eye(3)[:, :2])
flat = parallel_planes(P, [[0, 0, 0]], spacing=0.05)
moved = parallel_planes(P, [[0, 0, 0.03]], spacing=0.05)
print("proximity of a translate by 0.03:", gauss_proximity(flat, moved, 0.9))

# Counting sheets: a circle against two concentric circles eps/4 apart.
eps = 0.1
circle = sphere([0, 0], 0.5, 400)
outer = sphere([0, 0], 0.5 + eps / 4, 400)
double = type(circle)(np.concatenate([circle.points, outer.points]),
                      np.concatenate([circle.frames, outer.frames]),
                      np.concatenate([circle.weights, outer.weights]))
print("sheets over each sample:", covering_multiplicity(circle, double, eps).histogram())
