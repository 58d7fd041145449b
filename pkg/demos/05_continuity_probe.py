"""Empirical continuity of the pipeline.

The manifold is moved by a smooth seeded perturbation of decreasing size.
Each row shows how much phi, the mean plane and the flattened result
change; all three should shrink with the perturbation.
"""

import numpy as np

from gaussflat import Plane, graph, parallel_planes, probe_continuity
from gaussflat.cli import probe_csv

jitters = [2.0 ** -k for k in range(3, 11)]

W = parallel_planes(Plane.span(np.eye(3)[:, :1]), [[0, 0.3, 0], [0, -0.3, 0.1]], spacing=0.05)
report = probe_continuity(W, jitters, seed=0)
print("parallel lines")
print(probe_csv(report))
print("non-increasing:", report.non_increasing)

W = graph(Plane.span(np.eye(2)[:, :1]), "sin", 0.03, 200)
report = probe_continuity(W, jitters, seed=0)
print("\nsine curve")
print(probe_csv(report))
print("non-increasing:", report.non_increasing, " final:", report.final)
