"""The full flattening pipeline on three kinds of input.

``retract`` shrinks the manifold to the cutoff radius, averages its tangent
planes, squashes it along the mean plane and returns the limiting union of
parallel affine planes. Each stage is recorded in the trace.
"""

import numpy as np

from gaussflat import Plane, RetractionConfig, graph, parallel_planes, points, retract, sphere
from gaussflat.cli import emit_csv

# 1. A union of parallel lines is already flat: the pipeline gives it back.
P = Plane.span(np.eye(3)[:, :1])
W = parallel_planes(P, [[0, 0.4, 0], [0, -0.2, 0.3]], spacing=0.05)
trace = retract(W)
print("parallel lines: phi =", trace.phi)
for ap in trace.result:
    print("   plane through", ap.origin, "direction", ap.direction.frame[:, 0])

# 2. A sine curve: the cutoff keeps a nearly straight piece, which flattens
#    to a single line close to the horizontal axis.
W = graph(Plane.span(np.eye(2)[:, :1]), "sin", 0.05, 200)
trace = retract(W, RetractionConfig(stages=4))
print(f"\nsine curve: phi = {trace.phi:.6f}, margin = {trace.margin:.6f}")
print("result:", [(ap.origin.round(6).tolist(), ap.direction.frame[:, 0].round(6).tolist()) for ap in trace.result])
print("per-stage table:")
print(emit_csv(trace))

# 3. The sphere is cut before any of it survives: the result is empty.
trace = retract(sphere([0, 0, 0], 0.5, 200))
print("sphere result:", trace.result, "|", trace.diagnostics[-1])

# 4. Isolated points (d = 0) come back unchanged as 0-dimensional planes.
X = np.array([[0.1, 0.2], [-0.5, 0.3]])
trace = retract(points(X))
print("points:", [ap.origin.tolist() for ap in trace.result])
