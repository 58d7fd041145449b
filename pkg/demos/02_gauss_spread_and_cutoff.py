"""How far the tangent planes spread, and where to cut the manifold.

``theta(W)`` records, as a function of the radius r, the diameter of the
set of tangent planes of the samples inside the ball of radius r. The
smoothed profile ``a(theta)`` is continuous and strictly increasing, and
``phi`` is the radius where it reaches alpha. Inside that radius the
tangent planes are within alpha of each other.
"""

import numpy as np

from gaussflat import (
    Plane,
    RetractionConfig,
    gauss_diameter,
    graph,
    phi,
    restrict,
    smooth_a,
    sphere,
    theta,
)

# A round sphere centred at the origin: every tangent appears at radius 1/2,
# and tangent planes at orthogonal points are pi/2 apart.
S = sphere([0, 0, 0], 0.5, 300)
f = theta(S)
print("sphere theta just below / above 1/2:", f(0.4999), f(0.5001))

# With alpha = pi/8 the cutoff solves x^2 + 7x - 2 = 0 on (1/4, 1/2).
cfg = RetractionConfig(alpha=np.pi / 8)
a = smooth_a(f, cfg.alpha)
for x in [0.1, 0.25, 0.3, 0.5]:
    print(f"a(theta)({x}) = {a(x):.6f}")
print("phi(sphere) =", phi(S, cfg), " closed form:", (-7 + np.sqrt(57)) / 2)
print("samples inside the cutoff:", len(restrict(S, phi(S, cfg))))

# A gently curved graph: the spread grows slowly with radius, so the cutoff
# lands well inside the ball and the surviving tangents are close together.
G = graph(Plane.span(np.eye(3)[:, :2]), "saddle", 0.15, 400)
cfg = RetractionConfig()
r = phi(G, cfg)
print(f"saddle: phi = {r:.6f}; Gauss diameter inside = {gauss_diameter(restrict(G, r)):.6f} "
      f"< alpha = {cfg.alpha:.6f}")
