"""Planes, distances and the weighted mean of tangent planes.

Run with ``python3 demos/01_grassmann_mean.py``.
"""

import numpy as np

from gaussflat import (
    Plane,
    SampledManifold,
    karcher_mean,
    lambda_energy,
    lambda_gradient,
    plane_distance,
    plane_exp,
    plane_log,
)


def line(angle):
    return Plane(np.array([[np.cos(angle)], [np.sin(angle)]]))


# Distances are the norm of the principal angles between two subspaces.
print("d(e1, e2)          =", plane_distance(line(0), line(np.pi / 2)))
print("d(e1, (e1+e2)/√2)  =", plane_distance(line(0), line(np.pi / 4)))

# Two coordinate planes of R^4 sharing nothing: both principal angles are pi/2.
P = Plane.span(np.eye(4)[:, :2])
Q = Plane.span(np.eye(4)[:, 2:])
print("d(P, Q) in Gr_2(R^4) =", plane_distance(P, Q), "= pi/sqrt(2) =", np.pi / np.sqrt(2))

# The log map gives the initial velocity of the geodesic; exp walks it back.
L, T = line(0.0), line(0.3)
D = plane_log(L, T)
print("|log_L(T)| =", D.norm, "; exp_L(log_L(T)) == T:", plane_exp(L, D) == T)

# A sampled manifold only needs points, tangent frames and weights for the
# energy. Here three lines at different radii; the mean weighs each by
# w * (1 - |x|), so samples near the origin count more.
angles = np.array([0.0, 0.2, 0.35])
radii = np.array([0.1, 0.5, 0.9])
W = SampledManifold(
    radii[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1),
    np.stack([np.cos(angles), np.sin(angles)], axis=1)[:, :, None],
    np.ones(3),
)
mu = karcher_mean(W)
angle = np.arctan2(mu.frame[1, 0], mu.frame[0, 0]) % np.pi
eff = 1 - radii
print(f"mean angle = {angle:.10f}; weighted average of angles = {np.sum(eff * angles) / eff.sum():.10f}")
print("gradient norm at the mean:", lambda_gradient(W, mu).norm)

# The energy is minimal there: nudging the mean either way increases it.
for step in [-0.01, 0.01]:
    print(f"energy at mean{step:+.2f}: {lambda_energy(W, line(angle + step)):.8f} "
          f"vs {lambda_energy(W, mu):.8f}")
