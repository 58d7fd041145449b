"""Sampled proper submanifolds of the unit ball.

A submanifold is represented by a weighted cloud of (point, tangent plane,
d-volume weight) samples. That is all the downstream formulas consume:
energies integrate against the weights, Gauss statistics read the tangent
frames, and the deformations act on points and frames together.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, GeometryOutsideBall, InvariantViolation
from .grassmann import (
    ORTHONORMAL_TOL,
    Plane,
    frame_distances,
    frames_diameter,
    orthonormalize,
    pairwise_distances,
    unique_frames,
)

DOMAINS = ("ball", "euclidean")


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SampledManifold:
    """Weighted sample of a proper d-submanifold of R^n.

    Attributes
    ----------
    points : ndarray, shape (m, n)
    frames : ndarray, shape (m, n, d)
        Orthonormal tangent frames.
    weights : ndarray, shape (m,)
        Strictly positive d-volume weights.
    domain : {"ball", "euclidean"}
        Ball-domain samples all satisfy ``|x| < 1``.
    approximate_weights : bool
        Set when the weights were estimated from nearest neighbours rather
        than computed from the generating shape.
    """

    points: np.ndarray
    frames: np.ndarray
    weights: np.ndarray
    domain: str = "ball"
    approximate_weights: bool = False

    def __post_init__(self):
        X = np.array(self.points, dtype=float)
        F = np.array(self.frames, dtype=float)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if X.ndim != 2 or F.ndim != 3:
            raise InvariantViolation("points must be (m, n) and frames (m, n, d)")
        m, n = X.shape
        if F.shape[:2] != (m, n) or F.shape[2] > n or w.shape != (m,):
            raise InvariantViolation(
                f"inconsistent sample arrays: points {X.shape}, frames {F.shape}, weights {w.shape}"
            )
        if self.domain not in DOMAINS:
            raise InvariantViolation(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if m:
            if not np.all(np.isfinite(X)) or not np.all(np.isfinite(F)):
                raise InvariantViolation("non-finite sample data")
            if np.any(~(w > 0)):
                raise InvariantViolation("sample weights must be strictly positive")
            d = F.shape[2]
            gram = np.swapaxes(F, 1, 2) @ F - np.eye(d)
            defect = np.abs(gram).max(initial=0.0)
            if defect > ORTHONORMAL_TOL:
                raise InvariantViolation(f"tangent frames are not orthonormal (defect {defect:.3g})")
            if self.domain == "ball":
                radii = np.linalg.norm(X, axis=1)
                bad = np.flatnonzero(radii >= 1)
                if bad.size:
                    raise GeometryOutsideBall(
                        f"sample {bad[0]} has |x| = {radii[bad[0]]:.6g} >= 1 in a ball-domain manifold"
                    )
        object.__setattr__(self, "points", _readonly(X))
        object.__setattr__(self, "frames", _readonly(F))
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def empty(cls, n, d, domain="ball"):
        return cls(np.zeros((0, n)), np.zeros((0, n, d)), np.zeros(0), domain)

    @property
    def ambient_dim(self):
        return self.points.shape[1]

    @property
    def plane_dim(self):
        return self.frames.shape[2]

    @property
    def radii(self):
        return np.linalg.norm(self.points, axis=1)

    def __len__(self):
        return self.points.shape[0]

    def tangent(self, i):
        return Plane(self.frames[i])

    def subset(self, index):
        """Samples selected by a boolean mask or an index array."""
        return SampledManifold(
            self.points[index], self.frames[index], self.weights[index],
            self.domain, self.approximate_weights,
        )

    def same_samples(self, other):
        """Bitwise equality of all sample data."""
        return (
            self.domain == other.domain
            and self.points.shape == other.points.shape
            and self.frames.shape == other.frames.shape
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.frames, other.frames)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class AffinePlane:
    """Affine plane ``origin + direction`` with the origin in direction-perp."""

    direction: Plane
    origin: np.ndarray

    def __post_init__(self):
        c = np.array(self.origin, dtype=float).reshape(-1)
        if c.shape != (self.direction.ambient_dim,):
            raise DimensionMismatch(f"origin has shape {c.shape}, expected ({self.direction.ambient_dim},)")
        F = self.direction.frame
        along = np.linalg.norm(F.T @ c)
        if along > 1e-9:
            raise InvariantViolation(f"origin is not orthogonal to the direction (|P^T c| = {along:.3g})")
        object.__setattr__(self, "origin", _readonly(c))

    @classmethod
    def through(cls, direction, point):
        """The affine plane parallel to ``direction`` through ``point``."""
        p = np.asarray(point, dtype=float)
        F = direction.frame
        return cls(direction, p - F @ (F.T @ p))


@dataclass(frozen=True)
class StepFunction:
    """Non-decreasing step function on [0, 1) vanishing at 0.

    ``values[k]`` holds on the half-open interval ``(breakpoints[k],
    breakpoints[k+1]]``; the function is 0 up to and including the first
    breakpoint and equal to ``values[-1]`` past the last one. Left-open
    pieces match the strict inequality used when restricting to a ball, so
    ``theta(W)(r)`` is exactly the diameter over samples with ``|x| < r``.
    """

    breakpoints: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        v = tuple(float(x) for x in self.values)
        if len(b) != len(v):
            raise InvariantViolation("breakpoints and values differ in length")
        if any(x < 0 or x >= 1 for x in b):
            raise InvariantViolation("breakpoints must lie in [0, 1)")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise InvariantViolation("breakpoints must be strictly increasing")
        if any(x < 0 for x in v) or any(v2 < v1 for v1, v2 in zip(v, v[1:])):
            raise InvariantViolation("values must be non-negative and non-decreasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @property
    def is_zero(self):
        return not any(self.values)

    @property
    def limit_at_zero(self):
        """Right limit at 0."""
        if self.breakpoints and self.breakpoints[0] == 0.0:
            return self.values[0]
        return 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        b = np.asarray(self.breakpoints)
        table = np.concatenate([[0.0], self.values])
        k = np.searchsorted(b, x, side="left")
        out = table[k]
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, x):
        """Closed-form integral of the function over [0, x], constant past the end."""
        x = np.asarray(x, dtype=float)
        if not self.breakpoints:
            return np.zeros_like(x) if x.ndim else 0.0
        b = np.asarray(self.breakpoints)
        v = np.asarray(self.values)
        upper = np.append(b[1:], np.inf)
        lengths = np.clip(x[..., None], b, upper) - b
        out = lengths @ v
        return float(out) if np.ndim(out) == 0 else out


# -- construction -----------------------------------------------------------

def _tangent_complement(u):
    """Orthonormal frames of the hyperplanes orthogonal to unit vectors ``u``."""
    U, _, _ = np.linalg.svd(u[:, :, None], full_matrices=True)
    return U[:, :, 1:]


def _lattice(d, spacing, radius):
    """Lattice points ``spacing * Z^d`` in the closed d-ball of ``radius``."""
    if d == 0:
        return np.zeros((1, 0))
    k = int(np.floor(radius / spacing + 1e-12))
    ticks = spacing * np.arange(-k, k + 1)
    grid = np.array(list(itertools.product(ticks, repeat=d)))
    return grid[np.linalg.norm(grid, axis=1) <= radius + 1e-12]


def _aligned_frame(direction, reference):
    if reference is None or direction.plane_dim == 0:
        return direction.frame
    F = direction.frame
    return orthonormalize(F @ (F.T @ reference.frame))


def sample_affine_planes(planes, spacing, reference=None, extent=None, count=None):
    """Lattice samples of a union of affine planes inside the open unit ball.

    Parameters
    ----------
    planes : sequence of AffinePlane
        All with the same dimension.
    spacing : float
        Lattice step inside each plane.
    reference : Plane, optional
        In-plane lattice axes are taken from the polar alignment of each
        direction to this frame, so nearby directions give nearby lattices.
    extent : float, optional
        Only keep lattice points within this in-plane distance of the origin.
    count : int, optional
        Keep exactly this many samples per plane, nearest to the origin first.
    """
    planes = list(planes)
    if not planes:
        raise InvariantViolation("at least one plane is needed to fix the dimensions")
    n, d = planes[0].direction.frame.shape
    pts, frs, wts = [], [], []
    for ap in planes:
        c = ap.origin
        F = _aligned_frame(ap.direction, reference)
        reach = np.sqrt(max(0.0, 1.0 - c @ c))
        if extent is not None:
            reach = min(reach, extent)
        u = _lattice(d, spacing, reach)
        if d:
            u = u[np.argsort(np.linalg.norm(u, axis=1), kind="stable")]
        x = c + u @ F.T
        x = x[np.linalg.norm(x, axis=1) < 1.0 - 1e-12]
        if count is not None:
            if len(x) < count:
                raise GeometryOutsideBall(
                    f"only {len(x)} lattice points of the plane at origin {c.tolist()} fit in the ball"
                )
            x = x[:count]
        pts.append(x)
        frs.append(np.broadcast_to(F, (len(x), n, d)))
        wts.append(np.full(len(x), spacing ** d))
    return SampledManifold(np.concatenate(pts), np.concatenate(frs), np.concatenate(wts))


def parallel_planes(direction, origins, samples_per_plane=None, extent=None, spacing=0.1):
    """Sampled union of affine planes parallel to ``direction``.

    Origins are projected onto the orthogonal complement of the direction.
    Without ``samples_per_plane`` every lattice point inside the ball is kept,
    so the sample covers each plane's intersection with the ball.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    if origins.shape[1] != direction.ambient_dim:
        raise DimensionMismatch("origins must live in the ambient space of the direction")
    for c in origins:
        if np.linalg.norm(c - direction.frame @ (direction.frame.T @ c)) >= 1:
            raise GeometryOutsideBall(f"plane with origin {c.tolist()} misses the open unit ball")
    if direction.plane_dim == 0:
        samples_per_plane = None if samples_per_plane in (None, 1) else samples_per_plane
    planes = [AffinePlane.through(direction, c) for c in origins]
    return sample_affine_planes(planes, spacing, extent=extent, count=samples_per_plane)


def sphere(center, radius, count, seed=0):
    """Round (n-1)-sphere in R^n, tangents exact, equal weights.

    The circle case (n = 2) is a uniform angular lattice starting on the
    first axis. For n >= 3 the 2n axis points are always included (so
    antipodal and orthogonal tangent pairs are present) and the rest are
    seeded uniform directions.
    """
    c = np.asarray(center, dtype=float)
    n = c.shape[0]
    if n < 2:
        raise DimensionMismatch("a sphere needs ambient dimension at least 2")
    if not radius > 0:
        raise InvariantViolation("radius must be positive")
    if np.linalg.norm(c) + radius >= 1:
        raise GeometryOutsideBall(f"sphere of radius {radius} around {c.tolist()} leaves the unit ball")
    if n == 2:
        t = 2 * np.pi * np.arange(count) / count
        u = np.stack([np.cos(t), np.sin(t)], axis=1)
    else:
        if count < 2 * n:
            raise InvariantViolation(f"need at least {2 * n} samples on a sphere in R^{n}")
        axes = np.concatenate([np.eye(n), -np.eye(n)])
        g = np.random.default_rng(seed).standard_normal((count - 2 * n, n))
        u = np.concatenate([axes, g / np.linalg.norm(g, axis=1, keepdims=True)])
    area = 2 * np.pi ** (n / 2) / math.gamma(n / 2) * radius ** (n - 1)
    return SampledManifold(c + radius * u, _tangent_complement(u), np.full(len(u), area / len(u)))


def _sin(u):
    return np.sin(3 * u).sum(axis=1), 3 * np.cos(3 * u)


def _quadratic(u):
    return (u * u).sum(axis=1), 2 * u


def _bump(u):
    e = np.exp(-4 * (u * u).sum(axis=1))
    return e, -8 * u * e[:, None]


def _saddle(u):
    sign = np.zeros(u.shape[1])
    sign[0] = 1.0
    sign[1:2] = -1.0
    return (sign * u * u).sum(axis=1), 2 * sign * u


# height functions for graphs: (m, d) inputs -> values (m,), gradients (m, d)
HEIGHTS = {"sin": _sin, "quadratic": _quadratic, "bump": _bump, "saddle": _saddle}


def graph(base, height, amplitude, count, offset=None, normal=None):
    """Graph ``u -> offset + u + amplitude * h(u) * normal`` over ``base``.

    ``u`` runs over a lattice of about ``count`` points (per-axis resolution
    ``count ** (1/d)``) in the square ``[-1, 1]^d`` of base coordinates;
    points outside the unit ball are dropped.
    """
    n, d = base.frame.shape
    if d == 0 or d == n:
        raise DimensionMismatch("a graph needs 0 < d < n")
    if height not in HEIGHTS:
        raise InvariantViolation(f"unknown height function {height!r}; choose from {sorted(HEIGHTS)}")
    height_fn = HEIGHTS[height]
    comp = base.complement().frame
    nu = comp[:, 0] if normal is None else np.asarray(normal, dtype=float)
    nu = nu - base.frame @ (base.frame.T @ nu)
    nu = nu / np.linalg.norm(nu)
    c = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    c = c - base.frame @ (base.frame.T @ c)

    k = max(3, int(round(count ** (1.0 / d))))
    k += 1 - k % 2
    spacing = 2.0 / (k - 1)
    ticks = np.linspace(-1.0, 1.0, k)
    u = np.array(list(itertools.product(ticks, repeat=d)))
    value, slope = height_fn(u)
    x = c + u @ base.frame.T + amplitude * value[:, None] * nu
    keep = np.linalg.norm(x, axis=1) < 1.0 - 1e-12
    x, g = x[keep], amplitude * slope[keep]
    J = base.frame[None] + nu[None, :, None] * g[:, None, :]
    jac = np.sqrt(1.0 + (g * g).sum(axis=1))
    return SampledManifold(x, orthonormalize(J), spacing ** d * jac)


def points(positions, n=None):
    """0-dimensional manifold: isolated points with unit weight."""
    X = np.asarray(positions, dtype=float)
    if X.size == 0:
        return SampledManifold.empty(n or 1, 0)
    X = np.atleast_2d(X)
    if np.any(np.linalg.norm(X, axis=1) >= 1):
        raise GeometryOutsideBall("points must lie in the open unit ball")
    return SampledManifold(X, np.zeros(X.shape + (0,)), np.ones(len(X)))


def _plane_arg(obj, n=None):
    if isinstance(obj, Plane):
        return obj
    A = np.asarray(obj, dtype=float)
    if A.size == 0:
        return Plane.zero(n)
    # JSON lists columns, matching the plane file format
    return Plane.span(np.atleast_2d(A).T)


def generate(spec, seed=0):
    """Build a sampled manifold from a shape description.

    ``spec`` is a mapping with a ``"kind"`` key, one of ``parallel_planes``,
    ``sphere``, ``graph`` or ``points``; remaining keys are the keyword
    arguments of the function of that name. Planes may be given as
    :class:`Plane` objects or as column lists. Output is a pure function of
    ``(spec, seed)``.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        return _generate(kind, spec, seed)
    except (KeyError, TypeError) as exc:
        raise InvariantViolation(f"bad {kind!r} shape description: {exc}") from exc


def _generate(kind, spec, seed):
    if kind == "parallel_planes":
        origins = np.atleast_2d(np.asarray(spec.pop("origins"), dtype=float))
        direction = _plane_arg(spec.pop("direction"), origins.shape[1])
        return parallel_planes(direction, origins, **spec)
    if kind == "sphere":
        return sphere(seed=seed, **spec)
    if kind == "graph":
        base = _plane_arg(spec.pop("base"))
        return graph(base, **spec)
    if kind == "points":
        return points(spec.pop("positions"), **spec)
    raise InvariantViolation(f"unknown shape kind {kind!r}")


# -- operations ---------------------------------------------------------------

def restrict(W, r):
    """Samples strictly inside the ball of radius ``r``."""
    return W.subset(W.radii < r)


def gauss_diameter(W):
    """Diameter of the Gauss image; 0 for empty and single-plane images."""
    return frames_diameter(W.frames)


def theta(W):
    """Exact step function ``r -> gauss_diameter(restrict(W, r))``.

    Samples are added in order of increasing radius while the running
    diameter of the Gauss image is maintained against the distinct planes
    already seen.
    """
    uniq, inverse = unique_frames(W.frames)
    if len(uniq) < 2:
        return StepFunction()
    D = pairwise_distances(uniq)
    radii = W.radii
    order = np.argsort(radii, kind="stable")
    seen = np.zeros(len(uniq), dtype=bool)
    current = 0.0
    breaks, values = [], []
    for i in order:
        j = inverse[i]
        if seen[j]:
            continue
        if seen.any():
            reach = D[j, seen].max()
            if reach > current:
                current = float(reach)
                if breaks and breaks[-1] == radii[i]:
                    values[-1] = current
                else:
                    breaks.append(float(radii[i]))
                    values.append(current)
        seen[j] = True
    return StepFunction(tuple(breaks), tuple(values))


def _push_frames(F, J):
    """Push frames through stacked linear maps; returns (frames, volume factors)."""
    JF = J @ F
    if F.shape[-1] == 0:
        return JF, np.ones(len(F))
    vol = np.prod(np.linalg.svd(JF, compute_uv=False), axis=-1)
    return orthonormalize(JF), vol


def _radial_jacobians(X, radial, tangential):
    """``tangential * (I - xx^T/|x|^2) + radial * xx^T/|x|^2`` for each row."""
    n = X.shape[1]
    r = np.linalg.norm(X, axis=1)
    xhat = np.divide(X, r[:, None], out=np.zeros_like(X), where=r[:, None] > 0)
    outer = xhat[:, :, None] * xhat[:, None, :]
    return tangential[:, None, None] * np.eye(n) + (radial - tangential)[:, None, None] * outer


def ball_chart_pull(W):
    """Pull a manifold of R^n back into the unit ball along ``x / (1 - |x|)``.

    Points map by ``x -> x / (1 + |x|)``; frames and weights go through the
    Jacobian of that map (radial factor ``1/(1+|x|)^2``, tangential
    ``1/(1+|x|)``).
    """
    X = W.points
    r = np.linalg.norm(X, axis=1)
    J = _radial_jacobians(X, 1.0 / (1.0 + r) ** 2, 1.0 / (1.0 + r))
    F, vol = _push_frames(W.frames, J)
    Y = X / (1.0 + r)[:, None]
    return SampledManifold(Y, F, W.weights * vol, "ball", W.approximate_weights)


def ball_chart_push(W):
    """Inverse of :func:`ball_chart_pull`: ball samples to R^n via ``x / (1 - |x|)``."""
    X = W.points
    r = np.linalg.norm(X, axis=1)
    J = _radial_jacobians(X, 1.0 / (1.0 - r) ** 2, 1.0 / (1.0 - r))
    F, vol = _push_frames(W.frames, J)
    Y = X / (1.0 - r)[:, None]
    return SampledManifold(Y, F, W.weights * vol, "euclidean", W.approximate_weights)


def _components(X, radius):
    """Single-linkage component labels of the rows of ``X``."""
    if len(X) == 0:
        return 0, np.zeros(0, dtype=int)
    if len(X) == 1:
        return 1, np.zeros(1, dtype=int)
    pairs = cKDTree(X).query_pairs(radius, output_type="ndarray")
    adj = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])) if len(pairs) else ([], ([], [])),
        shape=(len(X), len(X)),
    )
    return connected_components(adj, directed=False)


@dataclass
class CoveringReport:
    counts: np.ndarray
    unmatched: int
    matched: list = field(default_factory=list, repr=False)

    def histogram(self):
        values, freq = np.unique(self.counts, return_counts=True)
        return {int(v): int(f) for v, f in zip(values, freq)}


def covering_multiplicity(W, W2, eps, sheet_radius=None):
    """Count the sheets of ``W2`` lying over each sample of ``W``.

    A sample y of ``W2`` lies over x when ``|x - y| + d(T_x, T_y) < eps``.
    The normal components of the displacements ``y - x`` are grouped by
    single linkage at ``sheet_radius`` (default ``eps / 8``); each group is
    one sheet. Also reports how many samples of ``W2`` lie over no sample.
    """
    if W.frames.shape[1:] != W2.frames.shape[1:]:
        raise DimensionMismatch("manifolds differ in ambient or plane dimension")
    if len(W) == 0:
        raise InvariantViolation("the reference manifold must be non-empty")
    sheet_radius = eps / 8 if sheet_radius is None else sheet_radius
    counts = np.zeros(len(W), dtype=int)
    hit = np.zeros(len(W2), dtype=bool)
    matched = []
    if len(W2):
        tree = cKDTree(W2.points)
        for i, (x, F) in enumerate(zip(W.points, W.frames)):
            cand = np.asarray(tree.query_ball_point(x, eps), dtype=int)
            if cand.size:
                disp = W2.points[cand] - x
                score = np.linalg.norm(disp, axis=1) + frame_distances(F[None], W2.frames[cand])
                cand, disp = cand[score < eps], disp[score < eps]
            matched.append(cand)
            if cand.size == 0:
                continue
            hit[cand] = True
            normal = disp - (disp @ F) @ F.T
            counts[i] = _components(normal, sheet_radius)[0]
    return CoveringReport(counts, int(np.count_nonzero(~hit)), matched)


def sampling_resolution(W):
    """Largest nearest-neighbour gap; 0 for point clouds and tiny samples."""
    if W.plane_dim == 0 or len(W) < 2:
        return 0.0
    dist, _ = cKDTree(W.points).query(W.points, k=2)
    return float(dist[:, 1].max())


def estimate_weights(X, d, k=None):
    """k-nearest-neighbour d-volume estimate per sample (k = d + 2 by default).

    Each sample gets ``vol(B^d(r_k)) / k`` with ``r_k`` the distance to its
    k-th neighbour.
    """
    X = np.asarray(X, dtype=float)
    if d == 0:
        return np.ones(len(X))
    k = d + 2 if k is None else k
    k = min(k, len(X) - 1)
    if k < 1:
        return np.ones(len(X))
    dist, _ = cKDTree(X).query(X, k=k + 1)
    r = dist[:, -1]
    ball = np.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return np.maximum(ball * r ** d / k, np.finfo(float).tiny)


def perturb(W, eps, seed=0):
    """Smooth seeded perturbation of size ``eps``.

    Applies the affine map ``x -> x + eps (A x + b)`` with ``|A| = |b| =
    1/2`` drawn from ``seed``; frames and weights follow its derivative, so
    the result is C^1-close to ``W`` and tangents stay exact. Samples pushed
    out of the ball are dropped. The direction of the perturbation depends
    only on the seed, so shrinking ``eps`` moves along a single ray.
    """
    if eps == 0:
        return W
    rng = np.random.default_rng(seed)
    n = W.ambient_dim
    A = rng.standard_normal((n, n))
    A *= 0.5 / np.linalg.norm(A, 2)
    b = rng.standard_normal(n)
    b *= 0.5 / np.linalg.norm(b)
    L = np.eye(n) + eps * A
    Y = W.points @ L.T + eps * b
    F, vol = _push_frames(W.frames, np.broadcast_to(L, (len(W), n, n)))
    out = SampledManifold(Y, F, W.weights * vol, "euclidean", W.approximate_weights)
    if W.domain == "ball":
        keep = np.linalg.norm(Y, axis=1) < 1
        out = SampledManifold(Y[keep], F[keep], out.weights[keep], "ball", W.approximate_weights)
    return out
