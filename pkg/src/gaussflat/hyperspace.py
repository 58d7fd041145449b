"""Hausdorff distance between affine Gauss images.

A manifold ``W`` of R^n is sent to the compact set of pairs ``(x, T_xW)``
in ``S^n x Gr_d(R^n)`` (points compactified by inverse stereographic
projection) together with the collapsed class of ``{inf} x Gr``, the
*basepoint*. On the product we use chordal distance plus plane distance;
the collapse is metrized by ``d_q(u, v) = min(d(u, v), h(u) + h(v))`` with
``h`` the chordal distance to the north pole.

All distances are between finite samples, so they carry an error of the
order of the sampling resolution with respect to the underlying manifolds.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, EmptyReference, InvariantViolation
from .grassmann import frame_distances
from .manifold import ball_chart_push

_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class GaussGraph:
    """Finite subset of ``S^n x Gr_d(R^n)`` plus the basepoint.

    Attributes
    ----------
    sphere : ndarray, shape (m, n + 1)
        Unit vectors.
    frames : ndarray, shape (m, n, d)
        Tangent frames.
    """

    sphere: np.ndarray
    frames: np.ndarray

    def __post_init__(self):
        S = np.array(self.sphere, dtype=float)
        F = np.array(self.frames, dtype=float)
        if S.ndim != 2 or F.ndim != 3 or len(S) != len(F) or S.shape[1] != F.shape[1] + 1:
            raise InvariantViolation(f"inconsistent graph arrays: sphere {S.shape}, frames {F.shape}")
        if len(S):
            err = np.abs(np.linalg.norm(S, axis=1) - 1).max()
            if err > 1e-10:
                raise InvariantViolation(f"sphere points are not unit vectors (error {err:.3g})")
        S.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "sphere", S)
        object.__setattr__(self, "frames", F)

    @property
    def ambient_dim(self):
        return self.frames.shape[1]

    @property
    def plane_dim(self):
        return self.frames.shape[2]

    def __len__(self):
        """Number of points including the basepoint."""
        return len(self.sphere) + 1

    @property
    def pole_distance(self):
        """Chordal distance of each point to the north pole."""
        north = np.zeros(self.sphere.shape[1])
        north[-1] = 1.0
        return np.linalg.norm(self.sphere - north, axis=1)


def compactify(x, n=None):
    """Inverse stereographic projection ``R^n u {inf} -> S^n``.

    ``x`` may be a single point or a stack of points. ``None`` (or a scalar
    infinity) stands for the point at infinity and needs ``n``; it goes to
    the north pole. The origin goes to the south pole.
    """
    if x is None or (np.ndim(x) == 0 and np.isinf(x)):
        if n is None:
            raise InvariantViolation("the ambient dimension is needed to place infinity")
        p = np.zeros(n + 1)
        p[-1] = 1.0
        return p
    x = np.asarray(x, dtype=float)
    sq = np.sum(x * x, axis=-1, keepdims=True)
    return np.concatenate([2 * x, sq - 1], axis=-1) / (sq + 1)


def gauss_graph(W, ball_to_euclidean=None):
    """Affine Gauss image of ``W`` as a :class:`GaussGraph`.

    With ``ball_to_euclidean`` (the default for ball-domain manifolds) the
    samples are first pushed to R^n through ``x -> x / (1 - |x|)``, so a
    proper submanifold of the ball becomes a proper subset of R^n and its
    ends run off to the basepoint.
    """
    if ball_to_euclidean is None:
        ball_to_euclidean = W.domain == "ball"
    if ball_to_euclidean:
        if W.domain != "ball":
            raise InvariantViolation("only ball-domain manifolds can be pushed to R^n")
        W = ball_chart_push(W)
    return GaussGraph(compactify(W.points), W.frames)


def pair_distances(Sa, Fa, Sb, Fb):
    """Product distance ``|p - q| + d(L, M)`` (elementwise, broadcasting)."""
    return np.linalg.norm(Sa - Sb, axis=-1) + frame_distances(Fa, Fb)


def _check(A, B):
    if A.frames.shape[1:] != B.frames.shape[1:]:
        raise DimensionMismatch(
            f"graphs differ in (n, d): {A.frames.shape[1:]} vs {B.frames.shape[1:]}"
        )


def quotient_distance(A, i, B, j):
    """``d_q`` between point ``i`` of ``A`` and point ``j`` of ``B``.

    Index ``None`` selects the basepoint.
    """
    if i is None and j is None:
        return 0.0
    if i is None:
        return float(B.pole_distance[j])
    if j is None:
        return float(A.pole_distance[i])
    d = pair_distances(A.sphere[i], A.frames[i], B.sphere[j], B.frames[j])
    return float(min(d, A.pole_distance[i] + B.pole_distance[j]))


def _brute_matrix(A, B, chunk=1 << 20):
    """Full ``d_q`` matrix with the basepoints appended as last row/column."""
    ha, hb = A.pole_distance, B.pole_distance
    ma, mb = len(A.sphere), len(B.sphere)
    D = np.zeros((ma + 1, mb + 1))
    rows = max(1, chunk // max(1, mb))
    for s in range(0, ma, rows):
        blk = slice(s, min(s + rows, ma))
        d = pair_distances(A.sphere[blk, None], A.frames[blk, None], B.sphere[None], B.frames[None])
        D[blk, :mb] = np.minimum(d, ha[blk, None] + hb[None])
    D[:ma, mb] = ha
    D[ma, :mb] = hb
    return D


def hyper_distance_brute(A, B):
    """All-pairs Hausdorff distance under ``d_q`` (reference oracle)."""
    _check(A, B)
    D = _brute_matrix(A, B)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def _embed(G):
    """Sphere vector plus projection matrix / sqrt(2).

    Euclidean distance here is ``sqrt(c^2 + sum sin^2 theta_i)``, a lower
    bound for chordal + geodesic plane distance.
    """
    P = G.frames @ np.swapaxes(G.frames, 1, 2)
    return np.concatenate([G.sphere, _SQRT_HALF * P.reshape(len(P), -1)], axis=1)


def _directed(A, B):
    """``sup_a inf_b d_q(a, b)`` over A and B including basepoints."""
    ha = A.pole_distance
    if len(A.sphere) == 0:
        return 0.0
    if len(B.sphere) == 0:
        return float(ha.max())
    # against B's basepoint every a scores h(a), and h(a) + h(b) >= h(a),
    # so inf_b d_q(a, b) = min(h(a), min_b d(a, b))
    EA, EB = _embed(A), _embed(B)
    tree = cKDTree(EB)
    _, nn = tree.query(EA, k=1)
    upper = np.minimum(ha, pair_distances(A.sphere, A.frames, B.sphere[nn], B.frames[nn]))
    best = 0.0
    for i in np.argsort(-upper, kind="stable"):
        u = upper[i]
        if u <= best:
            break
        cand = tree.query_ball_point(EA[i], u * (1 + 1e-9) + 1e-12)
        if cand:
            cand = np.asarray(cand)
            d = pair_distances(A.sphere[i], A.frames[i], B.sphere[cand], B.frames[cand])
            u = min(u, float(d.min()))
        best = max(best, u)
    return best


def hyper_distance(A, B):
    """Hausdorff distance between two Gauss graphs.

    Uses a k-d tree over a lower-bounding Euclidean embedding to prune
    candidates; every surviving candidate is re-checked with the exact
    metric, so the value equals :func:`hyper_distance_brute`.
    """
    _check(A, B)
    return max(_directed(A, B), _directed(B, A))


def gauss_proximity(W, W2, r, method="tree"):
    """Directed C^1 proximity of ``W2`` to ``W`` inside the ball of radius ``r``.

    ``max`` over samples ``y`` of ``W2`` with ``|y| <= r`` of ``min`` over
    samples ``x`` of ``W`` of ``|x - y| + d(T_x, T_y)``; 0 when no sample of
    ``W2`` is in range.
    """
    if W.frames.shape[1:] != W2.frames.shape[1:]:
        raise DimensionMismatch("manifolds differ in ambient or plane dimension")
    targets = W2.subset(W2.radii <= r)
    if len(targets) == 0:
        return 0.0
    if len(W) == 0:
        raise EmptyReference(f"{len(targets)} samples within radius {r} but the reference is empty")
    X, FX, Y, FY = W.points, W.frames, targets.points, targets.frames
    if method == "brute":
        best = np.empty(len(Y))
        for k in range(len(Y)):
            best[k] = pair_distances(X, FX, Y[k], FY[k]).min()
        return float(best.max())
    tree = cKDTree(X)
    _, nn = tree.query(Y, k=1)
    upper = pair_distances(X[nn], FX[nn], Y, FY)
    best = 0.0
    for k in np.argsort(-upper, kind="stable"):
        u = upper[k]
        if u <= best:
            break
        cand = np.asarray(tree.query_ball_point(Y[k], u * (1 + 1e-9) + 1e-12))
        if cand.size:
            u = min(u, float(pair_distances(X[cand], FX[cand], Y[k], FY[k]).min()))
        best = max(best, u)
    return best
