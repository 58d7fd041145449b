"""Geometry of the Grassmannian Gr_d(R^n) of d-planes in R^n.

Planes are carried by orthonormal n x d frames. The metric is the
principal-angle (geodesic) metric: the distance between two planes is the
Euclidean norm of the vector of principal angles between them. Geodesic
exp/log use the standard horizontal-lift formulas.

Besides the single-pair functions there are batched helpers operating on
stacks of frames of shape ``(..., n, d)``; the manifold and hyperspace
modules lean on these for pairwise scans.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BaseMismatch,
    DiameterTooLarge,
    DimensionMismatch,
    EmptyManifold,
    GeometryOutsideBall,
    InvariantViolation,
    NonpositiveDelta,
    OutOfInjectivityRange,
)

ORTHONORMAL_TOL = 1e-10
PLANE_EQ_TOL = 1e-9
JSON_DEFECT_TOL = 1e-6

DEFAULT_DELTA = np.pi / 8
KARCHER_STEP_TOL = 1e-10
KARCHER_MAX_ITER = 200

# principal angles above this cosine are read off the sines instead
_COS_SWITCH = np.sqrt(0.5)


def orthonormalize(F):
    """Polar factor of ``F`` (stacked ok): the closest orthonormal frame.

    Unlike QR this is smooth in ``F`` and leaves an already orthonormal
    frame (numerically) in place, so frames pushed through nearby linear
    maps stay nearby as matrices, not just as subspaces.
    """
    F = np.asarray(F, dtype=float)
    if F.shape[-1] == 0:
        return F.copy()
    U, _, Vt = np.linalg.svd(F, full_matrices=False)
    return U @ Vt


@dataclass(frozen=True, eq=False)
class Plane:
    """A d-dimensional linear subspace of R^n.

    Two ``Plane`` objects compare equal when their projection matrices agree
    within ``PLANE_EQ_TOL``; the frame itself is only a representative.
    """

    frame: np.ndarray

    def __post_init__(self):
        F = np.array(self.frame, dtype=float)
        if F.ndim != 2 or F.shape[1] > F.shape[0] or F.shape[0] < 1:
            raise InvariantViolation(f"frame must be n x d with 0 <= d <= n, got shape {F.shape}")
        defect = np.abs(F.T @ F - np.eye(F.shape[1])).max(initial=0.0)
        if defect > ORTHONORMAL_TOL:
            raise InvariantViolation(f"frame is not orthonormal (defect {defect:.3g})")
        F.setflags(write=False)
        object.__setattr__(self, "frame", F)

    @classmethod
    def span(cls, vectors):
        """Plane spanned by the columns of ``vectors`` (n x d, full rank)."""
        A = np.asarray(vectors, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        if A.shape[1] and np.linalg.matrix_rank(A) < A.shape[1]:
            raise InvariantViolation("spanning vectors are linearly dependent")
        return cls(orthonormalize(A))

    @classmethod
    def zero(cls, n):
        """The unique 0-plane of R^n."""
        return cls(np.zeros((n, 0)))

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def plane_dim(self):
        return self.frame.shape[1]

    @property
    def projection(self):
        return self.frame @ self.frame.T

    def complement(self):
        """Orthogonal complement as a Plane of dimension n - d."""
        n, d = self.frame.shape
        if d == 0:
            return Plane(np.eye(n))
        U, _, _ = np.linalg.svd(self.frame, full_matrices=True)
        return Plane(U[:, d:])

    def __eq__(self, other):
        if not isinstance(other, Plane):
            return NotImplemented
        if self.frame.shape != other.frame.shape:
            return False
        return bool(np.abs(self.projection - other.projection).max(initial=0.0) <= PLANE_EQ_TOL)

    __hash__ = None

    def __repr__(self):
        return f"Plane(n={self.ambient_dim}, d={self.plane_dim})"


@dataclass(frozen=True, eq=False)
class PlaneTangent:
    """Horizontal tangent vector ``delta`` (n x d) at ``base``."""

    base: Plane
    delta: np.ndarray

    def __post_init__(self):
        D = np.array(self.delta, dtype=float)
        if D.shape != self.base.frame.shape:
            raise DimensionMismatch(f"tangent shape {D.shape} != frame shape {self.base.frame.shape}")
        vertical = np.abs(self.base.frame.T @ D).max(initial=0.0)
        if vertical > ORTHONORMAL_TOL * max(1.0, np.linalg.norm(D)):
            raise InvariantViolation(f"tangent is not horizontal (|Y^T D| = {vertical:.3g})")
        D.setflags(write=False)
        object.__setattr__(self, "delta", D)

    @property
    def norm(self):
        return float(np.linalg.norm(self.delta))

    def __mul__(self, c):
        return PlaneTangent(self.base, float(c) * self.delta)

    __rmul__ = __mul__


# -- batched kernels ----------------------------------------------------------

def principal_angles(A, B):
    """Principal angles (ascending) between stacked frames ``A`` and ``B``.

    Cosines come from the singular values of ``A^T B`` and sines from those
    of ``B - A A^T B``; each angle is read from whichever is better
    conditioned. Pairs with bitwise identical frames get exactly zero.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d = A.shape[-1]
    shape = np.broadcast_shapes(A.shape, B.shape)[:-2]
    if d == 0:
        return np.zeros(shape + (0,))
    A, B = _canonical_order(A, B)
    M = np.swapaxes(A, -1, -2) @ B
    N = B - A @ M
    if d == 1:
        cos = np.abs(M[..., 0, :])
        sin = np.linalg.norm(N, axis=-2)
        theta = np.arctan2(sin, cos)
    elif d == 2:
        cos = np.clip(_singular_values_2x2(M), 0.0, 1.0)
        sin = np.clip(_singular_values_2x2(_triangular_factor(N))[..., ::-1], 0.0, 1.0)
        theta = np.where(cos >= _COS_SWITCH, np.arcsin(sin), np.arccos(cos))
    else:
        cos = np.clip(np.linalg.svd(M, compute_uv=False), 0.0, 1.0)
        sin = np.clip(np.linalg.svd(N, compute_uv=False)[..., ::-1], 0.0, 1.0)
        theta = np.where(cos >= _COS_SWITCH, np.arcsin(sin), np.arccos(cos))
    same = np.all(A == B, axis=(-2, -1))
    return np.where(same[..., None], 0.0, theta)


def _canonical_order(A, B):
    """Swap each pair so the lexicographically smaller frame comes first.

    Makes every distance bitwise symmetric in its arguments.
    """
    A, B = np.broadcast_arrays(A, B)
    if A.size == 0:
        return A, B
    a = A.reshape(A.shape[:-2] + (-1,))
    b = B.reshape(B.shape[:-2] + (-1,))
    first = np.argmax(a != b, axis=-1)[..., None]
    swap = (np.take_along_axis(a, first, -1) > np.take_along_axis(b, first, -1))[..., None]
    return np.where(swap, B, A), np.where(swap, A, B)


def _singular_values_2x2(M):
    """Descending singular values of stacked 2 x 2 matrices, closed form."""
    a, b = M[..., 0, 0], M[..., 0, 1]
    c, d = M[..., 1, 0], M[..., 1, 1]
    p = np.hypot(a + d, c - b)
    q = np.hypot(a - d, c + b)
    return np.stack([(p + q) / 2, np.abs(p - q) / 2], axis=-1)


def _triangular_factor(N):
    """R factor (2 x 2) of stacked n x 2 matrices by Gram-Schmidt."""
    n1, n2 = N[..., :, 0], N[..., :, 1]
    r11 = np.linalg.norm(n1, axis=-1)
    q1 = np.divide(n1, r11[..., None], out=np.zeros_like(n1), where=r11[..., None] > 0)
    r12 = np.sum(q1 * n2, axis=-1)
    r22 = np.linalg.norm(n2 - r12[..., None] * q1, axis=-1)
    R = np.zeros(N.shape[:-2] + (2, 2))
    R[..., 0, 0], R[..., 0, 1], R[..., 1, 1] = r11, r12, r22
    return R


def frame_distances(A, B):
    """Geodesic distances between stacked frames (broadcasting)."""
    theta = principal_angles(A, B)
    return np.sqrt(np.sum(theta * theta, axis=-1))


def pairwise_distances(frames, others=None, chunk=4096):
    """Distance matrix between two stacks of frames ``(m, n, d)``."""
    frames = np.asarray(frames, dtype=float)
    others = frames if others is None else np.asarray(others, dtype=float)
    out = np.empty((len(frames), len(others)))
    rows = max(1, chunk // max(1, len(others)))
    for start in range(0, len(frames), rows):
        block = frames[start:start + rows, None]
        out[start:start + rows] = frame_distances(block, others[None])
    return out


def unique_frames(frames):
    """Deduplicate bitwise-identical frames.

    Returns ``(unique, inverse)`` with ``frames[i]`` identical to
    ``unique[inverse[i]]``; order of first appearance is kept.
    """
    frames = np.ascontiguousarray(frames, dtype=float)
    if len(frames) == 0:
        return frames, np.zeros(0, dtype=int)
    flat = frames.reshape(len(frames), -1)
    seen = {}
    inverse = np.empty(len(frames), dtype=int)
    keep = []
    for i, row in enumerate(flat):
        key = row.tobytes()
        j = seen.get(key)
        if j is None:
            j = seen[key] = len(keep)
            keep.append(i)
        inverse[i] = j
    return frames[keep], inverse


def frames_diameter(frames):
    """Diameter of a finite set of planes; 0 for at most one plane."""
    uniq, _ = unique_frames(frames)
    if len(uniq) < 2:
        return 0.0
    return float(pairwise_distances(uniq).max())


def _log_frames(Y, X):
    """Horizontal logs from base frame ``Y`` to stacked frames ``X``."""
    X = np.asarray(X, dtype=float)
    n, d = Y.shape
    if d == 0:
        return np.zeros(X.shape)
    M = Y.T @ X
    N = X - Y @ M
    # B = N M^{-1}, i.e. B^T solves M^T B^T = N^T
    Bt = np.linalg.solve(np.swapaxes(M, -1, -2), np.swapaxes(N, -1, -2))
    U, s, Vt = np.linalg.svd(np.swapaxes(Bt, -1, -2), full_matrices=False)
    out = (U * np.arctan(s)[..., None, :]) @ Vt
    same = np.all(X == Y, axis=(-2, -1))
    return np.where(same[..., None, None], 0.0, out)


def _check_pair(P, Q):
    if P.frame.shape != Q.frame.shape:
        raise DimensionMismatch(
            f"planes live in different Grassmannians: Gr_{P.plane_dim}(R^{P.ambient_dim}) "
            f"vs Gr_{Q.plane_dim}(R^{Q.ambient_dim})"
        )


# -- single-pair operations ---------------------------------------------------

def plane_distance(P, Q):
    """Geodesic distance sqrt(sum theta_i^2) over the principal angles."""
    _check_pair(P, Q)
    return float(frame_distances(P.frame, Q.frame))


def plane_log(L, T):
    """Riemannian logarithm of ``T`` at ``L``.

    Defined while every principal angle is below pi/2; raises
    ``OutOfInjectivityRange`` otherwise.
    """
    _check_pair(L, T)
    theta = principal_angles(L.frame, T.frame)
    if theta.size and theta.max() >= np.pi / 2 - 1e-10:
        raise OutOfInjectivityRange(
            f"largest principal angle {theta.max():.6g} reaches pi/2; log is undefined"
        )
    return PlaneTangent(L, _log_frames(L.frame, T.frame))


def plane_exp(L, delta):
    """Geodesic endpoint ``exp_L(delta)``."""
    if not isinstance(delta, PlaneTangent):
        delta = PlaneTangent(L, delta)
    elif delta.base is not L and delta.base != L:
        raise BaseMismatch("tangent vector is based at a different plane")
    D = delta.delta
    if L.plane_dim == 0 or not np.any(D):
        return L
    U, s, Vt = np.linalg.svd(D, full_matrices=False)
    Y = (L.frame @ Vt.T) * np.cos(s) @ Vt + (U * np.sin(s)) @ Vt
    return Plane(orthonormalize(Y))


def alpha_constant(delta):
    """Working value of alpha: just below min(delta, pi/4).

    Planes P, Q with P meeting Q-perp nontrivially have a principal angle of
    pi/2, hence are at distance at least pi/2; half of that is pi/4.
    """
    if not delta > 0:
        raise NonpositiveDelta(f"delta must be positive, got {delta}")
    return 0.999 * min(float(delta), np.pi / 4)


# -- energy and mean ------------------------------------------------------------

def _effective_weights(W):
    radii = np.linalg.norm(W.points, axis=1)
    if np.any(radii >= 1):
        raise GeometryOutsideBall("energy weights need every sample inside the unit ball")
    return W.weights * (1.0 - radii)


def _check_manifold_plane(W, L):
    if len(W) == 0:
        raise EmptyManifold("the energy is undefined on the empty manifold")
    if W.frames.shape[1:] != L.frame.shape:
        raise DimensionMismatch(
            f"manifold tangents are {W.frames.shape[1:]}, plane frame is {L.frame.shape}"
        )


def lambda_energy(W, L):
    """Weighted energy sum w(1-|x|) d(L, T_x)^2 / (2 sum w(1-|x|))."""
    _check_manifold_plane(W, L)
    eff = _effective_weights(W)
    dist = frame_distances(L.frame[None], W.frames)
    return float(np.sum(eff * dist * dist) / (2.0 * np.sum(eff)))


def lambda_gradient(W, L):
    """Riemannian gradient of :func:`lambda_energy` at ``L``.

    Equals ``-sum_i w_i log_L(T_i)`` with the normalized effective weights.
    """
    _check_manifold_plane(W, L)
    eff = _effective_weights(W)
    wn = eff / eff.sum()
    logs = _log_frames(L.frame, W.frames)
    return PlaneTangent(L, -np.tensordot(wn, logs, axes=1))


def karcher_mean(W, delta=DEFAULT_DELTA, tol=KARCHER_STEP_TOL, max_iter=KARCHER_MAX_ITER):
    """Weighted Riemannian center of mass of the tangent planes of ``W``.

    Weights are ``w_i (1 - |x_i|)``. Plain Riemannian gradient descent with
    unit step, started at the tangent plane of the heaviest sample; the
    energy is convex on the ball holding the Gauss image, so this converges.

    Parameters
    ----------
    W : SampledManifold
        Non-empty, with all sample points inside the unit ball.
    delta : float
        Convexity radius. The Gauss image must have diameter below
        ``2 * delta``.

    Returns
    -------
    Plane
    """
    if len(W) == 0:
        raise EmptyManifold("the mean of the empty manifold is undefined")
    if not delta > 0:
        raise NonpositiveDelta(f"delta must be positive, got {delta}")
    diam = frames_diameter(W.frames)
    if diam >= 2 * delta:
        raise DiameterTooLarge(
            f"Gauss image diameter {diam:.6g} is not below 2*delta = {2 * delta:.6g}"
        )
    eff = _effective_weights(W)
    wn = eff / eff.sum()
    mu = Plane(W.frames[int(np.argmax(eff))])
    for _ in range(max_iter):
        step = np.tensordot(wn, _log_frames(mu.frame, W.frames), axes=1)
        if np.linalg.norm(step) < tol:
            break
        mu = plane_exp(mu, PlaneTangent(mu, step))
    return mu


# -- serialization ------------------------------------------------------------

def plane_to_json(P):
    """JSON object with the frame listed column by column."""
    return {
        "n": P.ambient_dim,
        "d": P.plane_dim,
        "frame": [col.tolist() for col in P.frame.T],
    }


def frame_from_columns(columns, n, d, where="frame"):
    """Frame from a column list; re-orthonormalized when nearly orthonormal."""
    F = np.array(columns, dtype=float).reshape(d, n).T if d else np.zeros((n, 0))
    defect = np.abs(F.T @ F - np.eye(d)).max(initial=0.0)
    if not defect <= JSON_DEFECT_TOL:
        raise InvariantViolation(f"{where}: orthonormality defect {defect:.3g} exceeds {JSON_DEFECT_TOL}")
    return orthonormalize(F) if defect > ORTHONORMAL_TOL else F


def plane_from_json(obj):
    try:
        n, d, cols = int(obj["n"]), int(obj["d"]), obj["frame"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolation(f"malformed plane object: {exc}") from exc
    if len(cols) != d or any(len(c) != n for c in cols):
        raise InvariantViolation(f"plane frame must list {d} columns of length {n}")
    return Plane(frame_from_columns(cols, n, d))
