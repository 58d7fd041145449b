"""Flattening a sampled submanifold of the ball onto parallel affine planes.

The pipeline, for a ball-domain manifold ``W``:

1. ``phi``: the radius where the smoothed Gauss-spread profile of ``W``
   reaches ``alpha``. Inside that radius all tangent planes are within
   ``alpha`` of each other.
2. ``shrink_stage``: blow the ball of radius ``phi`` up to the unit ball
   (conformal, so tangent planes are unchanged) to get ``V``.
3. ``karcher_mean``: average the tangents of ``V`` to a plane ``mu``.
4. ``squash_stage`` / ``flatten_limit``: stretch ``V`` along ``mu``. The
   limit of the stretch is the union of planes parallel to ``mu`` through
   the points where ``V`` crosses ``mu``-perp.

A union of parallel planes passes through unchanged.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field, replace

import numpy as np

from . import errors
from .grassmann import (
    DEFAULT_DELTA,
    KARCHER_MAX_ITER,
    Plane,
    alpha_constant,
    frame_distances,
    karcher_mean,
    plane_distance,
    principal_angles,
)
from .hyperspace import gauss_graph, hyper_distance
from .manifold import (
    AffinePlane,
    SampledManifold,
    _components,
    _push_frames,
    gauss_diameter,
    perturb,
    sample_affine_planes,
    sampling_resolution,
    theta,
)

TRANSVERSE_TOL = 1e-12
D_MU_TOL = 1e-8


@dataclass(frozen=True)
class RetractionConfig:
    """Parameters of :func:`retract`.

    ``alpha`` defaults to :func:`alpha_constant` of ``delta``; an explicit
    value may go up to ``min(delta, pi/4)``. ``cluster_radius`` and
    ``slab_width`` default to 4x and 2x the sampling resolution of the
    shrunk manifold. ``stages`` is the number of recorded steps per
    homotopy.
    """

    delta: float = DEFAULT_DELTA
    alpha: float = None
    root_tol: float = 1e-12
    cluster_radius: float = None
    slab_width: float = None
    t_floor: float = 1e-4
    max_iter: int = KARCHER_MAX_ITER
    stages: int = 4

    def __post_init__(self):
        if not self.delta > 0:
            raise errors.NonpositiveDelta(f"delta must be positive, got {self.delta}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", alpha_constant(self.delta))
        if not self.alpha > 0:
            raise errors.NonpositiveAlpha(f"alpha must be positive, got {self.alpha}")
        cap = min(self.delta, np.pi / 4)
        if self.alpha > cap:
            raise errors.InvariantViolation(f"alpha = {self.alpha} exceeds min(delta, pi/4) = {cap}")
        if not 0 < self.t_floor < 1:
            raise errors.InvariantViolation(f"t_floor must lie in (0, 1), got {self.t_floor}")
        if not self.root_tol > 0:
            raise errors.InvariantViolation("root_tol must be positive")
        for name in ("cluster_radius", "slab_width"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise errors.InvariantViolation(f"{name} must be non-negative")
        if self.max_iter < 1 or self.stages < 1:
            raise errors.InvariantViolation("max_iter and stages must be at least 1")

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


@dataclass
class RetractionTrace:
    phi: float
    mu: Plane = None
    margin: float = None
    stages: list = field(default_factory=list)
    result: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    config: RetractionConfig = None


@contextmanager
def _stage(name):
    try:
        yield
    except errors.PipelineError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


class SmoothedProfile:
    """``a(f)(x) = (1/x) * integral_x^{2x} f + alpha * x`` for a step function f.

    The integral is exact (piecewise linear antiderivative). The result
    dominates ``f`` and ``alpha * x``, is continuous and strictly
    increasing, and equals ``alpha * x`` when ``f`` vanishes.
    """

    def __init__(self, f, alpha):
        if not alpha > 0:
            raise errors.NonpositiveAlpha(f"alpha must be positive, got {alpha}")
        self.f = f
        self.alpha = float(alpha)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        F = self.f.antiderivative
        out = (F(2 * x) - F(x)) / x + self.alpha * x
        return float(out) if np.ndim(out) == 0 else out

    @property
    def limit_at_zero(self):
        return self.f.limit_at_zero


def smooth_a(f, alpha):
    """Continuous strictly increasing majorant of the step function ``f``."""
    return SmoothedProfile(f, alpha)


def phi(W, cfg=None):
    """Radius at which the smoothed Gauss-spread profile of ``W`` hits alpha.

    Returns exactly 1 when every tangent plane of ``W`` is the same (the
    profile is ``alpha * x``) and a value in (0, 1) otherwise, found by
    bisection to ``cfg.root_tol``. The Gauss image of ``W`` restricted to
    the returned radius has diameter below alpha.
    """
    cfg = cfg or RetractionConfig()
    f = theta(W)
    if f.is_zero:
        return 1.0
    a = smooth_a(f, cfg.alpha)
    if a.limit_at_zero >= cfg.alpha:
        raise errors.ConeAtOrigin(
            f"Gauss spread {a.limit_at_zero:.6g} does not drop below alpha = {cfg.alpha:.6g} "
            "near the origin"
        )
    lo, hi = 0.0, 1.0
    while hi - lo > cfg.root_tol:
        mid = 0.5 * (lo + hi)
        if a(mid) < cfg.alpha:
            lo = mid
        else:
            hi = mid
    if lo == 0:
        raise errors.ConeAtOrigin(f"Gauss spread reaches alpha within {cfg.root_tol:.3g} of the origin")
    return lo


def shrink_stage(W, t, phi_value):
    """Pull ``W`` back along ``x -> s x`` with ``s = t + (1 - t) * phi``.

    Tangent frames are untouched since the map is a homothety.
    """
    if not 0 < phi_value <= 1:
        raise errors.InvariantViolation(f"phi must lie in (0, 1], got {phi_value}")
    s = t + (1 - t) * phi_value
    if s == 1:
        return W
    V = W.subset(W.radii < s)
    return SampledManifold(V.points / s, V.frames, V.weights * s ** (-W.plane_dim),
                           V.domain, V.approximate_weights)


def squash_stage(V, P, t):
    """Pull ``V`` back along ``x -> t * pi_P(x) + pi_P^perp(x)``.

    Coordinates along ``P`` are divided by ``t``; samples that leave the
    unit ball are dropped. Frames and weights follow the derivative.
    """
    if not t > 0:
        raise errors.NonpositiveT(f"t must be positive (the t = 0 limit is flatten_limit), got {t}")
    if t == 1 or len(V) == 0:
        return V
    n = V.ambient_dim
    stretch = 1.0 / t - 1.0
    F = P.frame
    Y = V.points + stretch * (V.points @ F) @ F.T
    J = np.eye(n) + stretch * (F @ F.T)
    frames, vol = _push_frames(V.frames, np.broadcast_to(J, (len(V), n, n)))
    keep = np.linalg.norm(Y, axis=1) < 1
    return SampledManifold(Y[keep], frames[keep], V.weights[keep] * vol[keep],
                           V.domain, V.approximate_weights)


def transversality_margin(V, P):
    """Smallest singular value of ``P^T T_x`` over the samples.

    Positive iff every tangent meets ``P``-perp only at 0. 1 for empty
    manifolds and for d = 0.
    """
    if len(V) == 0 or V.plane_dim == 0:
        return 1.0
    worst = principal_angles(P.frame[None], V.frames).max()
    return float(np.cos(worst))


def _resolved(cfg, V):
    res = sampling_resolution(V)
    eta = 2 * res if cfg.slab_width is None else cfg.slab_width
    rho = 4 * res if cfg.cluster_radius is None else cfg.cluster_radius
    return res, eta, rho


def flatten_limit(V, P, cfg=None):
    """Limit of :func:`squash_stage` as ``t -> 0``.

    Samples within the slab ``|pi_P(x)| <= eta`` are moved to where their
    affine tangent plane meets ``P``-perp. These crossing points are grouped
    by single linkage at radius ``rho``; each group gives one plane
    parallel to ``P`` through its centroid. Centroid weights fall off
    linearly to 0 at the slab edge so that samples entering or leaving the
    slab move the centroid continuously.

    Returns
    -------
    list of AffinePlane
        Sorted lexicographically by origin.
    """
    cfg = cfg or RetractionConfig()
    if len(V) == 0:
        return []
    margin = transversality_margin(V, P)
    if margin <= TRANSVERSE_TOL:
        raise errors.NonTransverse(f"a tangent plane meets the normal space of the mean (margin {margin:.3g})")
    _, eta, rho = _resolved(cfg, V)
    d = V.plane_dim
    F = P.frame
    along = V.points @ F
    offset = np.linalg.norm(along, axis=1)
    slab = np.flatnonzero(offset <= eta)
    if slab.size == 0:
        raise errors.NoSlabSamples(
            f"no sample within {eta:.3g} of the normal space of the mean; sampling is too coarse"
        )
    X = V.points[slab]
    if d == 0:
        Z = X
        wts = np.ones(len(X))
    else:
        T = V.frames[slab]
        # x + T c lands in P-perp when (P^T T) c = -P^T x
        c = np.linalg.solve(F.T @ T, -along[slab][:, :, None])
        Z = X + (T @ c)[:, :, 0]
        Z = Z - (Z @ F) @ F.T
        wts = V.weights[slab] * np.clip(1.0 - offset[slab] / eta, 0.0, None) if eta > 0 else V.weights[slab]
    count, labels = _components(Z, rho)
    origins = []
    for k in range(count):
        idx = np.flatnonzero(labels == k)
        if len(idx) == 1:
            origins.append(Z[idx[0]])
            continue
        w = wts[idx] if wts[idx].sum() > 0 else np.ones(len(idx))
        # average offsets from one member: coincident points give that point exactly
        c = Z[idx[0]] + np.average(Z[idx] - Z[idx[0]], axis=0, weights=w)
        origins.append(c - F @ (F.T @ c))
    origins = np.array(origins)
    order = np.lexsort(origins.T[::-1])
    return [AffinePlane(P, origins[i]) for i in order]


def sample_result(planes, spacing, reference=None, n=None, d=None):
    """Lattice sample of a flattening result (possibly empty)."""
    if not planes:
        return SampledManifold.empty(n, d)
    return sample_affine_planes(planes, spacing, reference=reference)


def retract(W, cfg=None):
    """Run the full flattening pipeline and record its stages.

    Stages are ``(tau, manifold)`` pairs: the shrink homotopy for ``tau`` in
    [0, 1/2], the squash homotopy (parameter running geometrically from 1
    to ``t_floor``) for ``tau`` in (1/2, 1), and the lattice-sampled limit
    at ``tau = 1``.
    """
    cfg = cfg or RetractionConfig()
    if W.domain != "ball":
        raise errors.InvariantViolation("retract expects a ball-domain manifold")
    n, d = W.ambient_dim, W.plane_dim
    log = []
    with _stage("phi"):
        phi_value = phi(W, cfg)
    log.append(f"phi = {phi_value!r}")
    K = cfg.stages
    stages = []
    for k in range(K + 1):
        tau = 0.5 * k / K
        stages.append((tau, shrink_stage(W, 1 - 2 * tau, phi_value)))
    V = stages[-1][1]
    log.append(f"shrunk manifold has {len(V)} of {len(W)} samples")
    trace = RetractionTrace(phi=phi_value, stages=stages, diagnostics=log, config=cfg)
    if len(V) == 0:
        stages.append((1.0, SampledManifold.empty(n, d)))
        log.append("shrunk manifold is empty; result is the empty manifold")
        return trace

    diam = gauss_diameter(V)
    log.append(f"Gauss diameter of shrunk manifold = {diam!r}")
    with _stage("mean"):
        if diam >= cfg.alpha:
            raise errors.DiameterTooLarge(f"Gauss diameter {diam:.6g} is not below alpha = {cfg.alpha:.6g}")
        mu = karcher_mean(V, cfg.delta, max_iter=cfg.max_iter)
        spread = float(frame_distances(mu.frame[None], V.frames).max())
        if spread > diam + D_MU_TOL:
            raise errors.DiameterTooLarge(
                f"mean is {spread:.6g} from a tangent, more than the diameter {diam:.6g}"
            )
    margin = transversality_margin(V, mu)
    log.append(f"max distance from mean to a tangent = {spread!r}; transversality margin = {margin!r}")
    trace.mu, trace.margin = mu, margin
    with _stage("squash"):
        if margin <= TRANSVERSE_TOL:
            raise errors.NonTransverse(f"transversality margin {margin:.3g} vanishes")
        for k in range(1, K):
            tau = 0.5 + 0.5 * k / K
            stages.append((tau, squash_stage(V, mu, cfg.t_floor ** (2 * tau - 1))))
    with _stage("flatten"):
        result = flatten_limit(V, mu, cfg)
    trace.result = result
    res = sampling_resolution(V)
    stages.append((1.0, sample_result(result, res if res > 0 else 0.1, mu, n, d)))
    log.append(f"result: {len(result)} parallel plane(s)")
    return trace


@dataclass
class ProbeRow:
    jitter: float
    dphi: float = np.nan
    dmu: float = np.nan
    dhyper: float = np.nan
    error: str = None


@dataclass
class ProbeReport:
    rows: list
    non_increasing: dict
    final: dict
    tends_to_zero: dict


COLUMNS = ("dphi", "dmu", "dhyper")


def _mu_delta(a, b):
    if a.mu is None and b.mu is None:
        return 0.0
    if a.mu is None or b.mu is None:
        return np.nan
    return plane_distance(a.mu, b.mu)


def probe_continuity(W, jitters, seed=0, cfg=None, zero_tol=1e-2):
    """Empirical continuity of the pipeline under shrinking perturbations.

    For each jitter size ``eps`` the manifold is moved by the seeded smooth
    perturbation of :func:`gaussflat.manifold.perturb`, the pipeline is
    rerun, and the changes in phi, in the mean plane and in the Hausdorff
    distance between the lattice-sampled results are recorded. Pipeline
    failures at a level are recorded in that row rather than raised.
    """
    cfg = cfg or RetractionConfig()
    base = retract(W, cfg)
    V = shrink_stage(W, 0, base.phi)
    spacing = sampling_resolution(V) or 0.1
    n, d = W.ambient_dim, W.plane_dim
    ref = base.mu
    base_graph = gauss_graph(sample_result(base.result, spacing, ref, n, d))
    rows = []
    for eps in jitters:
        row = ProbeRow(float(eps))
        try:
            tr = retract(perturb(W, eps, seed), cfg)
        except errors.GaussflatError as exc:
            row.error = type(exc).__name__
            rows.append(row)
            continue
        row.dphi = abs(base.phi - tr.phi)
        row.dmu = _mu_delta(base, tr)
        row.dhyper = hyper_distance(base_graph, gauss_graph(sample_result(tr.result, spacing, ref, n, d)))
        rows.append(row)
    non_increasing, final, zero = {}, {}, {}
    for col in COLUMNS:
        vals = np.array([getattr(r, col) for r in rows], dtype=float)
        ok = vals.size > 0 and np.all(np.isfinite(vals))
        non_increasing[col] = bool(ok and np.all(np.diff(vals) <= 1e-12))
        final[col] = float(vals[-1]) if vals.size else np.nan
        zero[col] = bool(ok and vals[-1] < zero_tol)
    return ProbeReport(rows, non_increasing, final, zero)
