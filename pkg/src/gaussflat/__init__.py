"""Flattening sampled submanifolds of the unit ball onto parallel planes.

The pipeline measures how far the tangent planes of a sampled manifold
spread (:func:`theta`, :func:`phi`), averages them on the Grassmannian
(:func:`karcher_mean`), shrinks and squashes the manifold toward the mean
plane and returns the limiting union of parallel affine planes
(:func:`retract`). :func:`hyper_distance` compares manifolds through their
affine Gauss images.
"""

from .errors import *  # noqa: F401,F403
from .grassmann import (
    Plane,
    PlaneTangent,
    alpha_constant,
    karcher_mean,
    lambda_energy,
    lambda_gradient,
    orthonormalize,
    plane_distance,
    plane_exp,
    plane_log,
    principal_angles,
)
from .hyperspace import (
    GaussGraph,
    compactify,
    gauss_graph,
    gauss_proximity,
    hyper_distance,
    hyper_distance_brute,
    quotient_distance,
)
from .manifold import (
    AffinePlane,
    SampledManifold,
    StepFunction,
    ball_chart_pull,
    ball_chart_push,
    covering_multiplicity,
    gauss_diameter,
    generate,
    graph,
    parallel_planes,
    perturb,
    points,
    restrict,
    sample_affine_planes,
    sampling_resolution,
    sphere,
    theta,
)
from .retraction import (
    RetractionConfig,
    RetractionTrace,
    flatten_limit,
    phi,
    probe_continuity,
    retract,
    shrink_stage,
    smooth_a,
    squash_stage,
    transversality_margin,
)

__version__ = "0.1.0"
