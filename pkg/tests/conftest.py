import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gaussflat import Plane, SampledManifold

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_frame(rng, n, d):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q[:, :d]


def random_plane(rng, n, d):
    return Plane(random_frame(rng, n, d))


def line(angle):
    """Line in R^2 at the given angle to the first axis."""
    return Plane(np.array([[np.cos(angle)], [np.sin(angle)]]))


def cloud(frames, radii=None, weights=None):
    """Manifold sample whose only relevant data are its tangent frames."""
    frames = np.asarray(frames, dtype=float)
    m, n, _ = frames.shape
    radii = np.full(m, 0.5) if radii is None else np.asarray(radii, dtype=float)
    X = np.zeros((m, n))
    X[:, 0] = radii
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    return SampledManifold(X, frames, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
