import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussflat import (
    GaussGraph,
    Plane,
    SampledManifold,
    compactify,
    gauss_graph,
    gauss_proximity,
    graph,
    hyper_distance,
    hyper_distance_brute,
    parallel_planes,
    perturb,
    quotient_distance,
    sphere,
)
from gaussflat.errors import DimensionMismatch, EmptyReference, InvariantViolation
from gaussflat.grassmann import frame_distances

from conftest import random_frame


def random_graph(rng, m, n, d, spread=2.0):
    X = rng.standard_normal((m, n)) * spread
    F = np.linalg.qr(rng.standard_normal((m, n, n)))[0][:, :, :d]
    return GaussGraph(compactify(X), F)


def near_pole(h, n=2, angle=0.0):
    """Sphere point of S^n at chordal distance h from the north pole."""
    # chord h subtends polar angle 2 asin(h/2)
    t = 2 * np.arcsin(h / 2)
    s = np.zeros(n + 1)
    s[-1] = np.cos(t)
    s[0], s[1] = np.sin(t) * np.cos(angle), np.sin(t) * np.sin(angle)
    return s


# -- compactify -------------------------------------------------------------------

def test_compactify_examples():
    assert np.array_equal(compactify(None, 3), [0, 0, 0, 1])
    assert np.array_equal(compactify(np.inf, 2), [0, 0, 1])
    assert np.array_equal(compactify([0.0, 0.0, 0.0]), [0, 0, 0, -1])
    assert compactify([0.6, 0.8])[-1] == pytest.approx(0.0, abs=1e-16)
    with pytest.raises(InvariantViolation):
        compactify(None)


def test_compactify_is_injective_onto_sphere(rng):
    X = rng.standard_normal((500, 3)) * 5
    S = compactify(X)
    assert np.allclose(np.linalg.norm(S, axis=1), 1, atol=1e-15)
    gaps = np.linalg.norm(S[:, None] - S[None], axis=-1) + np.eye(500)
    assert gaps.min() > 0
    # inverse stereographic projection
    back = S[:, :-1] / (1 - S[:, -1:])
    assert np.allclose(back, X, rtol=1e-10)


# -- gauss_graph --------------------------------------------------------------------

def test_gauss_graph_sizes():
    assert len(gauss_graph(SampledManifold.empty(3, 1))) == 1
    one = SampledManifold([[0.1, 0.0]], [[[1.0], [0.0]]], [1.0])
    assert len(gauss_graph(one)) == 2
    assert len(gauss_graph(sphere([0, 0, 0], 0.5, 40))) == 41


def test_gauss_graph_rejects_non_unit_points():
    with pytest.raises(InvariantViolation):
        GaussGraph(np.array([[0.0, 0.0, 2.0]]), np.zeros((1, 2, 1)))


# -- hyper_distance ------------------------------------------------------------------

def test_identical_graphs_are_at_distance_zero(rng):
    G = random_graph(rng, 100, 3, 2)
    assert hyper_distance(G, G) == 0.0
    assert hyper_distance_brute(G, G) == 0.0


def test_singletons_far_from_pole():
    F = np.array([[[1.0], [0.0]]])
    p = np.array([0.0, 0.0, -1.0])
    c = 0.3
    t = 2 * np.arcsin(c / 2)
    q = np.array([np.sin(t), 0.0, -np.cos(t)])
    A, B = GaussGraph(p[None], F), GaussGraph(q[None], F)
    assert hyper_distance(A, B) == pytest.approx(c, abs=1e-14)
    assert hyper_distance_brute(A, B) == hyper_distance(A, B)


def test_quotient_shortcut_near_pole():
    e = np.eye(2)
    A = GaussGraph(near_pole(0.1)[None], e[None, :, :1])
    B = GaussGraph(near_pole(0.1, angle=np.pi)[None], e[None, :, 1:2])
    # the direct distance (chord 0.2 + plane pi/2) loses to h(u) + h(v)
    assert quotient_distance(A, 0, B, 0) == pytest.approx(0.2, abs=1e-14)
    assert quotient_distance(A, None, B, 0) == pytest.approx(0.1, abs=1e-14)
    assert quotient_distance(A, None, B, None) == 0.0
    # each point is 0.1 from the other graph's basepoint
    assert hyper_distance(A, B) == pytest.approx(0.1, abs=1e-14)
    assert hyper_distance_brute(A, B) == hyper_distance(A, B)


def test_empty_graphs():
    F0 = np.zeros((0, 2, 1))
    empty = GaussGraph(np.zeros((0, 3)), F0)
    G = GaussGraph(near_pole(0.7)[None], np.array([[[1.0], [0.0]]]))
    assert hyper_distance(empty, empty) == 0.0
    assert hyper_distance(empty, G) == pytest.approx(0.7)
    assert hyper_distance_brute(G, empty) == hyper_distance(G, empty)


def test_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        hyper_distance(random_graph(rng, 5, 3, 1), random_graph(rng, 5, 3, 2))


def test_tree_equals_brute_force(rng):
    for k in range(25):
        n, d = [(2, 1), (3, 1), (3, 2), (4, 2)][k % 4]
        A = random_graph(rng, int(rng.integers(1, 300)), n, d, spread=rng.uniform(0.1, 5))
        B = random_graph(rng, int(rng.integers(1, 300)), n, d, spread=rng.uniform(0.1, 5))
        assert abs(hyper_distance(A, B) - hyper_distance_brute(A, B)) <= 1e-12


def test_tree_equals_brute_force_on_nearby_manifolds():
    W = graph(Plane.span(np.eye(3)[:, :2]), "bump", 0.1, 400)
    for eps in [0.1, 0.01, 0.001]:
        A, B = gauss_graph(W), gauss_graph(perturb(W, eps, seed=2))
        assert abs(hyper_distance(A, B) - hyper_distance_brute(A, B)) <= 1e-12


def test_pseudometric_axioms_on_500_triples(rng):
    for k in range(500):
        n, d = [(2, 1), (3, 1), (3, 2)][k % 3]
        A, B, C = (random_graph(rng, int(rng.integers(0, 6)), n, d) for _ in range(3))
        ab, bc, ac = hyper_distance(A, B), hyper_distance(B, C), hyper_distance(A, C)
        assert ab == hyper_distance(B, A)
        assert ac <= ab + bc + 1e-9
        assert hyper_distance(A, A) == 0.0


def test_embedding_converges_under_shrinking_perturbations():
    W = graph(Plane.span(np.eye(2)[:, :1]), "sin", 0.05, 200)
    G = gauss_graph(W)
    dist = [hyper_distance(G, gauss_graph(perturb(W, 2.0 ** -k, seed=0))) for k in range(3, 11)]
    assert np.all(np.diff(dist) <= 0)
    assert dist[-1] < 1e-2


# -- gauss_proximity ---------------------------------------------------------------------

def test_proximity_examples():
    P = Plane.span(np.eye(3)[:, :2])
    W = parallel_planes(P, [[0, 0, 0]], spacing=0.05)
    assert gauss_proximity(W, W, 0.8) == 0.0
    eps = 0.03
    shifted = parallel_planes(P, [[0, 0, eps]], spacing=0.05)
    assert gauss_proximity(W, shifted, 0.8) == pytest.approx(eps, abs=1e-15)
    assert gauss_proximity(W, SampledManifold.empty(3, 2), 0.8) == 0.0
    assert gauss_proximity(SampledManifold.empty(3, 2), shifted, 0.01) == 0.0
    with pytest.raises(EmptyReference):
        gauss_proximity(SampledManifold.empty(3, 2), shifted, 0.8)


def test_proximity_tree_matches_brute_and_bound(rng):
    W = sphere([0, 0, 0], 0.5, 300)
    for seed in range(5):
        V = perturb(W, 0.05, seed=seed)
        for r in [0.3, 0.52, 0.9]:
            tree = gauss_proximity(W, V, r)
            assert tree == gauss_proximity(W, V, r, method="brute")
            # crude bound: nearest point mismatch + plane mismatch of that same pair
            sel = V.radii <= r
            if sel.any():
                dx = np.linalg.norm(V.points[sel][:, None] - W.points[None], axis=-1)
                j = dx.argmin(axis=1)
                bound = dx.min(axis=1).max() + frame_distances(V.frames[sel], W.frames[j]).max()
                assert tree <= bound + 1e-12


@given(st.integers(0, 2 ** 31), st.integers(1, 40), st.integers(1, 40))
def test_tree_equals_brute_property(seed, ma, mb):
    rng = np.random.default_rng(seed)
    A, B = random_graph(rng, ma, 3, 1), random_graph(rng, mb, 3, 1)
    assert hyper_distance(A, B) == hyper_distance_brute(A, B)
