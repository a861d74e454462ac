import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kleinmaskit.clifford import CliffordNumber, ContractError
from kleinmaskit.geometry import (
    SIDES,
    Ball,
    BallPair,
    DirichletHalfSpace,
    DegenerateBisector,
    PeakDomain,
    Plane,
    Sphere,
    Tri,
    _pairing,
    ball_contains,
    ball_strictly_contains,
    balls_disjoint,
    chordal_diameter,
    dirichlet_halfspace,
    image_ball,
    image_sphere,
    interiors_disjoint,
    peak_domain_disjoint,
    relation,
    sample_sphere,
    side_of,
    sphere_from_dict,
    spheres_cross,
    spheres_equal,
    translation_rank,
)
from kleinmaskit.moebius import INF, VahlenMatrix, apply, compose, hyperbolic_distance, is_inf, poincare_apply
from test_moebius import random_vahlen, rotation

seeds = st.integers(0, 2**31 - 1)
dims = st.integers(2, 4)


def random_ball(rng, n):
    if rng.random() < 0.25:
        S = Plane(rng.normal(size=n), rng.normal())
    else:
        S = Sphere(rng.normal(size=n), rng.uniform(0.3, 2.0))
    return Ball(S, SIDES[type(S)][int(rng.integers(2))])


def interior_sample(ball, rng, k=40):
    """Random points strictly inside a closed ball, drawn directly."""
    S = ball.sphere
    n = ball.dim
    u = rng.normal(size=(k, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    t = rng.uniform(0.05, 0.95, size=(k, 1))
    if isinstance(S, Sphere):
        scale = t if ball.side == "inside" else 1.0 / t
        return S.center + S.radius * scale * u
    sgn = -1.0 if ball.side == "below" else 1.0
    tang = u - np.outer(u @ S.normal, S.normal)
    return S.offset * S.normal + sgn * S.normal * (t + 0.01) * 3 + 3 * tang


# spheres and balls

def test_sphere_contracts():
    with pytest.raises(ContractError):
        Sphere(np.zeros(2), 0.0)
    with pytest.raises(ContractError):
        Plane(np.zeros(2), 1.0)
    with pytest.raises(ContractError):
        Ball(Sphere(np.zeros(2), 1.0), "below")


def test_dict_round_trip():
    for S in (Sphere(np.array([1.0, 2.0]), 3.0), Plane(np.array([0.0, 2.0]), 4.0)):
        assert spheres_equal(sphere_from_dict(S.to_dict()), S)
    assert Plane(np.array([0.0, 2.0]), 4.0).offset == 2.0


def test_side_of_values():
    B = Ball(Sphere(np.zeros(3), 2.0), "outside")
    assert side_of(B, INF) == "inside"
    assert side_of(B, np.array([3.0, 0, 0])) == "inside"
    assert side_of(B, np.array([1.0, 0, 0])) == "outside"
    assert side_of(B, np.array([2.0, 0, 0])) == "on"
    H = Ball(Plane(np.array([0.0, 1.0]), 0.0), "below")
    assert side_of(H, INF) == "on"
    assert side_of(H, np.array([5.0, -1.0])) == "inside"


def test_ball_pair_sides():
    P = BallPair(Sphere(np.zeros(3), 2.0), "outside")
    assert P.b2_side == "inside"
    assert P.side(np.array([3.0, 0, 0])) == 1 and P.side(np.zeros(3)) == 2 and P.side(np.array([0, 2.0, 0])) == 0


@given(dims, seeds)
def test_sample_sphere_on_sphere(n, seed):
    rng = np.random.default_rng(seed)
    B = random_ball(rng, n)
    for x in sample_sphere(B.sphere, 10, rng):
        assert side_of(B, x, 1e-9) == "on"


# images

@given(dims, seeds)
def test_image_sphere_contains_image_points(n, seed):
    rng = np.random.default_rng(seed)
    g = random_vahlen(rng, n)
    B = random_ball(rng, n)
    S2 = image_sphere(g, B.sphere)
    probe = Ball(S2, SIDES[type(S2)][0])
    for x in sample_sphere(B.sphere, 12, rng):
        y = apply(g, x)
        if is_inf(y):
            assert isinstance(S2, Plane)
            continue
        assert abs(probe.q(y)) < 1e-7


@given(dims, seeds)
def test_image_sphere_functorial(n, seed):
    rng = np.random.default_rng(seed)
    g, h = random_vahlen(rng, n), random_vahlen(rng, n)
    S = random_ball(rng, n).sphere
    assert spheres_equal(image_sphere(compose(g, h), S), image_sphere(g, image_sphere(h, S)), 1e-7)


@given(dims, seeds)
def test_image_ball_orientation(n, seed):
    rng = np.random.default_rng(seed)
    g = random_vahlen(rng, n)
    B = random_ball(rng, n)
    gB = image_ball(g, B)
    for x in interior_sample(B, rng, 10):
        y = apply(g, x)
        assert side_of(gB, y, 1e-7) in ("inside", "on")


def test_image_of_unit_sphere_under_example_map():
    g1 = VahlenMatrix(1, 0, 2, 1, dim_n=3)
    S2 = image_sphere(g1, Sphere(np.zeros(3), 2.0))
    # |z| = 2 under z/(2z+1): real points 2 -> 2/5 and -2 -> 2/3
    assert isinstance(S2, Sphere)
    assert np.allclose(S2.center, [(0.4 + 2 / 3) / 2, 0, 0])
    assert math.isclose(S2.radius, (2 / 3 - 0.4) / 2)


# relations

def test_relation_cases():
    n = 2
    A = Ball(Sphere(np.zeros(n), 1.0), "inside")
    assert relation(A, Ball(Sphere(np.array([3.0, 0]), 1.0), "inside")) == "disjoint"
    assert relation(A, Ball(Sphere(np.array([1.0, 0]), 1.0), "inside")) == "cross"
    assert relation(A, Ball(Sphere(np.zeros(n), 0.5), "inside")) == "b_in_a"
    assert relation(Ball(Sphere(np.zeros(n), 0.5), "inside"), A) == "a_in_b"
    assert relation(A, A) == "equal"
    assert relation(A, A.complement()) == "complement"
    assert relation(A, Ball(Sphere(np.array([2.0, 0]), 1.0), "inside")) == "tangent_out"
    assert relation(A, Ball(Sphere(np.array([0.5, 0]), 0.5), "inside")) == "tangent_in"
    assert relation(A, Ball(Sphere(np.zeros(n), 0.5), "outside")) == "cover"


def test_tri_predicates():
    A = Ball(Sphere(np.zeros(2), 1.0), "inside")
    far = Ball(Sphere(np.array([3.0, 0]), 1.0), "inside")
    touch = Ball(Sphere(np.array([2.0, 0]), 1.0), "inside")
    assert balls_disjoint(A, far) is Tri.YES
    assert balls_disjoint(A, touch) is Tri.MARGINAL
    assert interiors_disjoint(A, A.complement()) is Tri.YES
    assert ball_contains(A, A) is Tri.YES
    assert ball_strictly_contains(A, Ball(Sphere(np.zeros(2), 0.5), "inside")) is Tri.YES
    assert ball_strictly_contains(A, A) is Tri.NO
    assert spheres_cross(A.sphere, Sphere(np.array([1.0, 0]), 1.0)) is Tri.YES
    with pytest.raises(TypeError):
        bool(Tri.YES)


def test_tiny_sphere_is_not_tangent():
    """The tolerance band must not grow with the distance from the origin."""
    c = np.array([1e4, 0.0])
    A = Ball(Sphere(c, 1e-6), "inside")
    B = Ball(Sphere(c + np.array([1e-5, 0]), 1e-6), "inside")
    assert relation(A, B) == "disjoint"


@given(dims, seeds)
def test_pairing_matches_inversive_vectors(n, seed):
    rng = np.random.default_rng(seed)
    A, B = random_ball(rng, n), random_ball(rng, n)
    aA, bA, gA = A.vector()
    aB, bB, gB = B.vector()
    ref = bA @ bB - 0.5 * (aA * gB + aB * gA)
    p, _ = _pairing(A, B)
    assert math.isclose(p, ref, rel_tol=1e-8, abs_tol=1e-8)


@given(dims, seeds)
def test_relation_agrees_with_sampling(n, seed):
    rng = np.random.default_rng(seed)
    A, B = random_ball(rng, n), random_ball(rng, n)
    rel = relation(A, B)
    inA = interior_sample(A, rng, 60)
    qB = np.array([B.q(x) for x in inA])
    if rel == "disjoint":
        assert (qB > 0).all()
    elif rel == "a_in_b":
        assert (qB < 0).all()
    elif rel == "b_in_a":
        inB = interior_sample(B, rng, 60)
        assert all(A.q(x) < 0 for x in inB)


@given(dims, seeds)
def test_relation_is_moebius_invariant(n, seed):
    rng = np.random.default_rng(seed)
    A, B = random_ball(rng, n), random_ball(rng, n)
    g = random_vahlen(rng, n)
    rel = relation(A, B)
    if rel.startswith("tangent"):
        return
    p, _ = _pairing(A, B)
    if abs(abs(p) - 1.0) < 1e-6:
        return
    assert relation(image_ball(g, A), image_ball(g, B)) == rel


# chordal diameters

def test_chordal_diameter_values():
    assert math.isclose(chordal_diameter(Sphere(np.zeros(3), 1.0)), 2.0)
    r = 2.0
    assert math.isclose(chordal_diameter(Sphere(np.zeros(3), r)), 4 * r / (1 + r * r))
    assert math.isclose(chordal_diameter(Plane(np.array([1.0, 0, 0]), 0.0)), 2.0)
    small = Sphere(np.array([5.0, 0, 0]), 0.1)
    assert chordal_diameter(Ball(small, "inside")) == pytest.approx(chordal_diameter(small))
    assert chordal_diameter(Ball(small, "outside")) == 2.0


@given(dims, seeds)
def test_chordal_diameter_dominates_samples(n, seed):
    rng = np.random.default_rng(seed)
    S = Sphere(rng.normal(size=n) * 3, rng.uniform(0.05, 3))
    from kleinmaskit.moebius import chordal_distance
    X = sample_sphere(S, 30, rng)
    d = max(chordal_distance(x, y) for x in X for y in X)
    assert d <= chordal_diameter(S) + 1e-12


# Dirichlet half-spaces

@given(st.integers(2, 4), seeds)
def test_dirichlet_membership_matches_distance(n, seed):
    rng = np.random.default_rng(seed)
    g = random_vahlen(rng, n)
    a = np.append(rng.normal(size=n), rng.uniform(0.5, 2))
    try:
        H = dirichlet_halfspace(a, g)
    except DegenerateBisector:
        return
    ga = poincare_apply(g, a)
    for _ in range(20):
        y = np.append(rng.normal(size=n) * 2, rng.uniform(0.05, 3))
        d1, d2 = hyperbolic_distance(y, a), hyperbolic_distance(y, ga)
        if abs(d1 - d2) < 1e-6:
            continue
        assert H.contains(y) == (d1 < d2)
    assert H.contains(a) and not H.contains(ga)


def test_dirichlet_degenerate():
    e12 = CliffordNumber.basis(3, 1) * CliffordNumber.basis(3, 2)
    with pytest.raises(DegenerateBisector):
        dirichlet_halfspace([0, 0, 0, 1.0], VahlenMatrix(e12, 0, 0, e12))


def test_dirichlet_for_rotation_is_vertical_plane():
    n = 4
    a = np.zeros(n + 1)
    a[1] = a[n] = 1.0
    e12 = CliffordNumber.basis(n, 1) * CliffordNumber.basis(n, 2)
    H = dirichlet_halfspace(a, VahlenMatrix(e12, 0, 0, e12))
    assert isinstance(H.wall, Plane) and np.allclose(H.wall.normal, [0, -1, 0, 0]) and H.wall.offset == 0
    assert isinstance(H, DirichletHalfSpace)


# Euclidean stabilizers

def test_translation_rank_values():
    assert translation_rank([VahlenMatrix(1, 5, 0, 1, dim_n=3)]).k == 1
    e12 = CliffordNumber.basis(3, 1) * CliffordNumber.basis(3, 2)
    assert translation_rank([VahlenMatrix(e12, 0, 0, e12)]).k == 0
    e1 = CliffordNumber.basis(3, 1)
    two = [VahlenMatrix(1, 1, 0, 1, dim_n=3), VahlenMatrix(1, e1, 0, 1)]
    r = translation_rank(two)
    assert r.k == 2 and r.basis.shape == (2, 3)
    assert translation_rank([]).k == 0


def test_translation_rank_screw_motion():
    """A rotation by pi composed with a translation along its axis has a square that translates."""
    n = 3
    rot = rotation(n, 1, 2, math.pi)
    screw = compose(VahlenMatrix(1, 1, 0, 1, dim_n=n), rot)
    assert translation_rank([screw]).k == 1


def test_translation_rank_rejects_non_isometry():
    with pytest.raises(ContractError):
        translation_rank([VahlenMatrix(2, 0, 0, 0.5, dim_n=3)])
    with pytest.raises(ContractError):
        translation_rank([VahlenMatrix(1, 0, 1, 1, dim_n=3)])


# peak domains

def test_peak_domain_disjointness():
    h = VahlenMatrix.identity(3)
    S = Sphere(np.zeros(3), 2.0)
    assert peak_domain_disjoint(PeakDomain(h, 1, 5.0), S) is Tri.YES
    assert peak_domain_disjoint(PeakDomain(h, 1, 3.0), S) is Tri.NO
    assert peak_domain_disjoint(PeakDomain(h, 1, 4.0), S) is Tri.MARGINAL
    U = PeakDomain(h, 1, 5.0)
    assert U.contains(np.array([0.0, 3.0, 0.0])) and not U.contains(np.array([100.0, 1.0, 0.0]))
    with pytest.raises(ContractError):
        PeakDomain(h, 3, 1.0)
