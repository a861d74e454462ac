import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from conftest import spec_of
from kleinmaskit.clifford import ContractError
from kleinmaskit.geometry import Plane
from kleinmaskit.limitset import (
    attracting_fixed_point,
    crossing_pairs,
    entry_matrix,
    group_elements,
    max_distance_to_plane,
    orbit_points,
    repelling_fixed_point,
    sphere_translates,
    write_csv,
    write_ply,
    write_spheres,
)
from kleinmaskit.geometry import Sphere, image_sphere, spheres_equal
from kleinmaskit.moebius import INF, VahlenMatrix, apply, compose, is_inf, stereo_lift


def test_orbit_of_zero_example2():
    cloud = orbit_points(spec_of("example2"), [np.zeros(3)], 1)
    xs = sorted({round(float(p[0]), 9) for p in cloud.finite()})
    assert xs == [-10.0, -5.0, 0.0, 5.0, 10.0]
    assert np.allclose(cloud.finite()[:, 1:], 0)


def test_seeds_only_at_length_zero():
    s = spec_of("example1")
    seeds = [np.zeros(4), np.ones(4)]
    cloud = orbit_points(s, seeds, 0)
    assert len(cloud) == 2 and (cloud.lengths == 0).all()
    assert np.allclose(cloud.points, seeds)


def test_orbit_of_infinity():
    cloud = orbit_points(spec_of("example2"), [INF], 1)
    assert cloud.is_inf[0] and cloud.lengths[0] == 0
    # g1^k(inf) = 1/(2k)
    xs = sorted(float(p[0]) for p in cloud.finite())
    assert np.allclose(xs, [-0.5, -0.25, 0.25, 0.5])


def test_counterexample_cloud_on_real_line():
    cloud = orbit_points(spec_of("counterexample"), [np.array([0.0, 1.0])], 6)
    # integer matrices: the height of M(i) is 1/(c^2 + d^2), so 1/|height| is a positive integer
    inv = 1.0 / np.abs(cloud.finite()[:, 1])
    assert (inv >= 1 - 1e-9).all() and np.allclose(inv, np.round(inv), atol=1e-9)
    cloud = orbit_points(spec_of("counterexample"), [np.array([0.3, 0.0])], 6)
    assert max_distance_to_plane(cloud, Plane(np.array([0.0, 1.0]), 0.0)) < 1e-12


def test_orbit_dedup_resolution():
    s = spec_of("example2")
    a = orbit_points(s, [np.zeros(3)], 3, rho=None)
    b = orbit_points(s, [np.zeros(3)], 3, rho=1e-4)
    assert len(b) < len(a)
    L = b.lifted()
    d = np.linalg.norm(L[:, None] - L[None], axis=-1) + 10 * np.eye(len(L))
    assert d.min() >= 1e-4


def test_orbit_lengths_sorted():
    cloud = orbit_points(spec_of("example2"), [np.ones(3)], 3)
    assert (np.diff(cloud.lengths) >= 0).all()


@given(st.integers(0, 2**31 - 1))
def test_orbit_nested_and_j_invariant(seed):
    """Orbits grow with L, and j (central in both factors here) permutes each orbit."""
    s = spec_of("example2")
    x = np.random.default_rng(seed).normal(size=3)
    small = orbit_points(s, [x], 2, rho=None).lifted()
    big = orbit_points(s, [x], 3, rho=None)
    P = big.lifted()
    for q in small:
        assert np.linalg.norm(P - q, axis=1).min() < 1e-9
    j = s.j.generators[0].matrix
    for p in big.finite()[::7]:
        y = apply(j, p)
        assert np.linalg.norm(P - stereo_lift(y), axis=1).min() < 1e-9


def test_group_elements_include_j():
    M, lens, trunc = group_elements(spec_of("example1"), 1)
    assert not trunc and (lens == 0).sum() == 2 and (lens == 1).sum() == 4


# sphere translates

def test_spheres_example2_non_crossing():
    ss = sphere_translates(spec_of("example2"), 4)
    assert ss.non_crossing and not ss.truncated
    assert len(ss.entries) == 681
    assert max(e.residual for e in ss.entries) < 1e-9
    s = spec_of("example2")
    for e in ss.entries[1:40]:
        assert spheres_equal(image_sphere(entry_matrix(s, e), s.balls.sphere), e.sphere, 1e-9)


def test_spheres_example1_concentric():
    ss = sphere_translates(spec_of("example1"), 2)
    radii = sorted(e.sphere.radius for e in ss.entries)
    r2 = math.sqrt(2)
    assert np.allclose(radii, sorted([r2, r2 / 2, 2 * r2, r2 / 4, 4 * r2]))
    assert all(np.allclose(e.sphere.center, 0) for e in ss.entries)


def test_crossing_pairs_detects_crossings():
    S = [Sphere(np.zeros(2), 1.0), Sphere(np.array([1.0, 0]), 1.0), Sphere(np.array([5.0, 0]), 1.0),
         Sphere(np.array([7.0, 0]), 1.0), Plane(np.array([1.0, 0]), 0.0)]
    cross, marg = crossing_pairs(S)
    assert [0, 1] in cross and [2, 3] in marg and [0, 4] in cross and [1, 4] in marg
    assert [0, 2] not in cross


# fixed points

def test_attracting_fixed_points():
    g2g1 = VahlenMatrix(11, 5, 2, 1, dim_n=3)
    assert math.isclose(attracting_fixed_point(g2g1)[0], frozen.G2G1_ATTRACTING, rel_tol=1e-9)
    g1g2 = VahlenMatrix(1, 5, 2, 11, dim_n=3)
    assert math.isclose(attracting_fixed_point(g1g2)[0], frozen.G1G2_ATTRACTING, rel_tol=1e-9)
    assert math.isclose(repelling_fixed_point(g1g2)[0], frozen.G1G2_REPELLING, rel_tol=1e-9)
    assert np.allclose(attracting_fixed_point(VahlenMatrix(0.5, 0, 0, 2, dim_n=3)), 0)
    with pytest.raises(ContractError):
        attracting_fixed_point(VahlenMatrix(1, 5, 0, 1, dim_n=3))


def test_product_of_example2_generators():
    s = spec_of("example2")
    g = compose(s.g1[0].matrix, s.g2[0].matrix)
    assert g.projectively_equal(VahlenMatrix(1, 5, 2, 11, dim_n=3))
    h = compose(s.g2[0].matrix, s.g1[0].matrix)
    assert h.projectively_equal(VahlenMatrix(11, 5, 2, 1, dim_n=3))


# exports

def test_csv_export(tmp_path):
    cloud = orbit_points(spec_of("example2"), [INF, np.zeros(3)], 1)
    p = tmp_path / "c.csv"
    write_csv(cloud, p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["x1", "x2", "x3", "word_length"]
    assert len(rows) - 1 == int((~cloud.is_inf).sum())
    write_csv(cloud, p, lifted=True)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["x1", "x2", "x3", "x4", "word_length"] and len(rows) - 1 == len(cloud)
    assert [float(v) for v in rows[1][:4]] == [0, 0, 0, 1]


def test_ply_export(tmp_path):
    cloud = orbit_points(spec_of("counterexample"), [np.array([0.5, 0.0])], 2)
    p = tmp_path / "c.ply"
    write_ply(cloud, p)
    text = p.read_text().splitlines()
    assert text[0] == "ply" and f"element vertex {len(cloud.finite())}" in text
    with pytest.raises(ContractError):
        write_ply(orbit_points(spec_of("example1"), [np.zeros(4)], 1), tmp_path / "x.ply")


def test_sphere_export(tmp_path):
    ss = sphere_translates(spec_of("example2"), 2)
    p = tmp_path / "s.json"
    write_spheres(ss, p)
    d = json.loads(p.read_text())
    assert d["non_crossing"] and d["spheres"][0]["word"] == "id"
    assert {"word", "type", "center", "radius"} <= set(d["spheres"][1])
