import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from dtjoyce.bps import Lattice, Ray, a2_structure, conifold_structure
from dtjoyce.errors import PoleHit
from dtjoyce.torus import (
    BirationalAutomorphism,
    QuadraticRefinement,
    TorusPoint,
    apply_bps_automorphism,
    cluster_transformation,
    compose,
    pentagon_check,
    point_from_values,
    ray_automorphism,
    sector_product,
    to_twisted,
    to_untwisted,
)

A2_LAT = Lattice(2, np.array([[0, 1], [-1, 0]]))
classes = st.tuples(st.integers(-4, 4), st.integers(-4, 4))
logs = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def test_refinement_on_sum():
    q = QuadraticRefinement(A2_LAT, (-1, -1))
    assert q((1, 1)) == -1


def test_distinguished_a2_refinement():
    q = QuadraticRefinement(A2_LAT, (-1, -1))
    for g in [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)]:
        assert q(g) == -1


@given(classes, st.sampled_from([(1, 1), (1, -1), (-1, 1), (-1, -1)]))
def test_refinement_of_double_is_plus_one(g, signs):
    q = QuadraticRefinement(A2_LAT, signs)
    assert q((2 * g[0], 2 * g[1])) == 1


@given(classes, classes, st.sampled_from([(1, 1), (1, -1), (-1, -1)]))
def test_refinement_defining_relation(a, b, signs):
    q = QuadraticRefinement(A2_LAT, signs)
    s = q((a[0] + b[0], a[1] + b[1]))
    assert s == (-1) ** (A2_LAT.pair(a, b) % 2) * q(a) * q(b)


def test_cluster_transformation_example():
    p = point_from_values(A2_LAT, [2, 3])
    out = cluster_transformation(A2_LAT, (1, 0)).apply(p)
    assert np.allclose(out.coords, [2, 9], rtol=1e-15)


def test_orthogonal_cluster_transformation_is_identity():
    lat = Lattice.zero(2)
    p = point_from_values(lat, [2, 3])
    assert np.array_equal(cluster_transformation(lat, (1, 1)).apply(p).log_coords, p.log_coords)


def test_conifold_infinity_ray_fixes_x_delta():
    s = conifold_structure(0.3 + 0.5j, 1.0)
    members = [(g, v) for g, v in s.active(5) if g[0] == 0 and g[1] > 0]
    p = TorusPoint(s.lattice, [0.2 + 0.1j, -0.3 + 0.4j], twisted=True)
    out = ray_automorphism(s, members, True).apply(p)
    assert out.log_coords[1] == p.log_coords[1]


def test_empty_sector_is_identity():
    p = TorusPoint(A2_LAT, [0.1, 0.2], twisted=True)
    s = a2_structure(1j, -1 + 1j)
    assert sector_product(s, (Ray(1j), Ray(1j)), p) is p


def test_chamber_products_agree_at_example_point():
    p = point_from_values(A2_LAT, [2, 3])
    half = (Ray(1.0), Ray(-1.0))
    ca = sector_product(a2_structure(cmath.exp(1.3j), cmath.exp(1.0j)), half, p)
    cb = sector_product(a2_structure(cmath.exp(1.0j), cmath.exp(1.3j)), half, p)
    assert np.allclose(ca.coords, cb.coords, rtol=1e-13)
    direct = compose(cluster_transformation(A2_LAT, (1, 0)), cluster_transformation(A2_LAT, (0, 1))).apply(p)
    assert np.allclose(ca.coords, direct.coords, rtol=1e-13)


def test_single_ray_sector_matches_automorphism():
    s = a2_structure(1j, -1 + 1j)
    p = TorusPoint(A2_LAT, [0.3 - 0.2j, 0.1 + 0.5j], twisted=True)
    sec = sector_product(s, (Ray(cmath.exp(1.4j)), Ray(cmath.exp(1.7j))), p)
    auto = ray_automorphism(s, [((1, 0), 1)], True)
    assert np.allclose(sec.log_coords, apply_bps_automorphism(auto, p).log_coords, atol=1e-15)


def test_pentagon_random_points():
    rng = np.random.default_rng(7)
    pts = [TorusPoint(A2_LAT, rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)) for _ in range(50)]
    assert pentagon_check(pts, tol=1e-12)["pass"]


def test_pentagon_pole():
    with pytest.raises(PoleHit):
        pentagon_check([point_from_values(A2_LAT, [-1, 2])])


def test_pentagon_trivial_pairing():
    lat = Lattice.zero(2)
    p = point_from_values(lat, [2, 3])
    for auto in (compose(cluster_transformation(lat, (1, 0)), cluster_transformation(lat, (0, 1))),
                 compose(cluster_transformation(lat, (0, 1)), cluster_transformation(lat, (1, 1)))):
        assert np.array_equal(auto.apply(p).log_coords, p.log_coords)


@given(logs, logs, classes, classes)
def test_characters_multiply(l1, l2, a, b):
    p = TorusPoint(A2_LAT, [l1, l2])
    s = (a[0] + b[0], a[1] + b[1])
    assert p.log_character(s) == pytest.approx(p.log_character(a) + p.log_character(b), abs=1e-12)


@given(logs, logs, st.sampled_from([(1, 0), (0, 1), (1, 1), (1, -1)]))
def test_twisted_untwisted_intertwining(l1, l2, gamma):
    sigma = QuadraticRefinement(A2_LAT, (-1, -1))
    assert sigma(gamma) == -1
    p = TorusPoint(A2_LAT, [l1, l2])
    try:
        untw = cluster_transformation(A2_LAT, gamma).apply(p)
    except PoleHit:
        return
    tw = BirationalAutomorphism(A2_LAT, ((gamma, 1),), twisted=True).apply(to_twisted(p, sigma))
    assert np.allclose(np.exp(to_untwisted(tw, sigma).log_coords), untw.coords, rtol=1e-10)


@given(logs, logs, st.integers(-3, 3))
def test_inverse_automorphism(l1, l2, w):
    p = TorusPoint(A2_LAT, [l1, l2], twisted=True)
    auto = BirationalAutomorphism(A2_LAT, (((1, 1), w),), twisted=True)
    try:
        back = auto.inverse().apply(auto.apply(p))
    except PoleHit:
        return
    assert np.allclose(np.exp(back.log_coords), np.exp(p.log_coords), rtol=1e-12)


away = st.floats(0.2, 1) | st.floats(-1, -0.2)


@given(away, away, st.floats(-3, 3), st.floats(-3, 3))
def test_chamber_independence(r1, r2, a1, a2):
    assume(abs(r1 + r2) > 0.2)  # keep every character of the input off |x| = 1
    p = TorusPoint(A2_LAT, [r1 + 1j * a1, r2 + 1j * a2], twisted=True)
    half = (Ray(1.0), Ray(-1.0))
    try:
        qa = sector_product(a2_structure(cmath.exp(1.3j), cmath.exp(1.0j)), half, p).coords
        qb = sector_product(a2_structure(cmath.exp(1.0j), cmath.exp(1.3j)), half, p).coords
    except PoleHit:
        return
    assert np.allclose(qa, qb, rtol=1e-10)
