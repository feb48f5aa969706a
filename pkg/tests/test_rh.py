import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtjoyce.bps import Ray, a1_structure, explicit_structure
from dtjoyce.errors import BoundaryActive, NotUncoupled
from dtjoyce.joyce import model_conifold
from dtjoyce.rh import (
    a1_log_R,
    conifold_difference_residual,
    extract_hessian,
    solve_a1_doubled,
    solve_conifold,
    solve_uncoupled,
    verify_asymptotics,
    verify_jumps,
)
from dtjoyce.special import log_lambda
from dtjoyce.torus import twist_sign

TWO_PI_I = 2j * math.pi
Z, TH = 1.3 + 0.7j, 0.4 - 0.3j


def samples_near(ray, k, seed):
    rng = np.random.default_rng(seed)
    return [math.exp(r) * ray.phase * cmath.exp(1j * a) for r, a in zip(rng.uniform(-2, 2, k), rng.uniform(-1.2, 1.2, k))]


@pytest.mark.parametrize("sign", [1, -1])
def test_a1_jumps(sign):
    sol = solve_a1_doubled(Z, TH, 0.2 + 0.1j, 0.3)
    ray = Ray.through(sign * Z)
    assert verify_jumps(sol, ray, samples_near(ray, 20, 3), tol=1e-10)["pass"]


def test_a1_jump_is_one_minus_x():
    vt = TH - math.pi * 1j
    for r in (0.3, 1.0, 4.0):
        h = r * Z / abs(Z)
        jump = a1_log_R(Z, vt, h, 1) - a1_log_R(Z, vt, h, -1)
        assert abs(jump + cmath.log(1 - cmath.exp(vt - Z / h))) < 1e-12


def test_a1_r_tends_to_one():
    vt = TH - math.pi * 1j
    vals = [abs(a1_log_R(Z, vt, 1j * 2.0 ** -k, 1)) for k in range(1, 21)]
    assert vals[-1] < 1e-6 and all(b < a for a, b in zip(vals, vals[1:]))


def test_a1_zero_vartheta_is_symmetric_solution():
    for h in (1j, 0.5 + 0.2j):
        w = Z / (TWO_PI_I * h)
        assert abs(a1_log_R(Z, 0, h, 1) - log_lambda(w, 1)) < 1e-12


def test_a1_dual_asymptotics_far_from_origin():
    sol = solve_a1_doubled(50 * cmath.exp(1j * math.pi / 3), TH)
    rep = verify_asymptotics(sol, Ray(1j), (0, 1), [1j * 2.0 ** -k for k in range(1, 21)], tol=1e-8, large=())
    assert rep["pass"]


def test_a1_dual_asymptotics_rate_at_unit_charge():
    # the leading error is linear in hbar: successive halvings halve it
    sol = solve_a1_doubled(1.0, TH)
    d = verify_asymptotics(sol, Ray(1j), (0, 1), [1j * 2.0 ** -k for k in range(1, 21)], large=())["distances"]
    assert d == sorted(d, reverse=True)
    assert d[-1] / d[-2] == pytest.approx(0.5, rel=1e-3)
    assert 1e-7 < d[-1] < 1e-6


def test_base_class_identity_is_exact():
    sol = solve_a1_doubled(Z, TH, 0.2, 0.1)
    rep = verify_asymptotics(sol, Ray(1j), (1, 0), [0.7j, 0.01j, 3j], large=())
    assert max(rep["distances"]) < 1e-14


def test_boundary_ray_rejected():
    sol = solve_a1_doubled(Z, TH)
    with pytest.raises(BoundaryActive):
        sol.log_X(Ray.through(Z), 1.0)


def test_single_summand_reduces_to_a1():
    z, th = 0.6 - 1.1j, 0.2 + 0.5j
    u = solve_uncoupled(a1_structure(z), [th], [0.3j], [0.1])
    a = solve_a1_doubled(z, th, 0.3j, 0.1)
    for h in (0.4 + 0.3j, -1.2j):
        ray = Ray(cmath.exp(0.3j))
        assert np.allclose(u.log_X(ray, h), a.log_X(ray, h), atol=1e-14)


def test_orthogonal_summands_jumps():
    s = explicit_structure([[0, 1, 0], [-1, 0, 0], [0, 0, 0]], [1 + 0.2j, 0.3 + 1j, -0.5 + 0.5j],
                           [((1, 0, 0), 1), ((0, 0, 1), 2)], symmetrize=True)
    sol = solve_uncoupled(s, [0.2, -0.1j, 0.3 + 0.1j], [0.1, 0.2, 0.3j])
    for g in ((1, 0, 0), (0, 0, 1), (-1, 0, 0)):
        ray = Ray.through(s.Z(g))
        assert verify_jumps(sol, ray, samples_near(ray, 10, 5), tol=1e-10)["pass"]


def test_coupled_structure_rejected():
    s = explicit_structure([[0, 1], [-1, 0]], [1, 1j], [((1, 0), 1), ((0, 1), 1)], symmetrize=True)
    with pytest.raises(NotUncoupled):
        solve_uncoupled(s, [0, 0])


@given(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), st.tuples(st.integers(-2, 2), st.integers(-2, 2)))
def test_twisted_multiplicativity(a, b):
    sol = solve_a1_doubled(Z, TH, 0.2 + 0.1j, 0.3)
    ray, h = Ray(cmath.exp(0.2j)), 0.8 + 0.5j
    lat = sol.structure.lattice
    s = (a[0] + b[0], a[1] + b[1])
    lhs = sol.X(ray, s, h)
    sign = twist_sign(lat, s) * twist_sign(lat, a) * twist_sign(lat, b)
    rhs = sign * sol.X(ray, a, h) * sol.X(ray, b, h)
    assert abs(lhs / rhs - 1) < 1e-10


# --- Hessians -----------------------------------------------------------------------------


@pytest.mark.parametrize("hbar", [1j, 2j, 1 + 1j])
def test_a1_hessian(hbar):
    th = 0.3 + 0.2j
    H = extract_hessian(solve_a1_doubled(1.0, th), Ray(1j), hbar).base[0, 0]
    assert abs(H - th / TWO_PI_I) < 1e-7


def test_hessian_hbar_independence():
    sol = solve_a1_doubled(0.8 - 0.4j, 0.1 + 0.4j, 0.3, 0.2)
    vals = [extract_hessian(sol, Ray(1j), h).value for h in (1j, 2.5j, 0.7 + 1j, -1 + 0.6j, 0.2 + 0.4j)]
    assert max(float(np.max(np.abs(a - b))) for a in vals for b in vals) < 1e-6


def test_hessian_structure():
    sol = solve_a1_doubled(1.0, 0.3 + 0.2j)
    H = extract_hessian(sol, Ray(1j), 1j)
    assert H.asymmetry < 1e-8
    assert H.dual_block_max < 1e-8
    odd = extract_hessian(solve_a1_doubled(1.0, -0.3 - 0.2j), Ray(1j), 1j)
    assert np.max(np.abs(odd.value + H.value)) < 1e-8
    scaled = extract_hessian(solve_a1_doubled(2.0, 0.3 + 0.2j), Ray(1j), 1j)
    assert np.max(np.abs(scaled.value - H.value / 2)) < 1e-8
    zero = extract_hessian(solve_a1_doubled(1.0, 0), Ray(1j), 1j)
    assert np.max(np.abs(zero.value)) < 1e-8


# --- conifold ----------------------------------------------------------------------------------

V, W, THC, PHI = 0.4 + 0.6j, 1.0, 0.3 - 0.2j, 0.25 + 0.1j


def test_conifold_difference_equations():
    for h in (0.6 * cmath.exp(0.5j), 1.4 * cmath.exp(1.9j), 0.9j):
        r = conifold_difference_residual(V, W, THC, PHI, h)
        assert abs(r["B"]) < 1e-8 and abs(r["D"]) < 1e-8


@pytest.mark.slow
def test_conifold_jumps_on_l0():
    sol = solve_conifold(V, W, THC, PHI)
    ray = Ray.through(V)
    rng = np.random.default_rng(1)
    hs = [math.exp(r) * ray.phase * cmath.exp(1j * a) for r, a in zip(rng.uniform(-1, 1, 20), rng.uniform(-1.2, 1.2, 20))]
    assert verify_jumps(sol, ray, hs, tol=1e-8)["pass"]


def test_conifold_dual_asymptotics():
    sol = solve_conifold(V, W, THC, PHI)
    rep = verify_asymptotics(sol, Ray(1j), (0, 0, 1, 0), [1j * 2.0 ** -k for k in range(1, 21)], tol=1e-6, large=())
    assert rep["pass"]


def test_conifold_hessian_matches_li0_formula():
    sol = solve_conifold(V, W, THC, PHI)
    H = extract_hessian(sol, Ray(1j), 0.5 * cmath.exp(1.6j)).base
    E = cmath.exp(TWO_PI_I * V / W)
    li0 = E / (1 - E)
    assert abs(H[0, 0] - (V * PHI - W * THC) * li0 / W ** 2) < 1e-6
    assert np.max(np.abs(H - model_conifold().hessian([V, W], [THC, PHI]))) < 1e-6
