import cmath
import math

import mpmath as mp
import pytest

from dtjoyce.contour import (
    conifold_F,
    log_conifold,
    log_starred_F,
    log_starred_G,
    q_F,
    q_G,
    starred_F,
)
from dtjoyce.errors import StripViolation
from dtjoyce.special import ZETA3

TWO_PI_I = 2j * math.pi


def log_oracle(kind, z, w1, w2, height):
    """The defining integral along the horizontal line Im s = height (below the first pole)."""
    mp.mp.dps = 30
    z, w1, w2 = mp.mpc(z), mp.mpc(w1), mp.mpc(w2)
    if kind == "F":
        f = lambda s: mp.exp(z * s) / ((mp.exp(w1 * s) - 1) * (mp.exp(w2 * s) - 1) * s)
    else:
        f = lambda s: -mp.exp((z + w1) * s) / ((mp.exp(w1 * s) - 1) ** 2 * (mp.exp(w2 * s) - 1) * s)
    return complex(mp.quad(lambda x: f(x + 1j * height), [-mp.inf, -5, 0, 5, mp.inf]))


@pytest.mark.parametrize("kind", ["F", "G"])
def test_half_one_one_matches_shifted_line_oracle(kind):
    assert abs(log_conifold(kind, 0.5, 1, 1) - log_oracle(kind, 0.5, 1, 1, 1.0)) < 1e-9


def test_complex_period_matches_oracle():
    assert abs(log_conifold("F", 0.4, 1, 1 - 0.5j) - log_oracle("F", 0.4, 1, 1 - 0.5j, 0.5)) < 1e-9


def test_homogeneity():
    a = conifold_F(0.4, 1, 1 - 0.5j)
    b = conifold_F(0.8, 2, 2 - 1j)
    assert abs(a / b - 1) < 1e-8


def test_period_swap_at_midpoint():
    w1, w2 = 1.0, 0.7 - 0.3j
    z = (w1 + w2) / 2
    assert abs(log_conifold("F", z, w1, w2) - log_conifold("F", z, w2, w1)) < 1e-12


@pytest.mark.parametrize("kind,z", [("F", 0.5), ("G", 0.3 + 0.1j)])
def test_quadrature_refinement_is_stable(kind, z):
    base = log_conifold(kind, z, 1, 1 - 0.2j)
    fine = log_conifold(kind, z, 1, 1 - 0.2j, tail=76, hscale=0.5)
    assert abs(base - fine) < 1e-9


def test_literal_integral_outside_strip():
    with pytest.raises(StripViolation):
        log_conifold("F", -0.5, 1, 1)


def test_rotated_continuation_agrees_with_literal():
    assert abs(log_conifold("F", 0.5, 1, 1, rotate=True) - log_conifold("F", 0.5, 1, 1)) < 1e-12


V, W, VT, PHI = 0.4 + 0.6j, 1.0, 0.3 + 0.1j, 0.25 + 0.1j


def test_q_f_shift_identity():
    h = 0.7 + 0.4j
    assert abs(q_F(V + W, W, VT + PHI, PHI, h) - q_F(V, W, VT, PHI, h)) < 1e-12


def test_q_g_shift_identity():
    h = 0.7 + 0.4j
    assert abs(q_G(V + W, W, VT + PHI, PHI, h) - q_G(V, W, VT, PHI, h) + q_F(V, W, VT, PHI, h)) < 1e-12


def test_q_g_at_zero():
    h = -0.3 + 0.9j
    expected = (2 / h) * (W - h * PHI) / TWO_PI_I ** 3 * ZETA3 - math.pi * 1j / 24
    assert abs(q_G(0, W, 0, PHI, h) - expected) < 1e-13


def test_starred_functions_tend_to_one():
    vt = 0.3 - 0.2j + math.pi * 1j
    vals = [max(abs(log_starred_F(V, W, vt, PHI, 1j * 2.0 ** -k)), abs(log_starred_G(V, W, vt, PHI, 1j * 2.0 ** -k)))
            for k in range(4, 21, 4)]
    assert vals[-1] < 1e-6
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_starred_f_bounded_at_infinity():
    vt = 0.3 - 0.2j + math.pi * 1j
    mags = [abs(starred_F(V, W, vt, PHI, 1j * r)) for r in (10, 100, 1000, 1e4)]
    assert max(mags) < 10
    assert abs(mags[-1] - mags[-2]) < 0.1 * mags[-2]
