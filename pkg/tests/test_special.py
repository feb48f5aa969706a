import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from dtjoyce.errors import PoleError
from dtjoyce.special import (
    bernoulli_poly,
    gamma,
    lambda_fn,
    lambda_reflection_residual,
    log_lambda,
    loggamma,
    polylog,
    stirling_tail,
)

finite = dict(allow_nan=False, allow_infinity=False)


def lambda_oracle(w, eta):
    w, eta = mp.mpc(w), mp.mpc(eta)
    return complex(mp.exp(w) * mp.gamma(w + eta) / (mp.sqrt(2 * mp.pi) * mp.power(w, w + eta - 0.5)))


def test_gamma_small_values():
    assert gamma(1) == pytest.approx(1, abs=1e-15)
    assert gamma(5) == pytest.approx(24, rel=1e-14)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        gamma(z)


@given(st.complex_numbers(max_magnitude=30, **finite))
def test_gamma_matches_mpmath(z):
    assume(min(abs(z - n) for n in range(-31, 1)) > 1e-3)
    ref = complex(mp.gamma(mp.mpc(z)))
    assume(1e-250 < abs(ref) < 1e250)
    assert abs(gamma(z) / ref - 1) < 1e-11


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=40, **finite))
def test_loggamma_exponentiates_to_gamma(z):
    assume(min(abs(z - n) for n in range(-41, 1)) > 1e-3)
    ref = complex(mp.loggamma(mp.mpc(z)))
    d = loggamma(z) - ref
    assert abs(d.real) < 1e-10 * max(1, abs(ref))
    assert abs(cmath.exp(1j * d.imag) - 1) < 1e-9


def test_gamma_reflection_grid():
    for x in np.linspace(-3.3, 3.7, 29):
        for y in (0.0, 0.4, -1.3):
            z = complex(x, y)
            if abs(z - round(x)) < 1e-3:
                continue
            assert abs(gamma(z) * gamma(1 - z) * cmath.sin(math.pi * z) / math.pi - 1) < 1e-11


def test_lambda_at_one_zero():
    assert lambda_fn(1, 0) == pytest.approx(math.e / math.sqrt(2 * math.pi), rel=1e-14)


def test_lambda_eta_symmetry_example():
    assert lambda_fn(2 + 3j, 0) == pytest.approx(lambda_fn(2 + 3j, 1), rel=1e-13)


def test_lambda_pole():
    with pytest.raises(PoleError):
        lambda_fn(1, -1)


@pytest.mark.parametrize("w,eta", [(0.5j, 0.25), (-0.5j, 0.25), (3j, 0)])
def test_lambda_reflection_examples(w, eta):
    assert abs(lambda_reflection_residual(w, eta)) < 1e-11


def test_lambda_reflection_closed_form_at_half_i():
    # Lambda(i/2, 1/4) Lambda(-i/2, 3/4) = (1 - i e^{-pi})^{-1}
    lhs = lambda_fn(0.5j, 0.25) * lambda_fn(-0.5j, 0.75)
    assert lhs == pytest.approx(1 / (1 - 1j * math.exp(-math.pi)), rel=1e-12)


@given(st.complex_numbers(min_magnitude=0.2, max_magnitude=30, **finite),
       st.complex_numbers(max_magnitude=1.5, **finite))
def test_lambda_matches_oracle(w, eta):
    assume(abs(w.imag) > 1e-3 or w.real > 0)
    assume(min(abs(w + eta - n) for n in range(-40, 1)) > 1e-2)
    ref = lambda_oracle(w, eta)
    assume(1e-200 < abs(ref) < 1e200)
    assert abs(lambda_fn(w, eta) / ref - 1) < 1e-9
    assert abs(lambda_fn(w, eta)) > 0


def test_bernoulli_b2():
    for x in (0, 0.3, 1.7 - 0.2j):
        assert bernoulli_poly(2, x) == pytest.approx(x * x - x + 1 / 6, abs=1e-15)


def test_bernoulli_generating_function():
    t, x = 0.37, 0.6 + 0.1j
    series = sum(bernoulli_poly(k, x) * t ** k / math.factorial(k) for k in range(25))
    assert series == pytest.approx(t * cmath.exp(x * t) / (math.exp(t) - 1), rel=1e-14)


def test_stirling_example():
    assert abs(log_lambda(10, 0.3) - stirling_tail(10, 0.3, 8)) < 1e-8


def test_stirling_leading_term():
    w = 20
    assert stirling_tail(w, 0, 2) == pytest.approx(1 / (12 * w), rel=1e-15)
    # the sign is fixed by log Gamma(w) = (w - 1/2) log w - w + log(2 pi)/2 + 1/(12 w) + ...
    assert log_lambda(w, 0).real == pytest.approx(1 / (12 * w), rel=1e-3)


def test_stirling_error_scaling():
    # |log Lambda - tail_K| <= C |w|^-K on |w| in [5, 50]; report the fitted constant
    K = 6
    ratios = []
    for r in np.geomspace(5, 50, 8):
        for a in (-2.0, 0.0, 1.0, 2.5):
            w = r * cmath.exp(1j * a)
            ratios.append(abs(log_lambda(w, 0.3) - stirling_tail(w, 0.3, K)) * r ** K)
    C = max(ratios)
    assert C < 1.0, C


def test_polylog_examples():
    assert polylog(0, 0.5) == pytest.approx(1)
    assert polylog(1, 0.5) == pytest.approx(math.log(2), rel=1e-15)
    assert polylog(3, 1) == pytest.approx(float(mp.zeta(3)), rel=1e-15)
    with pytest.raises(PoleError):
        polylog(0, 1)


@given(st.sampled_from([2, 3]), st.complex_numbers(max_magnitude=6, **finite))
def test_polylog_matches_mpmath(k, x):
    assume(abs(x - 1) > 1e-3 and not (x.imag == 0 and x.real > 1))
    ref = complex(mp.polylog(k, mp.mpc(x)))
    assert abs(polylog(k, x) - ref) < 1e-12 * max(1, abs(ref))


@given(st.sampled_from([1, 2, 3]), st.complex_numbers(min_magnitude=0.1, max_magnitude=4, **finite))
def test_polylog_ladder(k, x):
    assume(abs(x - 1) > 0.1 and (abs(x.imag) > 0.05 or x.real < 0.9))
    h = 1e-5
    d = (polylog(k, x + h) - polylog(k, x - h)) / (2 * h)
    assert abs(d - polylog(k - 1, x) / x) < 1e-6 * max(1, abs(polylog(k - 1, x) / x))
