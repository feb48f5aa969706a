from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from dtjoyce.errors import NotTame, OnDiscriminant
from dtjoyce.frobenius import (
    a2_structure,
    canonical_coordinates,
    compcom_residual,
    frobenius_V,
    lie_euler_metric,
    multiplication_operator_U,
    trivial_structure,
    twisted_multiplication,
    twisted_product_constants,
)

F = a2_structure()
finite = dict(allow_nan=False, allow_infinity=False)
pts = st.tuples(st.complex_numbers(max_magnitude=3, **finite), st.complex_numbers(max_magnitude=3, **finite))


def test_a2_metric_and_dimension():
    assert F.g[0, 0] == 0 and F.g[0, 1] == pytest.approx(1 / 3)
    assert F.d == Fraction(1, 3)


@given(pts)
def test_compcom(t):
    assert compcom_residual(F, t) < 1e-10


def test_u_identity_at_zero_one():
    U, det = multiplication_operator_U(F, [0, 1])
    assert np.allclose(U, np.eye(2), atol=1e-15) and det == pytest.approx(1)


@given(pts)
def test_det_u_is_discriminant(t):
    a, b = t
    _, det = multiplication_operator_U(F, t)
    assert abs(det - (4 * a ** 3 + 27 * b ** 2) / 27) < 1e-10 * max(1, abs(a) ** 3, abs(b) ** 2)


def test_det_u_vanishes_on_discriminant():
    a = -3.0
    b = np.sqrt(-4 * a ** 3 / 27)
    assert abs(multiplication_operator_U(F, [a, b])[1]) < 1e-12
    with pytest.raises(OnDiscriminant):
        twisted_product_constants(F, [a, b])


def test_not_tame_at_zero_one():
    with pytest.raises(NotTame):
        canonical_coordinates(F, [0, 1])


def test_canonical_frame_at_minus_three_one():
    t = np.array([-3, 1], dtype=complex)
    cf = canonical_coordinates(F, t)
    assert cf.idempotency_residual < 1e-8
    assert abs(cf.u[0] - cf.u[1]) > 0.1
    assert np.allclose(cf.vectors.sum(axis=1), F.unit, atol=1e-7)
    assert np.allclose(cf.vectors @ cf.u, F.euler(t), atol=1e-7)


def test_trivial_canonical_coordinate():
    assert canonical_coordinates(trivial_structure(), [0.7 + 0.1j]).u[0] == pytest.approx(0.7 + 0.1j)


def test_frobenius_v():
    V = frobenius_V(F)
    assert np.allclose(V, np.diag([-1 / 6, 1 / 6]))
    g = F.g
    assert (g @ V)[1, 0] == pytest.approx(-1 / 18)  # g(V d_a, d_b)
    assert np.allclose(frobenius_V(trivial_structure()), 0)


def test_twisted_product_display():
    a, b = 1, 1
    D = 4 * a ** 3 + 27 * b ** 2
    assert D == 31
    prod = D * twisted_multiplication(F, [a, b], [1, 0], [1, 0])
    assert np.allclose(prod, [6 * a * a, -9 * a * b], atol=1e-12)


@given(pts, st.tuples(st.complex_numbers(max_magnitude=2, **finite), st.complex_numbers(max_magnitude=2, **finite)))
def test_euler_is_unit_for_twisted_product(t, X):
    a, b = t
    assume(abs(4 * a ** 3 + 27 * b ** 2) > 1e-2)
    out = twisted_multiplication(F, t, F.euler(t), np.array(X))
    assert np.allclose(out, X, atol=1e-8 * max(1, abs(a) ** 3, abs(b) ** 2))


def test_twisted_product_associative():
    rng = np.random.default_rng(4)
    for _ in range(10):
        t = rng.normal(size=2) + 1j * rng.normal(size=2)
        C = twisted_product_constants(F, t)
        left = np.einsum("ijm,mkp->ijkp", C, C)
        right = np.einsum("jkm,imp->ijkp", C, C)
        assert np.max(np.abs(left - right)) < 1e-10


@given(pts)
def test_lie_derivative_of_metric(t):
    assert np.max(np.abs(lie_euler_metric(F, t) - (2 - float(F.d)) * F.g)) < 1e-6


@given(pts)
def test_u_self_adjoint_v_skew(t):
    U, _ = multiplication_operator_U(F, t)
    V = frobenius_V(F, t)
    g = F.g
    assert np.max(np.abs(g @ U - (g @ U).T)) < 1e-12
    assert np.max(np.abs(g @ V + V.T @ g)) < 1e-15
