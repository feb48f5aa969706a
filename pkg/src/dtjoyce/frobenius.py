"""Frobenius structures in flat coordinates: the trivial one-dimensional one and A2."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import NotTame, OnDiscriminant

TAME_GAP = 1e-9


@dataclass(frozen=True)
class FrobeniusStructure:
    name: str
    dim: int
    g: np.ndarray  # constant metric in flat coordinates
    product: Callable  # t -> c[i, j, m] with d_i * d_j = sum_m c[i, j, m] d_m
    euler_matrix: np.ndarray  # E(t) = euler_matrix @ t (E is linear)
    unit: np.ndarray
    d: Fraction

    def metric(self, t=None) -> np.ndarray:
        return self.g

    def euler(self, t) -> np.ndarray:
        return self.euler_matrix @ np.asarray(t, dtype=complex)

    def mult(self, t, X, Y) -> np.ndarray:
        return np.einsum("i,j,ijm->m", X, Y, self.product(np.asarray(t, dtype=complex)))


def trivial_structure() -> FrobeniusStructure:
    """g(dt, dt) = 1, dt * dt = dt, E = t dt, d = 0."""
    return FrobeniusStructure(
        "trivial", 1, np.array([[1.0 + 0j]]), lambda t: np.ones((1, 1, 1), dtype=complex),
        np.array([[1.0]]), np.array([1.0 + 0j]), Fraction(0),
    )


def _a2_product(t):
    a = complex(t[0])
    c = np.zeros((2, 2, 2), dtype=complex)
    c[0, 0, 1] = -a / 3
    c[0, 1, 0] = c[1, 0, 0] = 1
    c[1, 1, 1] = 1
    return c


def a2_structure() -> FrobeniusStructure:
    """Unfolding of x^3 in coordinates (a, b): e = d_b, g = (da db + db da)/3, E = (2a/3) d_a + b d_b."""
    return FrobeniusStructure(
        "A2", 2, np.array([[0, 1 / 3], [1 / 3, 0]], dtype=complex), _a2_product,
        np.array([[2 / 3, 0], [0, 1.0]]), np.array([0, 1.0 + 0j]), Fraction(1, 3),
    )


def multiplication_operator_U(f: FrobeniusStructure, t) -> tuple[np.ndarray, complex]:
    """Matrix of U(X) = E * X (columns are images of d_i) and its determinant."""
    t = np.asarray(t, dtype=complex)
    U = np.einsum("i,ijm->mj", f.euler(t), f.product(t))
    return U, complex(np.linalg.det(U))


@dataclass(frozen=True)
class CanonicalFrame:
    u: np.ndarray  # eigenvalues of U
    vectors: np.ndarray  # columns: d/du_i in flat coordinates, summing to e
    tame: bool
    idempotency_residual: float


def canonical_coordinates(f: FrobeniusStructure, t, gap: float = TAME_GAP) -> CanonicalFrame:
    t = np.asarray(t, dtype=complex)
    U, _ = multiplication_operator_U(f, t)
    u, vec = np.linalg.eig(U)
    scale = max(1.0, float(np.max(np.abs(u))))
    for i in range(len(u)):
        for j in range(i):
            if abs(u[i] - u[j]) <= gap * scale:
                raise NotTame(f"repeated eigenvalue {u[i]:.6g} of U")
    # normalise so that the idempotents sum to the unit
    coef = np.linalg.solve(vec, f.unit)
    vec = vec * coef
    c = f.product(t)
    res = 0.0
    for i in range(len(u)):
        for j in range(len(u)):
            prod = np.einsum("p,q,pqm->m", vec[:, i], vec[:, j], c)
            target = vec[:, i] if i == j else 0
            res = max(res, float(np.max(np.abs(prod - target))))
    return CanonicalFrame(u, vec, True, res)


def frobenius_V(f: FrobeniusStructure, t=None) -> np.ndarray:
    """V(X) = nabla_X E + ((d - 2)/2) X; V[q, i] is the d_q component of V(d_i)."""
    return f.euler_matrix.astype(complex) + float(f.d - 2) / 2 * np.eye(f.dim)


def twisted_product_constants(f: FrobeniusStructure, t, tol: float = 1e-12) -> np.ndarray:
    """C[i, j, m] with E * (d_i <> d_j) = d_i * d_j."""
    t = np.asarray(t, dtype=complex)
    U, det = multiplication_operator_U(f, t)
    if abs(det) <= tol * max(1.0, float(np.max(np.abs(U))) ** f.dim):
        raise OnDiscriminant("U = E * (-) is not invertible here")
    c = f.product(t)
    return np.einsum("mq,ijq->ijm", np.linalg.inv(U), c)


def twisted_multiplication(f: FrobeniusStructure, t, X, Y) -> np.ndarray:
    return np.einsum("i,j,ijm->m", X, Y, twisted_product_constants(f, t))


def lie_euler_metric(f: FrobeniusStructure, t, h: float = 1e-6) -> np.ndarray:
    """(Lie_E g)_jk by finite differences of E (g is constant in flat coordinates)."""
    t = np.asarray(t, dtype=complex)
    n = f.dim
    DE = np.array([(f.euler(t + h * e) - f.euler(t - h * e)) / (2 * h) for e in np.eye(n)]).T  # DE[i, j] = d_j E^i
    g = f.metric(t)
    return DE.T @ g + g @ DE


def compcom_residual(f: FrobeniusStructure, t) -> float:
    """max |g(d_i * d_j, d_k) - g(d_i, d_j * d_k)| (full symmetry of the 3-tensor)."""
    c = f.product(np.asarray(t, dtype=complex))
    g = f.metric(t)
    A = np.einsum("ijm,mk->ijk", c, g)
    B = np.einsum("jkm,im->ijk", c, g)
    return float(np.max(np.abs(A - B)))
