"""Joyce functions per family and the linear data they induce.

A model is a function J(z, theta) of 2n variables together with the skew form
eta on covectors.  Everything downstream (connection, Joyce form, V, diamond
product) is built from the third theta-derivatives T_ijk(z) at theta = 0.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .bps import BpsStructure, classify, doubled_skew
from .errors import DegenerateForm, DimensionMismatch, NotFinite, NotUncoupled, PoleError, ZeroCentralCharge
from .special import polylog

TWO_PI_I = 2j * math.pi
COND_MAX = 1e12


class JoyceModel:
    """Base class: subclasses provide J, grad_theta, hessian and third0."""

    family = ""

    def __init__(self, n: int, eta: np.ndarray):
        self.n = n
        self.eta = np.asarray(eta, dtype=float).reshape(n, n)

    def J(self, z, theta) -> complex:
        raise NotImplementedError

    def grad_theta(self, z, theta) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, z, theta) -> np.ndarray:
        raise NotImplementedError

    def third0(self, z) -> np.ndarray:
        """T_ijk(z) = d^3 J / d theta_i d theta_j d theta_k at theta = 0."""
        raise NotImplementedError

    def euler(self, z) -> np.ndarray:
        return np.asarray(z, dtype=complex)


# --- uncoupled ------------------------------------------------------------------


class UncoupledJoyce(JoyceModel):
    """J = (1/24 pi i) sum_{gamma != 0} Omega(gamma) theta(gamma)^3 / Z(gamma)."""

    family = "uncoupled"

    def __init__(self, classes: np.ndarray, omegas: np.ndarray, eta: np.ndarray):
        super().__init__(classes.shape[1], eta)
        self.classes = classes.astype(float)
        self.omegas = omegas.astype(float)

    def _Z(self, z):
        Z = self.classes @ np.asarray(z, dtype=complex)
        if np.any(Z == 0):
            raise ZeroCentralCharge("an active class has Z = 0")
        return Z

    def J(self, z, theta):
        t = self.classes @ np.asarray(theta, dtype=complex)
        return complex(np.sum(self.omegas * t ** 3 / self._Z(z)) / (12 * TWO_PI_I))

    def grad_theta(self, z, theta):
        t = self.classes @ np.asarray(theta, dtype=complex)
        w = self.omegas * t ** 2 / self._Z(z) / (4 * TWO_PI_I)
        return self.classes.T @ w

    def hessian(self, z, theta):
        t = self.classes @ np.asarray(theta, dtype=complex)
        w = self.omegas * t / self._Z(z) / (2 * TWO_PI_I)
        return np.einsum("a,ai,aj->ij", w, self.classes, self.classes)

    def third0(self, z):
        w = self.omegas / self._Z(z) / (2 * TWO_PI_I)
        c = self.classes
        return np.einsum("a,ai,aj,ak->ijk", w, c, c, c)


def model_uncoupled(s: BpsStructure) -> UncoupledJoyce:
    flags = classify(s)
    if "finite" not in flags:
        raise NotFinite("the cubic Joyce function needs a finite structure")
    if "uncoupled" not in flags:
        raise NotUncoupled("active classes must be mutually orthogonal")
    act = s.active(None)
    for g, _ in act:
        if s.Z(g) == 0:
            raise ZeroCentralCharge(f"Z({list(g)}) = 0")
    classes = np.array([g for g, _ in act], dtype=np.int64).reshape(len(act), s.rank)
    omegas = np.array([float(v) for _, v in act])
    return UncoupledJoyce(classes, omegas, s.lattice.skew)


# --- conifold and GV-weighted sums ------------------------------------------------------


class ConifoldJoyce(JoyceModel):
    """J = (1/6w^4) sum_beta GV(beta) (v(beta) phi - w theta(beta))^3 Li_0(e^{2 pi i v(beta)/w}).

    Coordinates z = (v_1..v_m, w), theta = (theta_1..theta_m, phi).  The
    resolved conifold is m = 1 with GV = {1: 1}.
    """

    family = "conifold"

    def __init__(self, gv: dict):
        self.gv = {tuple(int(c) for c in np.atleast_1d(b)): Fraction(k) for b, k in gv.items()}
        m = len(next(iter(self.gv)))
        super().__init__(m + 1, np.zeros((m + 1, m + 1)))
        self.m = m

    def _terms(self, z):
        z = np.asarray(z, dtype=complex)
        v, w = z[:-1], z[-1]
        if w == 0:
            raise ZeroCentralCharge("w = 0")
        for b, k in self.gv.items():
            u = complex(np.dot(b, v))
            E = cmath.exp(TWO_PI_I * u / w)
            if abs(1 - E) < 1e-300:
                raise PoleError("e^{2 pi i v/w} = 1")
            L = E / (1 - E)
            g = np.concatenate([-w * np.asarray(b, dtype=float), [u]])  # d c / d theta
            yield float(k), L, g, w

    def J(self, z, theta):
        th = np.asarray(theta, dtype=complex)
        return complex(sum(k * L * np.dot(g, th) ** 3 / (6 * w ** 4) for k, L, g, w in self._terms(z)))

    def grad_theta(self, z, theta):
        th = np.asarray(theta, dtype=complex)
        return sum(k * L * np.dot(g, th) ** 2 / (2 * w ** 4) * g for k, L, g, w in self._terms(z))

    def hessian(self, z, theta):
        th = np.asarray(theta, dtype=complex)
        return sum(k * L * np.dot(g, th) / w ** 4 * np.outer(g, g) for k, L, g, w in self._terms(z))

    def third0(self, z):
        return sum(k * L / w ** 4 * np.einsum("i,j,k->ijk", g, g, g) for k, L, g, w in self._terms(z))

    def prepotential(self, z) -> complex:
        """-w^2/(2 pi i)^3 sum_beta GV(beta) Li_3(e^{2 pi i v(beta)/w})."""
        z = np.asarray(z, dtype=complex)
        v, w = z[:-1], z[-1]
        tot = sum(float(k) * polylog(3, cmath.exp(TWO_PI_I * complex(np.dot(b, v)) / w)) for b, k in self.gv.items())
        return -w * w / TWO_PI_I ** 3 * tot

    def H(self, z, theta) -> complex:
        """v J_theta + w J_phi = sum_i z_i dJ/dtheta_i (vanishes identically)."""
        return complex(np.dot(np.asarray(z, dtype=complex), self.grad_theta(z, theta)))


def model_conifold(gv: dict | None = None) -> ConifoldJoyce:
    return ConifoldJoyce({(1,): 1} if gv is None else gv)


class DoubledJoyce(JoyceModel):
    """The same J viewed on the doubled base: independent of the dual coordinates."""

    def __init__(self, base: JoyceModel):
        super().__init__(2 * base.n, doubled_skew(np.rint(base.eta).astype(np.int64)))
        self.base = base
        self.family = base.family + "-doubled"

    def _pad2(self, a):
        n = self.base.n
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        out[:n, :n] = a
        return out

    def J(self, z, theta):
        n = self.base.n
        return self.base.J(np.asarray(z)[:n], np.asarray(theta)[:n])

    def grad_theta(self, z, theta):
        n = self.base.n
        return np.concatenate([self.base.grad_theta(np.asarray(z)[:n], np.asarray(theta)[:n]), np.zeros(n)])

    def hessian(self, z, theta):
        n = self.base.n
        return self._pad2(self.base.hessian(np.asarray(z)[:n], np.asarray(theta)[:n]))

    def third0(self, z):
        n = self.base.n
        out = np.zeros((2 * n,) * 3, dtype=complex)
        out[:n, :n, :n] = self.base.third0(np.asarray(z)[:n])
        return out


# --- PDE check ---------------------------------------------------------------------------


def _central(f: Callable, x: np.ndarray, i: int, h: complex):
    e = np.zeros(len(x), dtype=complex)
    e[i] = h
    return (f(x + e) - f(x - e)) / (2 * h)


def verify_fl_pde(m: JoyceModel, samples: Sequence[tuple], fd_step: float = 1e-5, tol: float = 1e-6) -> dict:
    """Residual of d2J/dth_i dz_j - d2J/dth_j dz_i - sum eta_pq J_{th_i th_p} J_{th_j th_q}."""
    worst = 0.0
    for z, th in samples:
        z = np.asarray(z, dtype=complex)
        th = np.asarray(th, dtype=complex)
        h = fd_step * max(1.0, float(np.max(np.abs(z))))
        D = np.array([_central(lambda zz: m.grad_theta(zz, th), z, j, h) for j in range(m.n)])  # D[j, i]
        lhs = D - D.T  # [j, i] -> d/dz_j J_i - d/dz_i J_j; transpose to (i, j)
        Hs = m.hessian(z, th)
        rhs = Hs @ m.eta @ Hs.T
        worst = max(worst, float(np.max(np.abs(lhs.T - rhs))))
    return {"max_residual": worst, "samples": len(samples), "pass": bool(worst < tol)}


# --- linear data -----------------------------------------------------------------------------


@dataclass
class LinearData:
    z: np.ndarray
    T: np.ndarray  # third derivatives at theta = 0
    connection: np.ndarray  # Gamma[i, j, m]: nabla_i d_j = sum_m Gamma[i, j, m] d_m
    g: np.ndarray
    V: np.ndarray  # V[q, i]: V(d_i) = sum_q V[q, i] d_q
    euler: np.ndarray
    diamond: np.ndarray | None = None  # C[i, j, m]: d_i <> d_j = sum_m C[i, j, m] d_m
    prepotential3: np.ndarray | None = None
    notes: list = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return self.diamond is None


def _diamond_from(T: np.ndarray, g: np.ndarray) -> np.ndarray:
    if not np.any(g) or np.linalg.cond(g) >= COND_MAX:
        raise DegenerateForm("Joyce form is singular; the diamond product is undefined")
    gi = np.linalg.inv(g)
    return np.einsum("ijk,km->ijm", T, gi)


def linear_data(m: JoyceModel, z) -> LinearData:
    z = np.asarray(z, dtype=complex)
    T = m.third0(z)
    eta = m.eta
    conn = -np.einsum("ijl,lm->ijm", T, eta)
    g = np.einsum("i,ijk->jk", z, T)
    V = -np.einsum("j,ijp,pq->qi", z, T, eta)
    data = LinearData(z, T, conn, g, V, m.euler(z))
    try:
        data.diamond = _diamond_from(T, g)
    except DegenerateForm as exc:
        data.notes.append(str(exc))
    if not np.any(eta):
        data.prepotential3 = T
    return data


def diamond(m: JoyceModel, z) -> np.ndarray:
    return _diamond_from(m.third0(np.asarray(z, dtype=complex)), joyce_form(m, z))


def joyce_form(m: JoyceModel, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.einsum("i,ijk->jk", z, m.third0(z))


def linear_identities(m: JoyceModel, z, fd_step: float = 1e-5) -> dict:
    """Finite-difference residuals of the structural identities of the linear data.

    flatness: curvature of nabla^J; metric: nabla^J g = 0; plus V skew-adjoint,
    the eta/g diagram for -V, the Euler field as unit of the diamond product
    and symmetry of T.
    """
    z = np.asarray(z, dtype=complex)
    n = m.n
    eta = m.eta
    h = fd_step * max(1.0, float(np.max(np.abs(z))))
    dT = np.array([_central(m.third0, z, i, h) for i in range(n)])  # dT[i] = d_{z_i} T
    T = m.third0(z)
    # R_{ijk}^m with the sign conventions of nabla_i d_j = -sum eta_lm T_ijl d_m
    term1 = np.einsum("lm,ijkl->ijkm", eta, -dT + np.transpose(dT, (1, 0, 2, 3)))
    A = np.einsum("lm,pq,iql,jkp->ijkm", eta, eta, T, T)
    term2 = A - np.transpose(A, (1, 0, 2, 3))
    flat = float(np.max(np.abs(term1 + term2))) if n else 0.0

    g = np.einsum("i,ijk->jk", z, T)
    dg = np.array([_central(lambda zz: joyce_form(m, zz), z, i, h) for i in range(n)])
    conn = -np.einsum("ijl,lm->ijm", T, eta)
    cov = dg - np.einsum("ijm,mk->ijk", conn, g) - np.einsum("ikm,jm->ijk", conn, g)
    metric = float(np.max(np.abs(cov)))

    V = -np.einsum("j,ijp,pq->qi", z, T, eta)
    skew = float(np.max(np.abs(V.T @ g + g @ V)))
    diagram = float(np.max(np.abs(-V - (g @ eta).T)))
    sym = max(float(np.max(np.abs(T - np.transpose(T, p)))) for p in
              [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)])
    out = {"flatness": flat, "metric": metric, "V_skew": skew, "diagram": diagram, "T_symmetry": sym}
    try:
        C = _diamond_from(T, g)
        E = m.euler(z)
        EX = np.einsum("i,ijm->jm", E, C)  # rows: E <> d_j
        out["euler_unit"] = float(np.max(np.abs(EX - np.eye(n))))
    except DegenerateForm:
        out["euler_unit"] = None
    return out


# --- prepotential / WDVV -------------------------------------------------------------------


class UncoupledPrepotential:
    """F(Z) = (1/8 pi i) sum_{gamma != 0} Omega(gamma) Z(gamma)^2 log Z(gamma) (principal log)."""

    def __init__(self, m: UncoupledJoyce):
        self.model = m

    def __call__(self, z) -> complex:
        Z = self.model.classes @ np.asarray(z, dtype=complex)
        if np.any((Z.imag == 0) & (Z.real < 0)):
            warnings.warn("Z(gamma) on the negative real axis: principal log branch used", RuntimeWarning)
        return complex(np.sum(self.model.omegas * Z ** 2 * np.log(Z)) / (4 * TWO_PI_I))

    def third(self, z) -> np.ndarray:
        """Closed-form third derivatives: (1/4 pi i) sum Omega gamma^3 / Z."""
        return self.model.third0(z)


def prepotential_uncoupled(s: BpsStructure) -> UncoupledPrepotential:
    return UncoupledPrepotential(model_uncoupled(s))


def _third_fd_once(F: Callable, z: np.ndarray, h: float) -> np.ndarray:
    n = len(z)
    out = np.zeros((n, n, n), dtype=complex)
    E = np.eye(n)
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                acc = 0j
                for si in (1, -1):
                    for sj in (1, -1):
                        for sk in (1, -1):
                            acc += si * sj * sk * F(z + h * (si * E[i] + sj * E[j] + sk * E[k]))
                val = acc / (8 * h ** 3)
                for p in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                    out[p] = val
    return out


def third_derivatives_fd(F: Callable, z, h: float = 4e-3) -> np.ndarray:
    """All third partials of a scalar function: central differences with one Richardson step."""
    z = np.asarray(z, dtype=complex)
    return (4 * _third_fd_once(F, z, h) - _third_fd_once(F, z, 2 * h)) / 3


def wdvv_check(s: BpsStructure, samples: Sequence, tol: float = 1e-10) -> dict:
    """Associativity of the diamond product of the cubic Joyce function at sample central charges."""
    m = model_uncoupled(s)
    worst = 0.0
    for z in samples:
        C = diamond(m, z)
        left = np.einsum("ijm,mkp->ijkp", C, C)  # (d_i <> d_j) <> d_k
        right = np.einsum("jkm,imp->ijkp", C, C)  # d_i <> (d_j <> d_k)
        worst = max(worst, float(np.max(np.abs(left - right))))
    return {"max_residual": worst, "samples": len(samples), "pass": bool(worst < tol)}


# --- compatibility -------------------------------------------------------------------------------


def compatibility_check(m: JoyceModel, f, points: Sequence, tol: float = 1e-10,
                        coords: Callable | None = None) -> dict:
    """Compare Joyce linear data with a Frobenius structure on the same manifold.

    ``points`` are Frobenius flat coordinates; ``coords`` maps them to Joyce
    base coordinates (identity by default, with identity Jacobian).  The
    scalars lambda, mu are fitted at the first point and validated on the rest.
    """
    from .frobenius import FrobeniusStructure, twisted_product_constants, frobenius_V  # local: avoid cycle

    if not isinstance(f, FrobeniusStructure):
        raise TypeError("f must be a FrobeniusStructure")
    if m.n != f.dim:
        raise DimensionMismatch(f"Joyce model has dimension {m.n}, Frobenius structure {f.dim}")
    coords = coords or (lambda t: np.asarray(t, dtype=complex))
    res = {"g": 0.0, "diamond": 0.0, "euler": 0.0, "V": 0.0}
    lam = mu = None
    for t in points:
        t = np.asarray(t, dtype=complex)
        ld = linear_data(m, coords(t))
        if ld.diamond is None:
            raise DegenerateForm("Joyce form is degenerate")
        gF = f.metric(t)
        CF = twisted_product_constants(f, t)
        if lam is None:
            k = np.unravel_index(np.argmax(np.abs(gF)), gF.shape)
            lam = ld.g[k] / gF[k]
            k = np.unravel_index(np.argmax(np.abs(CF)), CF.shape)
            mu = ld.diamond[k] / CF[k]
        res["g"] = max(res["g"], float(np.max(np.abs(ld.g - lam * gF))))
        res["diamond"] = max(res["diamond"], float(np.max(np.abs(ld.diamond - mu * CF))))
        res["euler"] = max(res["euler"], float(np.max(np.abs(ld.euler - f.euler(t) / mu))))
        res["V"] = max(res["V"], float(np.max(np.abs(ld.V - frobenius_V(f, t) / mu))))
    mu_expected = (2 - f.d) / 2
    res["mu_formula"] = abs(mu - float(mu_expected))
    ok = all(v < tol for v in res.values())
    return {"lambda": lam, "mu": mu, "mu_expected": mu_expected, "checks": res, "pass": bool(ok)}
