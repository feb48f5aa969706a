"""Closed-form solutions of the doubled Riemann-Hilbert problems and their checks.

A solution is stored as central charges and untwisted fibre coordinates
theta on the doubled lattice (basis gamma_1..gamma_n, gamma_1^dual..gamma_n^dual).
The twisted coordinates vartheta = log xi are derived once, at construction,
with a family-specific pi*i shift:

* A1 and uncoupled structures: vartheta(gamma) = theta(gamma) - pi i for the
  base basis classes (sigma = -1 there, +1 on the duals);
* conifold: vartheta(beta) = theta(beta) + pi i, all other coordinates unshifted.

Both shifts realise the refinement sigma(beta) = -1; they differ by 2 pi i,
which changes the solutions by rational factors, and each is the one for
which the published closed forms of the second derivatives of J hold exactly.

``log_X(ray, hbar)`` returns log X_{r, gamma_i}(hbar) for the 2n basis
classes, for a non-active ray r, continued meromorphically in hbar.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .bps import (
    BpsStructure,
    DoubledStructure,
    Ray,
    a1_structure,
    active_rays,
    as_class,
    classify,
    conifold_structure,
    double,
)
from .contour import log_starred_F, log_starred_G
from .errors import BoundaryActive, IllConditioned, NotFinite, NotUncoupled
from .special import log_lambda, polylog
from .torus import BirationalAutomorphism, TorusPoint, apply_bps_automorphism, twist_sign

TWO_PI_I = 2j * math.pi
PI_I = 1j * math.pi


def _wrap(d: complex) -> complex:
    """Reduce a difference of logarithms to the representative nearest 0."""
    return d - TWO_PI_I * round(d.imag / (2 * math.pi))


def a1_log_R(z: complex, vartheta: complex, hbar: complex, sign: int) -> complex:
    """log R_+ or log R_- of the doubled A1 problem (sign = +1 / -1)."""
    w = z / (TWO_PI_I * hbar)
    if sign > 0:
        return log_lambda(w, -vartheta / TWO_PI_I)
    return -log_lambda(-w, 1 + vartheta / TWO_PI_I)


def _side(zc: complex, ray: Ray) -> int:
    s = (zc / ray.phase).imag
    if abs(s) <= 1e-12 * abs(zc):
        raise BoundaryActive(f"ray {ray.phase} is active (carries Z = {zc})")
    return 1 if s > 0 else -1


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhSolution:
    """Evaluator for X_{r,gamma}(hbar); subclasses fix the family."""

    doubled: DoubledStructure
    theta: np.ndarray  # untwisted coordinates on the doubled basis
    family: str = field(default="", init=False)

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=complex).reshape(2 * self.doubled.n)
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    # -- data -----------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.doubled.n

    @property
    def charges(self) -> np.ndarray:
        return np.concatenate([self.doubled.base.central_charge, self.doubled.dual_charge])

    @property
    def structure(self) -> BpsStructure:
        return self.doubled.structure

    @property
    def vartheta(self) -> np.ndarray:
        return self.theta + self._shift()

    def _shift(self) -> np.ndarray:
        raise NotImplementedError

    def with_params(self, charges: np.ndarray, theta: np.ndarray) -> "RhSolution":
        n = self.n
        base = BpsStructure(self.doubled.base.lattice, charges[:n], self.doubled.base.omega)
        return replace(self, doubled=DoubledStructure(base, charges[n:]), theta=theta)

    def log_xi(self, gamma: Sequence[int]) -> complex:
        """vartheta(gamma) = log xi(gamma) on the twisted torus."""
        gamma = as_class(gamma)
        val = complex(np.dot(np.asarray(gamma, dtype=float), self.vartheta))
        if twist_sign(self.structure.lattice, gamma) < 0:
            val += PI_I
        return val

    # -- evaluation ---------------------------------------------------------------
    def log_X(self, ray: Ray, hbar: complex) -> np.ndarray:
        raise NotImplementedError

    def X(self, ray: Ray, gamma: Sequence[int], hbar: complex) -> complex:
        """X_{r,gamma}(hbar) for any class, via twisted multiplicativity."""
        return self.point(ray, hbar).character(gamma)

    def point(self, ray: Ray, hbar: complex) -> TorusPoint:
        return TorusPoint(self.structure.lattice, self.log_X(ray, hbar), twisted=True)

    def ray_automorphism(self, ray: Ray, cutoff: float = 1e3) -> BirationalAutomorphism:
        """The twisted BPS automorphism S(ray) of the doubled structure."""
        s = self.structure
        members = [(g, v) for g, v in s.active(cutoff) if ray.contains(s.Z(g))]
        return BirationalAutomorphism(s.lattice, tuple(members), twisted=True)


# --- doubled A1 ----------------------------------------------------------------


@dataclass(frozen=True)
class A1Solution(RhSolution):
    family: str = field(default="a1", init=False)

    def _shift(self):
        return np.array([-PI_I, 0])

    def log_R(self, ray: Ray, hbar: complex) -> complex:
        z = complex(self.doubled.base.central_charge[0])
        return a1_log_R(z, self.vartheta[0], hbar, _side(z, ray))

    def log_X(self, ray, hbar):
        z, zd = self.charges
        vt = self.vartheta
        return np.array([vt[0] - z / hbar, vt[1] - zd / hbar + self.log_R(ray, hbar)])


def solve_a1_doubled(z: complex, theta: complex, z_dual: complex = 0.0, theta_dual: complex = 0.0) -> A1Solution:
    """Solution with R_+-(hbar) = Lambda(+-z/2 pi i hbar, (pi i -+ theta)/2 pi i)^{+-1}."""
    if z == 0:
        raise ValueError("z must be nonzero")
    return A1Solution(double(a1_structure(z), [z_dual]), np.array([theta, theta_dual]))


# --- finite uncoupled ------------------------------------------------------------


def _positive(g: tuple) -> bool:
    for c in g:
        if c:
            return c > 0
    return False


@dataclass(frozen=True)
class UncoupledSolution(RhSolution):
    """Superposition of A1 factors, one per +- pair of active classes.

    log X_beta = vartheta(beta) - Z(beta)/hbar - sum_gamma Omega(gamma) <gamma, beta> log R_gamma,
    where R_gamma is the A1 function for (Z(gamma), vartheta(gamma)) and gamma
    runs over the active classes with positive leading coordinate.
    """

    family: str = field(default="uncoupled", init=False)

    def _shift(self):
        n = self.n
        return np.concatenate([np.full(n, -PI_I), np.zeros(n)])

    def pairs(self):
        s = self.structure
        return [(g, v) for g, v in s.active(None) if _positive(g)]

    def log_X(self, ray, hbar):
        s = self.structure
        out = self.vartheta - self.charges / hbar
        basis = np.eye(2 * self.n, dtype=np.int64)
        for g, om in self.pairs():
            expo = np.array([-float(om) * s.pair(g, b) for b in basis])
            if not np.any(expo):
                continue
            zg = s.Z(g)
            out = out + expo * a1_log_R(zg, self.log_xi(g), hbar, _side(zg, ray))
        return out


def solve_uncoupled(s: BpsStructure, theta: Sequence[complex], dual_charge=None,
                    theta_dual=None) -> UncoupledSolution:
    flags = classify(s)
    if "finite" not in flags:
        raise NotFinite("solve_uncoupled needs a finite BPS structure")
    if "uncoupled" not in flags:
        raise NotUncoupled("active classes must be mutually orthogonal")
    if "integral" not in flags:
        raise NotUncoupled("Omega must be integral")
    n = s.rank
    dual_charge = np.zeros(n) if dual_charge is None else dual_charge
    theta_dual = np.zeros(n) if theta_dual is None else theta_dual
    th = np.concatenate([np.asarray(theta, dtype=complex), np.asarray(theta_dual, dtype=complex)])
    return UncoupledSolution(double(s, dual_charge), th)


# --- conifold -----------------------------------------------------------------------


@dataclass(frozen=True)
class ConifoldSolution(RhSolution):
    """B = F*, D = G* / G*(0, w, 0, phi); basis (beta, delta, beta^dual, delta^dual)."""

    family: str = field(default="conifold", init=False)
    shifts: bool = True  # allow difference-equation continuation of F, G

    def _shift(self):
        return np.array([PI_I, 0, 0, 0])

    def region(self, ray: Ray) -> tuple[int, int]:
        """(side, n): side=+1 for r in Sigma(n), -1 for r in -Sigma(n)."""
        v, w = (complex(c) for c in self.doubled.base.central_charge)
        u = ray.phase / w
        side = 1
        if u.imag < 0:
            u, side = -u, -1
        if abs(u.imag) <= 1e-12:
            raise BoundaryActive("ray is +-l_infinity")
        vp = v / w
        t = (u * vp.imag / u.imag).real - vp.real
        n = math.ceil(t)
        if abs(t - round(t)) <= 1e-9:
            raise BoundaryActive(f"ray is an active ray +-l_{round(t)}")
        return side, n

    def log_BD(self, n: int, vt: np.ndarray, hbar: complex) -> tuple[complex, complex]:
        v, w = (complex(c) for c in self.doubled.base.central_charge)
        vn, tn = v + n * w, vt[0] + n * vt[1]
        lb = log_starred_F(vn, w, tn, vt[1], hbar, shifts=self.shifts)
        ld = (log_starred_G(vn, w, tn, vt[1], hbar, shifts=self.shifts)
              - log_starred_G(0, w, 0, vt[1], hbar, shifts=self.shifts))
        return lb, ld + n * lb

    def _log_X_sector(self, n: int, vt: np.ndarray, charges: np.ndarray, hbar: complex) -> np.ndarray:
        lb, ld = self.log_BD(n, vt, hbar)
        out = vt - charges / hbar
        out[2] += lb
        out[3] += ld
        return out

    def log_X(self, ray, hbar):
        side, n = self.region(ray)
        if side > 0:
            return self._log_X_sector(n, self.vartheta, self.charges, hbar)
        # X^xi_{-r,gamma}(hbar) = X^{sigma xi}_{r,-gamma}(-hbar), sigma = twisted inverse
        return -self._log_X_sector(n, -self.vartheta, self.charges, -hbar)


def solve_conifold(v: complex, w: complex, theta: complex, phi: complex,
                   dual_charge=(0.0, 0.0), theta_dual=(0.0, 0.0), shifts: bool = True) -> ConifoldSolution:
    if w == 0 or (v / w).imag <= 0:
        raise ValueError("(v, w) must lie in M_+: w != 0 and Im(v/w) > 0")
    th = np.array([theta, phi, *theta_dual], dtype=complex)
    return ConifoldSolution(double(conifold_structure(v, w), dual_charge), th, shifts=shifts)


# ---------------------------------------------------------------------------
# Verification


def _adjacent_rays(sol: RhSolution, ray: Ray, eps: float | None = None) -> tuple[Ray, Ray]:
    """Non-active rays just anticlockwise (r1) and clockwise (r2) of ``ray``."""
    if eps is None:
        eps = 1e-4
        try:
            rays = active_rays(sol.structure, 1e3)
            gaps = [abs(cmath.phase(r.phase / ray.phase)) for r, _ in rays]
            gaps = [g for g in gaps if g > 1e-9]
            if gaps:
                eps = min(eps, 0.5 * min(gaps))
        except Exception:
            pass
    return ray.rotate(eps), ray.rotate(-eps)


def verify_jumps(sol: RhSolution, ray: Ray, samples: Sequence[complex], tol: float = 1e-10) -> dict:
    """Compare X_{r2} with S(ray)(X_{r1}) for r1/r2 just anticlockwise/clockwise of ray."""
    r1, r2 = _adjacent_rays(sol, ray)
    auto = sol.ray_automorphism(ray)
    errs = []
    for h in samples:
        p1 = sol.point(r1, h)
        p2 = sol.log_X(r2, h)
        img = apply_bps_automorphism(auto, p1).log_coords
        errs.append(max(abs(cmath.exp(_wrap(a - b)) - 1) for a, b in zip(img, p2)))
    m = max(errs) if errs else 0.0
    return {"max_error": m, "samples": len(errs), "pass": bool(m < tol), "errors": errs}


def verify_asymptotics(sol: RhSolution, ray: Ray, gamma: Sequence[int], hbars: Sequence[complex],
                       tol: float = 1e-8, large: Sequence[float] = (1e1, 1e2, 1e3, 1e4)) -> dict:
    """Distance |log(e^{Z/hbar} X) - log xi| along a sequence hbar -> 0, plus a growth fit."""
    s = sol.structure
    zg, lxi = s.Z(gamma), sol.log_xi(gamma)
    pt = lambda h: sol.point(ray, h).log_character(gamma)
    dists = [abs(_wrap(pt(h) + zg / h - lxi)) for h in hbars]
    monotone = all(b <= a * (1 + 1e-9) + 1e-14 for a, b in zip(dists, dists[1:]))
    growth = []
    for r in large:
        h = r * ray.phase
        try:
            growth.append((math.log(r), abs(_wrap(pt(h) + zg / h - lxi))))
        except Exception:
            continue
    slope = None
    if len(growth) >= 2:
        xs, ys = np.array(growth).T
        ys = np.log(np.maximum(ys, 1e-300))
        slope = float(np.polyfit(xs, ys, 1)[0])
    final = dists[-1] if dists else float("nan")
    return {"distances": dists, "final": final, "monotone": monotone, "growth_slope": slope,
            "pass": bool(final < tol and monotone)}


@dataclass(frozen=True)
class HessianSample:
    z: np.ndarray
    theta: np.ndarray
    value: np.ndarray  # full doubled Hessian; the base block is value[:n, :n]
    residual: float
    condition: float

    @property
    def base(self) -> np.ndarray:
        n = self.value.shape[0] // 2
        return self.value[:n, :n]

    @property
    def dual_block_max(self) -> float:
        n = self.value.shape[0] // 2
        return float(np.max(np.abs(self.value[n:, n:]))) if n else 0.0

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.value - self.value.T)))


def _fd(f: Callable[[complex], np.ndarray], h: complex) -> np.ndarray:
    """Fourth-order central difference of f at 0 with branch-unwrapped log differences."""
    f0 = f(0)
    d1 = np.array([_wrap(a - b) for a, b in zip(f(h), f(-h))])
    d2 = np.array([_wrap(a - b) for a, b in zip(f(2 * h), f(-2 * h))])
    del f0
    return (8 * d1 - d2) / (12 * h)


def default_step(sol: RhSolution) -> float:
    scale = max(1.0, float(np.max(np.abs(sol.charges))))
    return (1e-3 if sol.family == "conifold" else 1e-4) * scale


def log_X_jacobians(sol: RhSolution, ray: Ray, hbar: complex, step: float | None = None):
    """(D x, d x / d theta): D_i x_j = (d/dz_i + hbar^{-1} d/dtheta_i) x_j, both 2n x 2n (rows i)."""
    m = 2 * sol.n
    h = default_step(sol) if step is None else step
    z0, t0 = sol.charges, sol.theta
    eye = np.eye(m)

    def along(dz, dt):
        return lambda t: sol.with_params(z0 + t * dz, t0 + t * dt).log_X(ray, hbar)

    D = np.array([_fd(along(eye[i], eye[i] / hbar), h) for i in range(m)])
    T = np.array([_fd(along(0 * eye[i], eye[i]), h) for i in range(m)])
    return D, T


def extract_hessian(sol: RhSolution, ray: Ray, hbar: complex, step: float | None = None,
                    tol: float = 1e-6) -> HessianSample:
    """Solve D_i x_j + sum_{p,q} eta_pq J_ip dx_j/dtheta_q = 0 for J_ip over the doubled lattice."""
    D, T = log_X_jacobians(sol, ray, hbar, step)
    eta = sol.structure.lattice.skew.astype(float)
    # M[j, p] = sum_q eta[p, q] dx_j/dtheta_q,  T[q, j] = dx_j/dtheta_q
    M = T.T @ eta.T
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditioned(f"linear system for the Hessian has condition {cond:.3g}")
    H = -np.linalg.solve(M, D.T).T
    resid = float(np.max(np.abs(H @ M.T + D)))
    if resid > tol * max(1.0, float(np.max(np.abs(D)))):
        raise IllConditioned(f"Hessian solve residual {resid:.3g}")
    return HessianSample(sol.charges.copy(), sol.theta.copy(), H, resid, cond)


def poisson_residual(sol: RhSolution, ray: Ray, hbar: complex, step: float | None = None) -> float:
    """max |sum eta_pq dx_i/dtheta_p dx_j/dtheta_q - eta_ij| (diagnostic only)."""
    _, T = log_X_jacobians(sol, ray, hbar, step)
    eta = sol.structure.lattice.skew.astype(float)
    P = T.T @ eta @ T
    return float(np.max(np.abs(P - eta)))


def conifold_reflection_residual(v, w, vartheta, phi, hbar) -> dict:
    """Residuals of the reflection relations for B and D at hbar (hbar in -i Sigma(0)).

    ``vartheta`` is the twisted coordinate of beta.  Keys ``B`` and ``D`` are
    the logarithmic discrepancies B(hbar) B(-hbar) / prod etc. of the literal
    relations; products are truncated once their terms drop below 1e-16.
    These vanish when vartheta = phi = 0 but not in general.  ``B_corrected``
    and ``D_corrected`` include the extra factor produced by the residue at
    s = 0 of the two contour integrals:

        B: (1 - E') / (1 - E),  D: exp(h(E, v/w) - h(E', z/w')),

    with E = e^{2 pi i v/w}, z = v - hbar vartheta, w' = w - hbar phi,
    E' = e^{2 pi i z/w'} and h(E, u) = Li_2(E)/2 pi i - u Li_1(E).
    """
    sol = solve_conifold(v, w, vartheta - PI_I, phi)
    vt = sol.vartheta
    lb1, ld1 = sol.log_BD(0, vt, hbar)
    lb2, ld2 = sol.log_BD(0, -vt, -hbar)
    x = cmath.exp(vt[0] - v / hbar)
    q = cmath.exp(vt[1] - w / hbar)
    if abs(q) >= 1:
        raise ValueError("reflection products need |q| < 1")
    pb = pd = 0j
    k = 0
    while True:
        t1 = x * q ** k
        pb += cmath.log(1 - t1)
        pd += k * cmath.log(1 - t1)
        k += 1
        t2 = q ** k / x
        pb -= cmath.log(1 - t2)
        pd += k * cmath.log(1 - t2) - 2 * k * cmath.log(1 - q ** k)
        if abs(t1) < 1e-16 and abs(t2) < 1e-16 and abs(q ** k) < 1e-16:
            break
    z, w1 = v - hbar * vt[0], w - hbar * vt[1]
    E, E1 = cmath.exp(TWO_PI_I * v / w), cmath.exp(TWO_PI_I * z / w1)

    def h(e, u):
        return polylog(2, e) / TWO_PI_I - u * polylog(1, e)

    rb, rd = lb1 + lb2 - pb, ld1 + ld2 - pd
    cb = cmath.log(1 - E1) - cmath.log(1 - E)
    cd = h(E, v / w) - h(E1, z / w1)
    return {"B": _wrap(rb), "D": _wrap(rd), "B_corrected": _wrap(rb - cb), "D_corrected": _wrap(rd - cd)}


def conifold_difference_residual(v, w, theta, phi, hbar, n: int = 0, shifts: bool = False) -> dict:
    """Residuals of B_{n+1} = B_n (1 - x q^n)^{-1} and D_{n+1} = D_n (1 - x q^n)^{-n}.

    With ``shifts=False`` every F, G value comes from a rotated contour alone,
    so the difference equations are tested rather than used.
    """
    sol = solve_conifold(v, w, theta, phi, shifts=shifts)
    vt = sol.vartheta
    b0, d0 = sol.log_BD(n, vt, hbar)
    b1, d1 = sol.log_BD(n + 1, vt, hbar)
    f = cmath.log(1 - cmath.exp(vt[0] - v / hbar + n * (vt[1] - w / hbar)))
    return {"B": _wrap(b1 - b0 + f), "D": _wrap(d1 - d0 + n * f)}
