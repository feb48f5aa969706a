"""Torus points, quadratic refinements and BPS automorphisms.

Composition convention: a product written ``A o B`` is the automorphism whose
pullback on characters is ``A* o B*``.  Acting on points this means ``A``
is applied first.  With <g1,g2> = 1 this is the convention in which
``C_{g1} o C_{g2} = C_{g2} o C_{g1+g2} o C_{g1}`` holds.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .bps import BpsStructure, Lattice, Ray, active_rays, as_class
from .errors import BoundaryActive, NonIntegerBranchWarning, PoleHit

POLE_TOL = 1e-14  # |1 -+ x_gamma| below this (relative) counts as a pole


def twist_sign(lattice: Lattice, gamma: Sequence[int]) -> int:
    """(-1)^{sum_{i<j} n_i n_j <g_i,g_j>}."""
    n = np.asarray(gamma, dtype=np.int64)
    upper = np.triu(lattice.skew, 1)
    return -1 if int(n @ upper @ n) % 2 else 1


@dataclass(frozen=True)
class QuadraticRefinement:
    lattice: Lattice
    signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if len(signs) != self.lattice.rank or any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be +-1, one per basis class")
        object.__setattr__(self, "signs", signs)

    def __call__(self, gamma: Sequence[int]) -> int:
        return refinement_eval(self, gamma)


def refinement_eval(q: QuadraticRefinement, gamma: Sequence[int]) -> int:
    val = twist_sign(q.lattice, gamma)
    for s, n in zip(q.signs, gamma):
        if s == -1 and n % 2:
            val = -val
    return val


@dataclass(frozen=True)
class TorusPoint:
    """Point with y_{g_i} = exp(log_coords[i]); for twisted points these are x_{g_i}."""

    lattice: Lattice
    log_coords: np.ndarray
    twisted: bool = False

    def __post_init__(self):
        c = np.array(self.log_coords, dtype=complex).reshape(self.lattice.rank)
        c.setflags(write=False)
        object.__setattr__(self, "log_coords", c)

    def log_character(self, gamma: Sequence[int]) -> complex:
        val = complex(np.dot(np.asarray(gamma, dtype=float), self.log_coords))
        if self.twisted and twist_sign(self.lattice, gamma) < 0:
            val += 1j * math.pi
        return val

    def character(self, gamma: Sequence[int]) -> complex:
        return cmath.exp(self.log_character(gamma))

    @property
    def coords(self) -> np.ndarray:
        return np.exp(self.log_coords)


def point_from_values(lattice: Lattice, values: Sequence[complex], twisted: bool = False) -> TorusPoint:
    return TorusPoint(lattice, np.log(np.asarray(values, dtype=complex)), twisted)


def to_twisted(p: TorusPoint, sigma: QuadraticRefinement) -> TorusPoint:
    """x_g = sigma(g) y_g."""
    if p.twisted:
        raise ValueError("point is already twisted")
    shift = np.array([0 if s == 1 else 1j * math.pi for s in sigma.signs])
    return TorusPoint(p.lattice, p.log_coords + shift, True)


def to_untwisted(p: TorusPoint, sigma: QuadraticRefinement) -> TorusPoint:
    if not p.twisted:
        raise ValueError("point is not twisted")
    shift = np.array([0 if s == 1 else 1j * math.pi for s in sigma.signs])
    return TorusPoint(p.lattice, p.log_coords - shift, False)


@dataclass(frozen=True)
class BirationalAutomorphism:
    """x_b -> x_b prod (1 - x_g)^{Omega(g)<g,b>} (twisted) or y_b -> y_b prod (1 + y_g)^{...}."""

    lattice: Lattice
    factors: tuple
    twisted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple((as_class(g), Fraction(w)) for g, w in self.factors))

    def inverse(self) -> "BirationalAutomorphism":
        return BirationalAutomorphism(self.lattice, tuple((g, -w) for g, w in self.factors), self.twisted)

    def apply(self, p: TorusPoint) -> TorusPoint:
        return apply_bps_automorphism(self, p)


def cluster_transformation(lattice: Lattice, gamma: Sequence[int], weight=1) -> BirationalAutomorphism:
    """C_gamma: y_b -> y_b (1 + y_gamma)^{<gamma,b>}."""
    return BirationalAutomorphism(lattice, ((as_class(gamma), Fraction(weight)),), twisted=False)


def apply_bps_automorphism(auto: BirationalAutomorphism, p: TorusPoint) -> TorusPoint:
    if auto.twisted != p.twisted:
        raise ValueError("automorphism and point must both be twisted or both untwisted")
    lat = auto.lattice
    sgn = -1.0 if auto.twisted else 1.0
    new = np.array(p.log_coords, dtype=complex)
    for gamma, w in auto.factors:
        ch = p.character(gamma)
        f = 1.0 + sgn * ch
        expo = [w * lat.pair(gamma, e) for e in np.eye(lat.rank, dtype=np.int64)]
        if all(e == 0 for e in expo):
            continue
        if abs(f) <= POLE_TOL * max(1.0, abs(ch)):
            raise PoleHit(f"factor vanishes for class {list(gamma)}")
        logf = cmath.log(f)
        for i, e in enumerate(expo):
            if e == 0:
                continue
            if e.denominator != 1:
                warnings.warn(f"non-integer exponent {e}; principal branch used", NonIntegerBranchWarning)
            new[i] += float(e) * logf
    return TorusPoint(p.lattice, new, p.twisted)


@dataclass(frozen=True)
class Composite:
    """Ordered product; on points the first factor acts first (see module docstring)."""

    factors: tuple

    def apply(self, p: TorusPoint) -> TorusPoint:
        for f in self.factors:
            p = f.apply(p)
        return p


def compose(*autos) -> Composite:
    flat: list = []
    for a in autos:
        flat.extend(a.factors if isinstance(a, Composite) else (a,))
    return Composite(tuple(flat))


def ray_automorphism(s: BpsStructure, classes: Iterable, twisted: bool) -> BirationalAutomorphism:
    return BirationalAutomorphism(s.lattice, tuple(classes), twisted)


def sector_product(
    s: BpsStructure,
    sector: tuple[Ray, Ray],
    p: TorusPoint,
    orientation: str = "clockwise",
    cutoff: float = 1e6,
    tol: float = 1e-9,
) -> TorusPoint:
    """Product of BPS automorphisms over the active rays in a sector.

    The sector sweeps anticlockwise from ``sector[0]`` to ``sector[1]``.
    With ``orientation="clockwise"`` the point is acted on by the rays in
    clockwise order (the wall-crossing invariant ordering); ``"anticlockwise"``
    reverses it.
    """
    if orientation not in ("clockwise", "anticlockwise"):
        raise ValueError("orientation must be 'clockwise' or 'anticlockwise'")
    start, end = sector
    sweep = (end.angle - start.angle) % (2 * math.pi)
    if sweep == 0:
        return p
    try:
        rays = active_rays(s, cutoff)
    except Exception as exc:  # no classes below cutoff: empty product
        if getattr(exc, "code", "") == "CUTOFF_TOO_SMALL":
            return p
        raise
    inside = []
    for ray, members in rays:
        off = (ray.angle - start.angle) % (2 * math.pi)
        if min(off, 2 * math.pi - off) <= tol or abs(off - sweep) <= tol:
            raise BoundaryActive(f"active ray at angle {ray.angle:.6f} on the sector boundary")
        if off < sweep:
            inside.append((off, members))
    inside.sort(key=lambda t: t[0], reverse=(orientation == "clockwise"))
    for _, members in inside:
        p = ray_automorphism(s, members, p.twisted).apply(p)
    return p


def pentagon_check(points: Sequence[TorusPoint], tol: float = 1e-12) -> dict:
    """Compare C_{g1} o C_{g2} with C_{g2} o C_{g1+g2} o C_{g1} on rank-2 points."""
    errs = []
    for p in points:
        lat = p.lattice
        c1 = cluster_transformation(lat, (1, 0))
        c2 = cluster_transformation(lat, (0, 1))
        c12 = cluster_transformation(lat, (1, 1))
        lhs = compose(c1, c2).apply(p)
        rhs = compose(c2, c12, c1).apply(p)
        for i in range(2):
            a, b = lhs.coords[i], rhs.coords[i]
            errs.append(abs(a - b) / max(abs(b), 1e-300))
    max_err = max(errs) if errs else 0.0
    return {"max_error": max_err, "samples": len(points), "pass": bool(max_err < tol)}
