"""Lattices with skew forms, BPS structures, DT invariants and doubling."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    AsymmetricOmega,
    CutoffTooSmall,
    FinitenessUndecidable,
    NoActiveClasses,
    ZeroCentralCharge,
)

RAY_TOL = 1e-9  # radians; two classes share a ray iff their phases agree to this

Class = tuple  # integer class vector in the lattice basis


def as_class(gamma: Iterable[int]) -> Class:
    return tuple(int(g) for g in gamma)


def _neg(gamma: Class) -> Class:
    return tuple(-g for g in gamma)


@dataclass(frozen=True)
class Lattice:
    rank: int
    skew: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.skew, dtype=np.int64).reshape(self.rank, self.rank)
        if not np.array_equal(m, -m.T):
            raise ValueError("skew form must be antisymmetric with zero diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "skew", m)

    @classmethod
    def zero(cls, rank: int) -> "Lattice":
        return cls(rank, np.zeros((rank, rank), dtype=np.int64))

    def pair(self, a: Sequence[int], b: Sequence[int]) -> int:
        return int(np.asarray(a, dtype=np.int64) @ self.skew @ np.asarray(b, dtype=np.int64))


@dataclass(frozen=True)
class Ray:
    """The ray R_{>0} * phase in C*."""

    phase: complex

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError("ray phase must have unit modulus")

    @classmethod
    def through(cls, z: complex) -> "Ray":
        return cls(complex(z) / abs(z))

    @property
    def angle(self) -> float:
        return math.atan2(self.phase.imag, self.phase.real) % (2 * math.pi)

    def rotate(self, alpha: float) -> "Ray":
        return Ray(self.phase * cmath.exp(1j * alpha))

    def contains(self, z: complex, tol: float = RAY_TOL) -> bool:
        return z != 0 and abs(cmath.phase(z / self.phase)) <= tol


# ---------------------------------------------------------------------------
# Omega tables.  Each knows its values and how to enumerate active classes
# below a cutoff on |Z|; closed-form flags are attached to named generators.


class Omega:
    finite: bool = True
    kind: str = "explicit"

    def value(self, gamma: Class, central_charge: np.ndarray) -> Fraction:
        raise NotImplementedError

    def active(self, central_charge: np.ndarray, cutoff: float | None) -> list[tuple[Class, Fraction]]:
        raise NotImplementedError

    def closed_flags(self, lattice: Lattice, central_charge: np.ndarray) -> set[str] | None:
        """Flags decided from a closed description, or None to decide by enumeration."""
        return None


@dataclass(frozen=True)
class ExplicitOmega(Omega):
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for g, v in self.entries.items():
            v = Fraction(v)
            if v != 0:
                clean[as_class(g)] = v
        for g, v in clean.items():
            if clean.get(_neg(g), Fraction(0)) != v:
                raise AsymmetricOmega(f"Omega({list(g)}) != Omega(-{list(g)})")
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[int], object]], symmetrize: bool = False) -> "ExplicitOmega":
        d: dict = {}
        for g, v in pairs:
            g = as_class(g)
            d[g] = Fraction(v)
            if symmetrize:
                d[_neg(g)] = Fraction(v)
        return cls(d)

    def value(self, gamma, central_charge):
        return self.entries.get(as_class(gamma), Fraction(0))

    def active(self, central_charge, cutoff):
        out = []
        for g, v in sorted(self.entries.items()):
            if cutoff is None or abs(_charge(central_charge, g)) <= cutoff:
                out.append((g, v))
        return out


@dataclass(frozen=True)
class A1Omega(Omega):
    """Rank one: Omega(+-gamma) = 1."""

    kind = "a1"

    def value(self, gamma, central_charge):
        return Fraction(1) if abs(gamma[0]) == 1 else Fraction(0)

    def active(self, central_charge, cutoff):
        z = complex(central_charge[0])
        if cutoff is not None and abs(z) > cutoff:
            return []
        return [((-1,), Fraction(1)), ((1,), Fraction(1))]

    def closed_flags(self, lattice, central_charge):
        return {"finite", "uncoupled", "generic", "integral", "convergent"}


@dataclass(frozen=True)
class ConifoldOmega(Omega):
    """Basis (beta, delta): Omega(+-beta + n delta) = 1, Omega(k delta) = -2 for k != 0."""

    kind = "conifold"
    finite = False

    def value(self, gamma, central_charge):
        a, b = gamma
        if abs(a) == 1:
            return Fraction(1)
        if a == 0 and b != 0:
            return Fraction(-2)
        return Fraction(0)

    def active(self, central_charge, cutoff):
        if cutoff is None:
            raise FinitenessUndecidable("conifold support is infinite; a cutoff is required")
        v, w = complex(central_charge[0]), complex(central_charge[1])
        nmax = int(math.ceil((cutoff + abs(v)) / abs(w))) + 1
        out = []
        for k in range(-nmax, nmax + 1):
            if k != 0 and abs(k * w) <= cutoff:
                out.append(((0, k), Fraction(-2)))
            for s in (1, -1):
                if abs(s * v + k * w) <= cutoff:
                    out.append(((s, k), Fraction(1)))
        return sorted(out)

    def closed_flags(self, lattice, central_charge):
        # The skew form vanishes, so uncoupled and generic are automatic;
        # sum |Omega| e^{-R|Z|} is a geometric series, hence convergent.
        flags = {"uncoupled", "integral", "convergent"}
        if not np.any(lattice.skew):
            flags.add("generic")
        return flags


@dataclass(frozen=True)
class A2Omega(Omega):
    """Rank two with <g1,g2> = 1; chamber chosen by sign of Im(z2/z1) unless fixed."""

    kind = "a2"
    chamber: str | None = None

    def _classes(self, central_charge):
        ch = self.chamber or a2_chamber(complex(central_charge[0]), complex(central_charge[1]))
        base = [(1, 0), (0, 1)] + ([(1, 1)] if ch == "b" else [])
        return base + [_neg(g) for g in base]

    def value(self, gamma, central_charge):
        return Fraction(1) if as_class(gamma) in self._classes(central_charge) else Fraction(0)

    def active(self, central_charge, cutoff):
        out = []
        for g in sorted(self._classes(central_charge)):
            if cutoff is None or abs(_charge(central_charge, g)) <= cutoff:
                out.append((g, Fraction(1)))
        return out


def a2_chamber(z1: complex, z2: complex, tol: float = 1e-12) -> str:
    s = (z2 / z1).imag
    if abs(s) <= tol * abs(z2 / z1):
        from .errors import OnWall

        raise OnWall("Im(z2/z1) = 0")
    return "a" if s < 0 else "b"


def _charge(central_charge: np.ndarray, gamma: Class) -> complex:
    return complex(np.dot(np.asarray(gamma, dtype=float), central_charge))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BpsStructure:
    lattice: Lattice
    central_charge: np.ndarray
    omega: Omega

    def __post_init__(self):
        z = np.asarray(self.central_charge, dtype=complex).reshape(self.lattice.rank)
        z.setflags(write=False)
        object.__setattr__(self, "central_charge", z)
        if isinstance(self.omega, ExplicitOmega):
            for g in self.omega.entries:
                if len(g) != self.lattice.rank:
                    raise ValueError(f"class {list(g)} has wrong rank")
                if self.Z(g) == 0:
                    raise ZeroCentralCharge(f"Z({list(g)}) = 0 for an active class")

    @property
    def rank(self) -> int:
        return self.lattice.rank

    def Z(self, gamma: Sequence[int]) -> complex:
        return _charge(self.central_charge, as_class(gamma))

    def Omega(self, gamma: Sequence[int]) -> Fraction:
        return self.omega.value(as_class(gamma), self.central_charge)

    def active(self, cutoff: float | None = None) -> list[tuple[Class, Fraction]]:
        return self.omega.active(self.central_charge, cutoff)

    def pair(self, a, b) -> int:
        return self.lattice.pair(a, b)


# Named constructors ---------------------------------------------------------


def a1_structure(z: complex) -> BpsStructure:
    return BpsStructure(Lattice.zero(1), np.array([z]), A1Omega())


def conifold_structure(v: complex, w: complex) -> BpsStructure:
    return BpsStructure(Lattice.zero(2), np.array([v, w]), ConifoldOmega())


def a2_structure(z1: complex, z2: complex, chamber: str | None = None) -> BpsStructure:
    return BpsStructure(Lattice(2, np.array([[0, 1], [-1, 0]])), np.array([z1, z2]), A2Omega(chamber))


def explicit_structure(skew, central_charge, pairs, symmetrize: bool = False) -> BpsStructure:
    skew = np.asarray(skew, dtype=np.int64)
    return BpsStructure(Lattice(skew.shape[0], skew), np.asarray(central_charge, dtype=complex),
                        ExplicitOmega.from_pairs(pairs, symmetrize=symmetrize))


# Operations -------------------------------------------------------------------


def dt_invariant(s: BpsStructure, gamma: Sequence[int]) -> Fraction:
    """DT(gamma) = sum over m | gamma of Omega(gamma/m)/m^2, in exact arithmetic."""
    gamma = as_class(gamma)
    if not any(gamma):
        raise ValueError("gamma must be nonzero")
    d = math.gcd(*gamma)
    total = Fraction(0)
    for m in range(1, d + 1):
        if d % m == 0:
            total += s.Omega(tuple(g // m for g in gamma)) / (m * m)
    return total


def _same_ray(z1: complex, z2: complex, tol: float = RAY_TOL) -> bool:
    return abs(cmath.phase(z1 / z2)) <= tol


def classify(s: BpsStructure, cutoff: float | None = None) -> set[str]:
    flags = s.omega.closed_flags(s.lattice, s.central_charge)
    if flags is not None:
        return set(flags)
    if not s.omega.finite:
        raise FinitenessUndecidable(f"no closed rule for generator {s.omega.kind!r}")
    act = s.active(None)
    flags = {"finite", "convergent"}
    if all(v.denominator == 1 for _, v in act):
        flags.add("integral")
    uncoupled, generic = True, True
    for i, (g1, _) in enumerate(act):
        for g2, _ in act[i + 1:]:
            if s.pair(g1, g2) != 0:
                uncoupled = False
                if _same_ray(s.Z(g1), s.Z(g2)):
                    generic = False
    if uncoupled:
        flags.add("uncoupled")
    if generic:
        flags.add("generic")
    return flags


def euclidean(gamma: Sequence[int]) -> float:
    return float(np.linalg.norm(np.asarray(gamma, dtype=float)))


def support_constant(s: BpsStructure, norm: Callable = euclidean, cutoff: float | None = None) -> float:
    """Optimal constant C in |Z(gamma)| >= C ||gamma|| over the (truncated) active set."""
    act = s.active(cutoff)
    if not act:
        raise NoActiveClasses("no active classes")
    return min(abs(s.Z(g)) / norm(g) for g, _ in act)


def active_rays(s: BpsStructure, cutoff: float) -> list[tuple[Ray, list[tuple[Class, Fraction]]]]:
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    act = s.active(cutoff)
    if not act:
        raise CutoffTooSmall(f"no active class with |Z| <= {cutoff}")
    items = sorted(((math.atan2(s.Z(g).imag, s.Z(g).real) % (2 * math.pi), g, v) for g, v in act))
    groups: list[list] = []
    for ang, g, v in items:
        if groups and ang - groups[-1][0] <= RAY_TOL:
            groups[-1][1].append((g, v))
        else:
            groups.append([ang, [(g, v)]])
    # wrap-around: a ray just below 2pi and one at 0 are the same ray
    if len(groups) > 1 and groups[0][0] + 2 * math.pi - groups[-1][0] <= RAY_TOL:
        groups[0][1] = groups.pop()[1] + groups[0][1]
    out = []
    for ang, members in groups:
        g0 = members[0][0]
        out.append((Ray.through(s.Z(g0)), sorted(members, key=lambda m: (abs(s.Z(m[0])), m[0]))))
    return out


# Doubling ---------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddedOmega(Omega):
    """Omega on the doubled lattice: base values on (gamma, 0), zero elsewhere."""

    base: Omega
    n: int

    @property
    def finite(self):  # type: ignore[override]
        return self.base.finite

    @property
    def kind(self):  # type: ignore[override]
        return self.base.kind

    def value(self, gamma, central_charge):
        g = as_class(gamma)
        if any(g[self.n:]):
            return Fraction(0)
        return self.base.value(g[: self.n], central_charge[: self.n])

    def active(self, central_charge, cutoff):
        pad = (0,) * self.n
        return [(g + pad, v) for g, v in self.base.active(central_charge[: self.n], cutoff)]

    def closed_flags(self, lattice, central_charge):
        n = self.n
        sub = Lattice(n, lattice.skew[:n, :n])
        return self.base.closed_flags(sub, central_charge[:n])


def doubled_skew(skew: np.ndarray) -> np.ndarray:
    """Skew form on the doubled lattice in the basis (gamma_i, gamma_i^dual).

    <(g1,l1),(g2,l2)> = <g1,g2> + l1(g2) - l2(g1), so <gamma_i^dual, gamma_j> = delta_ij.
    """
    n = skew.shape[0]
    eye = np.eye(n, dtype=np.int64)
    return np.block([[skew, -eye], [eye, np.zeros((n, n), dtype=np.int64)]])


@dataclass(frozen=True)
class DoubledStructure:
    base: BpsStructure
    dual_charge: np.ndarray

    def __post_init__(self):
        zd = np.asarray(self.dual_charge, dtype=complex).reshape(self.base.rank)
        zd.setflags(write=False)
        object.__setattr__(self, "dual_charge", zd)

    @property
    def n(self) -> int:
        return self.base.rank

    @property
    def structure(self) -> BpsStructure:
        n = self.n
        return BpsStructure(
            Lattice(2 * n, doubled_skew(self.base.lattice.skew)),
            np.concatenate([self.base.central_charge, self.dual_charge]),
            EmbeddedOmega(self.base.omega, n),
        )


def double(s: BpsStructure, dual_charge: Sequence[complex] | None = None) -> DoubledStructure:
    if dual_charge is None:
        dual_charge = np.zeros(s.rank, dtype=complex)
    return DoubledStructure(s, np.asarray(dual_charge, dtype=complex))
