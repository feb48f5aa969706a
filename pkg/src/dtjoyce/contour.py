"""The conifold functions F(z|w1,w2), G(z|w1,w2) and their starred versions.

F and G are exponentials of contour integrals along the real line with a
small detour above the origin.  The integral is evaluated with composite
Gauss-Legendre quadrature: geometrically graded panels next to the detour,
then uniform panels whose width is bounded by the distance from the
integrand's poles 2 pi i k / w_j to the real axis.

The integrals are homogeneous of degree zero in (z, w1, w2), so rotating
all arguments by a common phase only rotates the contour.  With
``rotate=True`` the phase is chosen to maximise the convergence margins,
which evaluates the meromorphic continuation of F and G wherever w1, w2 lie
in a common open half-plane and z can be brought into the rotated strip.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BranchPointError, PoleHit, PoleNearContour, StripViolation
from .special import polylog

TWO_PI_I = 2j * math.pi
_TAIL = 38.0  # e^{-38} ~ 3e-17
_GL_PANEL = 24
_GL_ARC = 48


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


_ANGLES = np.linspace(-math.pi, math.pi, 721)
_SHIFTS = [(m, n) for m in range(-4, 5) for n in range(-4, 5)]


def _margin(kind: str, z, w1, w2, rot):
    """Smallest normalised convergence margin after rotating by ``rot`` (array-friendly)."""
    scale = max(abs(w1), abs(w2))
    lower = z if kind == "F" else z + w1
    return np.minimum.reduce([
        (rot * w1).real / abs(w1),
        (rot * w2).real / abs(w2),
        (rot * lower).real / scale,
        (rot * (w1 + w2 - z)).real / scale,
    ])


def _choose_frame(kind: str, z, w1, w2, rotate: bool, shifts: bool = True):
    """Pick a rotation of the contour and integer shifts (m, n) of z.

    The integral is evaluated at z - m w1 - n w2 and transported back with
    the functional equations.  Without ``rotate`` only the literal integral
    is allowed.
    """
    if w1 == 0 or w2 == 0:
        raise StripViolation("w1, w2 must be nonzero")
    if not rotate:
        if w1.real <= 0 or w2.real <= 0:
            raise StripViolation("Re(w1), Re(w2) must be positive")
        lo = z.real if kind == "F" else (z + w1).real
        if not (lo > 0 and z.real < (w1 + w2).real):
            raise StripViolation(f"z = {z} outside the convergence strip")
        return 1.0 + 0j, 0, 0
    rots = np.exp(1j * _ANGLES)
    found = []
    for m, n in (_SHIFTS if shifts else [(0, 0)]):
        if kind == "G" and n != 0:
            continue
        marg = _margin(kind, z - m * w1 - n * w2, w1, w2, rots)
        i = int(np.argmax(marg))
        found.append((marg[i], _ANGLES[i], m, n))
    top = max(f[0] for f in found)
    # fewest shifts among the frames within a factor 2 of the best margin
    good = [f for f in found if f[0] >= 0.5 * top]
    best = min(good, key=lambda f: (abs(f[2]) + abs(f[3]), -f[0]))
    _, a0, m, n = best
    zs = z - m * w1 - n * w2
    f = lambda a: float(_margin(kind, zs, w1, w2, cmath.exp(1j * a)))
    lo, hi = a0 - 2 * math.pi / 720, a0 + 2 * math.pi / 720
    g = (math.sqrt(5) - 1) / 2
    for _ in range(40):
        c, d = hi - g * (hi - lo), lo + g * (hi - lo)
        if f(c) > f(d):
            hi = d
        else:
            lo = c
    a = 0.5 * (lo + hi) if f(0.5 * (lo + hi)) >= f(a0) else a0
    if f(a) <= 1e-9:
        raise StripViolation(f"(z, w1, w2) = ({z}, {w1}, {w2}) admits no convergent contour")
    return cmath.exp(1j * a), m, n


def _integrand(kind: str, s: np.ndarray, z, w1, w2) -> np.ndarray:
    out = np.empty_like(s)
    right = s.real >= 0
    sr, sl = s[right], s[~right]
    # Re s >= 0: write everything with decaying exponentials
    e1 = -np.expm1(-w1 * sr)
    e2 = -np.expm1(-w2 * sr)
    if kind == "F":
        out[right] = np.exp((z - w1 - w2) * sr) / (e1 * e2 * sr)
    else:
        out[right] = -np.exp((z - w1 - w2) * sr) / (e1 * e1 * e2 * sr)
    d1 = np.expm1(w1 * sl)
    d2 = np.expm1(w2 * sl)
    if kind == "F":
        out[~right] = np.exp(z * sl) / (d1 * d2 * sl)
    else:
        out[~right] = -np.exp((z + w1) * sl) / (d1 * d1 * d2 * sl)
    return out


@dataclass(frozen=True)
class Contour:
    nodes: np.ndarray
    weights: np.ndarray


def _panels(a: float, b: float, r: float, h: float) -> list[tuple[float, float]]:
    """Panels on [a, b] (0 < r <= a), geometric near the detour, then width <= h."""
    out, x, width = [], a, min(r, h)
    while x < b:
        y = min(b, x + width)
        out.append((x, y))
        x = y
        width = min(2 * width, h)
    return out


def build_contour(kind: str, z, w1, w2, order: int = _GL_PANEL, tail: float = _TAIL,
                  hscale: float = 1.0) -> Contour:
    """Nodes/weights for the (already rotated and scaled) integral."""
    poles = [2 * math.pi * w.real / abs(w) ** 2 for w in (w1, w2)]
    d_min = min(poles)
    nearest = min(2 * math.pi / abs(w) for w in (w1, w2))
    r = min(0.25, 0.5 * nearest)
    if d_min <= r * 1e-6:
        raise PoleNearContour("integrand pole too close to the real axis")
    h = hscale * min(1.0, d_min)
    a_left = (z if kind == "F" else z + w1).real
    a_right = (w1 + w2 - z).real
    pref = max(1.0, 1.0 / min(abs(w1), abs(w2)))
    t_left = (tail + math.log(pref)) / a_left + r
    t_right = (tail + math.log(pref)) / a_right + r
    x, w = _gauss(order)
    nodes, weights = [], []
    for lo, hi in _panels(r, t_right, r, h):
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    for lo, hi in _panels(r, t_left, r, h):
        nodes.append(-(0.5 * (hi - lo) * x + 0.5 * (hi + lo)))
        weights.append(0.5 * (hi - lo) * w)
    # semicircle from -r to r through i r: s = r e^{i phi}, phi: pi -> 0
    xa, wa = _gauss(_GL_ARC)
    phi = 0.5 * math.pi * (xa + 1)
    s_arc = r * np.exp(1j * phi)
    nodes.append(s_arc)
    weights.append(-0.5 * math.pi * wa * 1j * s_arc)
    return Contour(np.concatenate(nodes).astype(complex), np.concatenate(weights).astype(complex))


def _log_integral(kind, z, w1, w2, rot, order, tail, hscale) -> complex:
    scale = max(abs(w1), abs(w2))
    u = rot / scale
    zr, w1r, w2r = u * z, u * w1, u * w2
    c = build_contour(kind, zr, w1r, w2r, order=order, tail=tail, hscale=hscale)
    return complex(np.dot(c.weights, _integrand(kind, c.nodes, zr, w1r, w2r)))


def _log1m_exp(x: complex) -> complex:
    """log(1 - e^x), raising PoleHit at zeros."""
    val = -np.expm1(x)
    if val == 0:
        raise PoleHit("functional-equation factor vanishes")
    return cmath.log(val)


def log_conifold(kind: str, z: complex, w1: complex, w2: complex, rotate: bool = False,
                 order: int = _GL_PANEL, tail: float = _TAIL, hscale: float = 1.0,
                 shifts: bool = True) -> complex:
    """A logarithm of F (kind="F") or G (kind="G"); exact integral when no shift is used.

    With ``rotate=True`` the value is the meromorphic continuation, obtained
    from a rotated contour and, when z lies outside every rotated strip, the
    difference equations (disabled by ``shifts=False``)
        F(z + w1) = F(z) / (1 - e^{2 pi i z/w2}),  F(z + w2) = F(z) / (1 - e^{2 pi i z/w1}),
        G(z + w1) = G(z) / F(z + w1).
    """
    z, w1, w2 = complex(z), complex(w1), complex(w2)
    rot, m, n = _choose_frame(kind, z, w1, w2, rotate, shifts)
    z0 = z - m * w1 - n * w2
    val = _log_integral(kind, z0, w1, w2, rot, order, tail, hscale)
    if kind == "F":
        for j in range(0, m) if m > 0 else range(-1, m - 1, -1):
            # moving z0 + j w1 -> z0 + (j+1) w1 (m > 0) or back (m < 0)
            t = _log1m_exp(TWO_PI_I * (z0 + j * w1) / w2)
            val += -t if m > 0 else t
        base = z0 + m * w1
        for k in range(0, n) if n > 0 else range(-1, n - 1, -1):
            t = _log1m_exp(TWO_PI_I * (base + k * w2) / w1)
            val += -t if n > 0 else t
        return val
    # G(y) = G(y - w1) / F(y | w1, w2)
    for j in range(1, m + 1):
        val -= log_conifold("F", z0 + j * w1, w1, w2, rotate=True, order=order, tail=tail, hscale=hscale)
    for j in range(0, m, -1):
        val += log_conifold("F", z0 + j * w1, w1, w2, rotate=True, order=order, tail=tail, hscale=hscale)
    return val


def conifold_F(z, w1, w2, rotate: bool = False) -> complex:
    return cmath.exp(log_conifold("F", z, w1, w2, rotate))


def conifold_G(z, w1, w2, rotate: bool = False) -> complex:
    return cmath.exp(log_conifold("G", z, w1, w2, rotate))


# --- exponential factors ---------------------------------------------------------


def _q_parts(v, w, th, ph, h):
    x = cmath.exp(TWO_PI_I * v / w)
    return x, (v * ph - w * th) / (TWO_PI_I * w)


def q_F(v, w, theta, phi, hbar) -> complex:
    """Q_F(v, w, vartheta, phi, hbar), the exponent multiplying the shifted F."""
    v, w, th, ph, h = (complex(a) for a in (v, w, theta, phi, hbar))
    x, lin = _q_parts(v, w, th, ph, h)
    if x == 1:
        raise BranchPointError("Q_F is singular where e^{2 pi i v/w} = 1")
    return (w - h * ph) / (h * TWO_PI_I ** 2) * polylog(2, x) + (lin + 0.5) * polylog(1, x)


def q_G(v, w, theta, phi, hbar) -> complex:
    """Q_G(v, w, vartheta, phi, hbar); at v = 0 the v Li_1 term is taken as its limit 0."""
    v, w, th, ph, h = (complex(a) for a in (v, w, theta, phi, hbar))
    x, lin = _q_parts(v, w, th, ph, h)
    L2, L3 = polylog(2, x), polylog(3, x)
    val = (2 / h * (w - h * ph) / TWO_PI_I ** 3 * L3
           - (v - h * th) / (h * TWO_PI_I ** 2) * L2
           + (lin + 0.25) * L2 / (1j * math.pi))
    if v != 0:
        if x == 1:
            raise BranchPointError("Q_G is singular where e^{2 pi i v/w} = 1, v != 0")
        val -= v / w * (lin + 0.5) * polylog(1, x)
    return val


def q_factors(v, w, theta, phi, hbar) -> tuple[complex, complex]:
    return q_F(v, w, theta, phi, hbar), q_G(v, w, theta, phi, hbar)


def _shifted_args(v, w, th, ph, h):
    return v - h * th, w - h * ph, -TWO_PI_I * h


def log_starred_F(v, w, theta, phi, hbar, shifts: bool = True) -> complex:
    """log F*, continued meromorphically in hbar off the upper half-plane."""
    v, w, th, ph, h = (complex(a) for a in (v, w, theta, phi, hbar))
    if h == 0:
        raise ValueError("hbar must be nonzero")
    z, w1, w2 = _shifted_args(v, w, th, ph, h)
    return log_conifold("F", z, w1, w2, rotate=True, shifts=shifts) + q_F(v, w, th, ph, h)


def log_starred_G(v, w, theta, phi, hbar, shifts: bool = True) -> complex:
    v, w, th, ph, h = (complex(a) for a in (v, w, theta, phi, hbar))
    if h == 0:
        raise ValueError("hbar must be nonzero")
    z, w1, w2 = _shifted_args(v, w, th, ph, h)
    return log_conifold("G", z, w1, w2, rotate=True, shifts=shifts) + q_G(v, w, th, ph, h)


def starred_F(v, w, theta, phi, hbar) -> complex:
    return cmath.exp(log_starred_F(v, w, theta, phi, hbar))


def starred_G(v, w, theta, phi, hbar) -> complex:
    return cmath.exp(log_starred_G(v, w, theta, phi, hbar))
