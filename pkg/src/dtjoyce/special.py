"""Complex gamma, the Lambda function, Bernoulli polynomials and polylogarithms."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

from .errors import BranchCutError, BranchPointError, PoleError

# Lanczos coefficients for g = 7, n = 9.
_G = 7.0
_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
ZETA3 = 1.2020569031595942853997381615114499907649862923405


def _lanczos_sum(z: complex) -> complex:
    """A(z) with Gamma(z+1) = sqrt(2 pi) t^{z+1/2} e^{-t} A(z), t = z + g + 1/2."""
    s = _P[0]
    for k in range(1, 9):
        s += _P[k] / (z + k)
    return s


def _check_pole(z: complex) -> None:
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f"gamma has a pole at {z.real:g}")
    n = round(z.real)
    if n <= 0 and abs(z - n) < 1e-14:
        raise PoleError(f"gamma has a pole at {n}")


def _log_sin_pi(u: complex) -> complex:
    """log sin(pi u), stable for large |Im u| (correct modulo 2 pi i)."""
    if u.imag > 0:
        return cmath.log(0.5j) - 1j * math.pi * u + cmath.log(1 - cmath.exp(2j * math.pi * u))
    if u.imag < 0:
        return cmath.log(-0.5j) + 1j * math.pi * u + cmath.log(1 - cmath.exp(-2j * math.pi * u))
    return cmath.log(complex(math.sin(math.pi * u.real)))


def loggamma(z: complex) -> complex:
    """A logarithm of Gamma(z) (principal for Re z >= 1/2, correct modulo 2 pi i otherwise)."""
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return math.log(math.pi) - _log_sin_pi(z) - loggamma(1 - z)
    zz = z - 1
    t = zz + _G + 0.5
    return _LOG_SQRT_2PI + (zz + 0.5) * cmath.log(t) - t + cmath.log(_lanczos_sum(zz))


def gamma(z: complex) -> complex:
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma(1 - z))
    zz = z - 1
    t = zz + _G + 0.5
    return cmath.exp(_LOG_SQRT_2PI + (zz + 0.5) * cmath.log(t) - t) * _lanczos_sum(zz)


# --- Lambda(w, eta) = e^w Gamma(w+eta) / (sqrt(2 pi) w^{w+eta-1/2}) ---------


def _log_ratio(t: complex, w: complex) -> complex:
    """Log(t) - Log(w), computed without cancellation when t/w is close to 1."""
    d = cmath.log(t / w)
    k = round(((cmath.log(t) - cmath.log(w)) - d).imag / (2 * math.pi))
    return d + 2j * math.pi * k


def _check_lambda_args(w: complex, eta: complex) -> None:
    if w == 0:
        raise BranchPointError("w = 0")
    if w.imag == 0 and w.real < 0:
        raise BranchCutError("w lies on the negative real axis")
    _check_pole(w + eta)


def log_lambda(w: complex, eta: complex) -> complex:
    """log Lambda(w, eta), normalised so that it tends to 0 as w -> infinity off R_{<0}.

    Both branches of the computation are arranged so that the large
    cancelling terms w log w never appear explicitly.
    """
    w, eta = complex(w), complex(eta)
    _check_lambda_args(w, eta)
    u = w + eta
    if u.real >= 0.5:
        t = u - 0.5 + _G
        return 0.5 - _G - eta + cmath.log(_lanczos_sum(u - 1)) + (u - 0.5) * _log_ratio(t, w)
    # Euler reflection for Gamma(u) = pi / (sin(pi u) Gamma(1-u)).  The terms
    # -i pi s u from log sin(pi u) and (u - 1/2)(log(-w) - log w) cancel
    # exactly when Im u and Im w have the same sign s; drop them analytically.
    t = 0.5 - u + _G
    c = 0.5 - eta + _G
    su = (u.imag > 0) - (u.imag < 0)
    sw = (w.imag > 0) - (w.imag < 0)
    if su != 0 and su == sw:
        val = (c - cmath.log(1 - cmath.exp(2j * math.pi * su * u)) - cmath.log(_lanczos_sum(-u))
               + (u - 0.5) * _log_ratio(t, -w))
    else:
        # Log(-w) - Log(w), with the same (signed-zero aware) Log(-w) as in _log_ratio
        flip = cmath.log(-w) - cmath.log(w)
        val = (c - math.log(2) - _log_sin_pi(u) - cmath.log(_lanczos_sum(-u))
               + (u - 0.5) * (_log_ratio(t, -w) + flip))
    # bring the imaginary part into (-pi, pi] so that small values stay small
    k = round(val.imag / (2 * math.pi))
    return val - 2j * math.pi * k


def lambda_fn(w: complex, eta: complex) -> complex:
    return cmath.exp(log_lambda(w, eta))


def lambda_reflection_residual(w: complex, eta: complex) -> complex:
    """Lambda(w,eta) Lambda(-w,1-eta) (1 - e^{+-2 pi i (w+eta)}) - 1, sign of Im(w)."""
    w, eta = complex(w), complex(eta)
    if w.imag == 0:
        raise BranchCutError("reflection needs Im(w) != 0")
    sgn = 1 if w.imag > 0 else -1
    lhs = lambda_fn(w, eta) * lambda_fn(-w, 1 - eta)
    return lhs * (1 - cmath.exp(sgn * 2j * math.pi * (w + eta))) - 1


# --- Bernoulli -----------------------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple:
    """B_0..B_n as exact rationals (convention B_1 = -1/2)."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(Fraction(math.comb(m + 1, k)) * B[k] for k in range(m))
        B.append(-s / (m + 1))
    return tuple(B)


@lru_cache(maxsize=None)
def bernoulli_poly_coeffs(n: int) -> tuple:
    """Coefficients c_j of B_n(x) = sum_j c_j x^j."""
    B = bernoulli_numbers(max(n, 16))
    return tuple(Fraction(math.comb(n, j)) * B[n - j] for j in range(n + 1))


def bernoulli_poly(n: int, x: complex) -> complex:
    acc = 0j
    for c in reversed(bernoulli_poly_coeffs(n)):
        acc = acc * x + float(c)
    return acc


def stirling_tail(w: complex, eta: complex, K: int = 8) -> complex:
    """sum_{k=2}^{K} (-1)^k B_k(eta) / (k(k-1)) w^{1-k}."""
    if K < 2:
        raise ValueError("K must be at least 2")
    w, eta = complex(w), complex(eta)
    return sum((-1) ** k * bernoulli_poly(k, eta) / (k * (k - 1)) * w ** (1 - k) for k in range(2, K + 1))


# --- Polylogarithms ---------------------------------------------------------------

_ZETA = {2: math.pi ** 2 / 6, 3: ZETA3}


def _zeta_int(s: int) -> float:
    """Riemann zeta at integers s <= 3, s != 1."""
    if s in _ZETA:
        return _ZETA[s]
    if s == 0:
        return -0.5
    n = -s  # zeta(-n) = -B_{n+1}/(n+1)
    return float(-bernoulli_numbers(n + 1)[n + 1] / (n + 1))


def _li_series(k: int, x: complex) -> complex:
    total, term, n = 0j, x, 1
    while True:
        add = term / n ** k
        total += add
        if abs(add) < 1e-18 * max(abs(total), 1e-300):
            return total
        n += 1
        term *= x


def _li_log_series(k: int, x: complex) -> complex:
    """Expansion in mu = log x, valid for |mu| < 2 pi."""
    mu = cmath.log(x)
    harmonic = sum(1.0 / j for j in range(1, k))
    total = mu ** (k - 1) / math.factorial(k - 1) * (harmonic - cmath.log(-mu))
    fact, pw = 1.0, 1.0 + 0j
    for j in range(0, 80):
        if j > 0:
            fact *= j
            pw *= mu
        if j == k - 1:
            continue
        z = _zeta_int(k - j)
        if z == 0:
            continue
        add = z * pw / fact
        total += add
        if j > k + 2 and abs(add) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def polylog(k: int, x: complex) -> complex:
    """Li_k(x) for k = 0..3, principal branch with cut [1, inf)."""
    x = complex(x)
    if k == 0:
        if x == 1:
            raise PoleError("Li_0 has a pole at x = 1")
        return x / (1 - x)
    if k == 1:
        if x == 1:
            raise BranchPointError("Li_1 is singular at x = 1")
        return -cmath.log(1 - x)
    if k not in (2, 3):
        raise ValueError("only Li_0..Li_3 are implemented")
    if x == 1:
        return complex(_ZETA[k])
    if x == 0:
        return 0j
    if x.imag == 0 and x.real > 1:
        # on the cut: the value continuous from below, matching -log(1-x)
        return polylog(k, complex(x.real, 1e-300)).conjugate()
    r = abs(x)
    if r <= 0.5:
        return _li_series(k, x)
    if r >= 2.0:
        # inversion relations in terms of L = log(-x)
        L = cmath.log(-x)
        if k == 2:
            return -_li_small_or_mid(2, 1 / x) - math.pi ** 2 / 6 - 0.5 * L * L
        return _li_small_or_mid(3, 1 / x) - math.pi ** 2 / 6 * L - L ** 3 / 6
    return _li_log_series(k, x)


def _li_small_or_mid(k: int, x: complex) -> complex:
    return _li_series(k, x) if abs(x) <= 0.5 else _li_log_series(k, x)
