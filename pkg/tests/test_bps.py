import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtjoyce.bps import (
    ExplicitOmega,
    Lattice,
    a1_structure,
    a2_structure,
    active_rays,
    classify,
    conifold_structure,
    double,
    doubled_skew,
    dt_invariant,
    explicit_structure,
    support_constant,
)
from dtjoyce.errors import AsymmetricOmega, FinitenessUndecidable, NoActiveClasses


def test_dt_invariant_a1_double_class():
    assert dt_invariant(a1_structure(1 + 1j), (2,)) == Fraction(1, 4)


def test_dt_invariant_a1_primitive():
    assert dt_invariant(a1_structure(1 + 1j), (1,)) == 1


def test_dt_invariant_conifold_double_delta():
    assert dt_invariant(conifold_structure(0.3 + 0.5j, 1), (0, 2)) == Fraction(-5, 2)


@given(st.integers(1, 20))
def test_dt_invariant_a1_multiples(n):
    assert dt_invariant(a1_structure(0.7 - 0.2j), (n,)) == Fraction(1, n * n)


def test_dt_invariant_rejects_zero_class():
    with pytest.raises(ValueError):
        dt_invariant(a1_structure(1), (0,))


def test_classify_a1():
    assert {"finite", "uncoupled", "generic", "integral"} <= classify(a1_structure(2j))


def test_classify_conifold_is_uncoupled_not_finite():
    flags = classify(conifold_structure(0.3 + 0.5j, 1))
    assert {"uncoupled", "integral"} <= flags
    assert "finite" not in flags


def test_classify_a2_chamber_a():
    s = a2_structure(1j, 1 + 1j)  # Im(z2/z1) = -1
    flags = classify(s)
    assert {"finite", "integral"} <= flags
    assert "uncoupled" not in flags
    assert len(s.active()) == 4


def test_conifold_enumeration_needs_cutoff():
    with pytest.raises(FinitenessUndecidable):
        conifold_structure(0.3 + 0.5j, 1).active(None)


def test_support_constant_a1():
    z = 0.6 - 1.7j
    assert support_constant(a1_structure(z)) == pytest.approx(abs(z), rel=1e-15)


def test_support_constant_rank2_uncoupled():
    s = explicit_structure(np.zeros((2, 2)), [1, 2j], [((1, 0), 1), ((0, 1), 1)], symmetrize=True)
    assert support_constant(s) == pytest.approx(1.0)


def test_support_constant_empty():
    s = explicit_structure(np.zeros((2, 2)), [1, 2j], [])
    with pytest.raises(NoActiveClasses):
        support_constant(s)


def test_support_constant_permutation_invariance():
    pairs = [((1, 0, 0), 1), ((0, 1, 1), 2), ((1, -1, 0), 1)]
    Z = np.array([0.5 + 1j, -1 + 0.2j, 0.3 - 0.4j])
    s = explicit_structure(np.zeros((3, 3)), Z, pairs, symmetrize=True)
    P = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    moved = [(tuple(int(x) for x in P @ np.array(g)), o) for g, o in pairs]
    s2 = explicit_structure(np.zeros((3, 3)), P @ Z, moved, symmetrize=True)
    assert support_constant(s2) == pytest.approx(support_constant(s), rel=1e-14)


def test_active_rays_a1():
    rays = active_rays(a1_structure(1j), 10)
    phases = sorted((r.phase.imag, [g for g, _ in m]) for r, m in rays)
    assert phases == [(-1.0, [(-1,)]), (1.0, [(1,)])]


def test_active_rays_conifold_layout():
    v, w = 0.3 + 0.5j, 1.0
    s = conifold_structure(v, w)
    rays = active_rays(s, 5)
    phases = [r.phase for r, _ in rays]

    def has(z):
        return any(abs(p - z / abs(z)) < 1e-12 for p in phases)

    assert has(w) and has(-w)
    for n in range(-10, 11):
        if abs(v + n * w) <= 5:
            assert has(v + n * w) and has(-(v + n * w))
    on_w = [m for r, m in rays if abs(r.phase - 1) < 1e-12][0]
    assert [g for g, _ in on_w] == [(0, k) for k in range(1, 6)]


def test_active_rays_a2_chamber_b():
    rays = active_rays(a2_structure(1j, -1 + 1j), 10)
    classes = sorted(g for _, m in rays for g, _ in m)
    assert len(rays) == 6
    assert classes == sorted([(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)])


@given(st.floats(2.0, 6.0), st.floats(0.1, 4.0))
def test_active_rays_stable_under_cutoff_increase(c, extra):
    s = conifold_structure(0.3 + 0.5j, 1.0)
    small = {round(r.angle, 12): m for r, m in active_rays(s, c)}
    big = {round(r.angle, 12): m for r, m in active_rays(s, c + extra)}
    for ang, members in small.items():
        assert ang in big
        assert [x for x in big[ang] if abs(s.Z(x[0])) <= c] == members


def test_asymmetric_omega_rejected():
    with pytest.raises(AsymmetricOmega):
        ExplicitOmega({(1, 0): 1})


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(any), min_size=1, max_size=5),
       st.integers(-3, 3))
def test_symmetrized_omega_is_even(classes, val):
    om = ExplicitOmega.from_pairs([(g, val) for g in classes], symmetrize=True)
    for g, v in om.entries.items():
        assert om.entries[tuple(-x for x in g)] == v


def test_double_a1_pairing_and_omega():
    d = double(a1_structure(1 + 1j), [0.5]).structure
    assert d.pair((0, 1), (1, 0)) == 1
    assert d.Omega((1, 1)) == 0
    assert d.Omega((1, 0)) == 1
    assert d.pair((1, 0), (1, 0)) == 0


@given(st.integers(1, 4), st.integers(0, 2 ** 16))
def test_double_twice_is_unimodular(n, seed):
    rng = np.random.default_rng(seed)
    S = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    S[iu] = rng.integers(-3, 4, len(iu[0]))
    S = S - S.T
    D2 = doubled_skew(doubled_skew(S))
    assert np.array_equal(D2, -D2.T)
    Lattice(4 * n, D2)
    assert abs(round(np.linalg.det(D2))) == 1
