"""Round-trip acceptance gate.

Runs every criterion at its pinned tolerance and prints one pass/fail line
per criterion (run pytest with ``-s`` to see them).  The suite is shared
with the ``roundtrip`` CLI subcommand.
"""

import pytest

from hawkesflow.acceptance import AcceptanceSuite


@pytest.fixture(scope="module")
def results():
    suite = AcceptanceSuite(tolerance_scale=1.0)
    out = {r.number: r for r in suite.run()}
    print()
    for number in sorted(out):
        print(out[number].line())
        for line in out[number].checks:
            print(line)
    return out


def _assert_criterion(result):
    detail = "\n".join([result.line()] + result.checks)
    assert result.passed, f"\n{detail}"


def test_criterion_1_poisson_null(results):
    _assert_criterion(results[1])


def test_criterion_2_exponential_round_trip(results):
    _assert_criterion(results[2])


def test_criterion_3_directed_round_trip(results):
    _assert_criterion(results[3])


def test_criterion_4_factorized_collapse(results):
    _assert_criterion(results[4])


def test_criterion_5_inhibition_propagation(results):
    _assert_criterion(results[5])


def test_criterion_6_solver_exactness(results):
    _assert_criterion(results[6])


def test_criterion_7_randomization_robustness(results):
    _assert_criterion(results[7])


def test_criterion_8_algebraic_identities(results):
    _assert_criterion(results[8])


def test_all_criteria_present(results):
    assert sorted(results) == list(range(1, 9))
