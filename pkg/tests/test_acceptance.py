"""Acceptance criteria 1-14, one test and one PASS/FAIL line each.

Run directly (``python tests/test_acceptance.py``) for the plain report, or
through pytest, where the lines appear in the terminal summary.
"""

import sys

import pytest

from nwss.verify import CHECKS, FAST, FULL, Context, run_check, run_verify

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # executed as a script
    ACCEPTANCE_LINES = []

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def report():
    rep = run_verify(FULL)
    ACCEPTANCE_LINES.extend(r.line() for r in rep.results)
    return {r.number: r for r in rep.results}


@pytest.mark.parametrize("number", [c[0] for c in CHECKS], ids=[f"c{c[0]:02d}" for c in CHECKS])
def test_criterion(report, number):
    res = report[number]
    print(res.line())
    assert res.passed, res.line()


def test_fast_level_all_pass(report):
    fast = [report[c[0]] for c in CHECKS if c[2] == FAST]
    failed = [r.line() for r in fast if not r.passed]
    assert not failed, "\n".join(failed)


@pytest.mark.parametrize("workers", [2, 8])
@pytest.mark.parametrize("number", [4, 10])
def test_monte_carlo_criteria_rerun_identically(report, number, workers):
    again = run_check(number, Context(workers=workers))
    assert again.measured == report[number].measured


if __name__ == "__main__":
    rep = run_verify(FULL)
    print(rep.format())
    sys.exit(0 if rep.passed else 1)
