"""Acceptance suite: one PASS/FAIL line per criterion.

Run directly (``python3 tests/test_acceptance.py``) or through pytest, where
each criterion is its own test and its line is printed unconditionally.
"""

import sys

import pytest

from capindex.acceptance import CRITERIA, Settings, run_criterion

SETTINGS = Settings(grid_n=256, quad_n=128)


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number, SETTINGS)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


if __name__ == "__main__":
    results = [run_criterion(c[0], SETTINGS) for c in CRITERIA]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
