"""Every acceptance criterion at its stated tolerance, one pass/fail line each.

``CURVEFT_ACCEPTANCE=fast`` runs the reduced-sample suite; the default is full.
"""

import os

import pytest

from curveft.acceptance import CRITERIA, SUITES

SUITE = os.environ.get("CURVEFT_ACCEPTANCE", "full")
assert SUITE in SUITES, f"CURVEFT_ACCEPTANCE must be one of {SUITES}"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = CRITERIA[number](SUITE == "full")
    with capsys.disabled():
        print(f"\n{res.line()}")
    assert res.passed, res.line()
