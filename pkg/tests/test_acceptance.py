"""Acceptance criteria 1-10 at full level; prints one PASS/FAIL line each."""

import pytest

from spintau.acceptance import CHECKS


@pytest.mark.parametrize("number", range(1, len(CHECKS) + 1))
def test_criterion(number, capsys):
    result = CHECKS[number - 1](level="full", seed=0)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
