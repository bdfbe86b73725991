"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""

import pytest

from leapfrog.acceptance import CHECKS, run_check


@pytest.mark.parametrize("number", sorted(CHECKS), ids=lambda n: f"criterion_{n:02d}")
def test_acceptance_criterion(number, capsys):
    result = run_check(number)
    with capsys.disabled():
        print("\n" + result.line() + f" ({result.seconds:.1f} s)")
    assert result.passed, result.line()
