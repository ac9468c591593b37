"""Acceptance criteria, one test each; every test prints a single pass/fail line."""
import pytest

from mechpol import acceptance


@pytest.mark.parametrize("criterion", acceptance.ALL, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
