"""The acceptance suite: one test per criterion at its stated tolerance.

Each test prints a one-line PASS/FAIL summary; the lines are collected
again in the terminal summary under "acceptance criteria".
"""

import pytest

from idla1d import acceptance

from conftest import ACCEPTANCE_LINES


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    res = acceptance.run_criterion(number)
    line = acceptance.format_line(res)
    ACCEPTANCE_LINES.append(line)
    print(line)
    failed = [c for c in res.checks if not c.get("passed", True)]
    assert res.passed, "%s\n%s" % (line, "\n".join(map(str, failed)))
