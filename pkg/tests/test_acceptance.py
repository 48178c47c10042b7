"""Acceptance gate: every criterion at its stated tolerance, one line each.

Shares its implementation with ``agehawkes check`` (agehawkes.acceptance) so
the CLI and the test suite can never drift apart.  Run with ``-s`` to see the
per-criterion pass/fail lines; each test also embeds the detail in its
assertion message.
"""

import time

import pytest

from agehawkes.acceptance import CRITERIA, CheckResult

_BY_NAME = dict(CRITERIA)


@pytest.mark.parametrize("name", [name for name, _ in CRITERIA])
def test_criterion(name):
    start = time.perf_counter()
    passed, detail = _BY_NAME[name]()
    result = CheckResult(name, passed, detail, time.perf_counter() - start)
    print(result.line())
    assert passed, result.line()
