"""Shared pytest wiring: print the acceptance verdict block at session end."""

from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for name in ("test_acceptance", "tests.test_acceptance"):
        module = sys.modules.get(name)
        if module is not None and getattr(module, "VERDICT_LINES", None):
            terminalreporter.write_sep("-", "acceptance criteria")
            for line in module.VERDICT_LINES:
                terminalreporter.write_line(line)
            break
