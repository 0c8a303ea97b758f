"""Shared pytest wiring: per-criterion verdict lines for the acceptance suite."""
from __future__ import annotations

import pytest


def pytest_terminal_summary(terminalreporter, exitstatus: int, config) -> None:
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    verdicts: dict[str, str] = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and "::" in nodeid:
                name = nodeid.split("::")[-1]
                # a setup error and a failed call may both report; FAIL wins
                if verdicts.get(name) != "FAIL":
                    verdicts[name] = label
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(verdicts):
        terminalreporter.write_line(f"{verdicts[name]} {name}")
