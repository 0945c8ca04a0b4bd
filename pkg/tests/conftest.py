from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES_DIR = TESTS_DIR / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            if "acceptance" not in report.keywords:
                continue
            doc = report.nodeid.split("::")[-1].replace("test_", "").replace("_", " ")
            lines.append((doc, outcome == "passed"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(lines):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")
