import sys
from pathlib import Path

import pytest

SHIM_SRC = Path(__file__).resolve().parents[1] / "src"
PROGRAMS_DIR = Path(__file__).resolve().parent / "programs"

if str(SHIM_SRC) not in sys.path:
    sys.path.insert(0, str(SHIM_SRC))


@pytest.fixture
def shim_src() -> Path:
    return SHIM_SRC


@pytest.fixture
def programs_dir() -> Path:
    return PROGRAMS_DIR


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            if "acceptance" not in report.keywords:
                continue
            name = report.nodeid.split("::")[-1].replace("test_", "").replace("_", " ")
            lines.append((name, outcome == "passed"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(lines):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")
