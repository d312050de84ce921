import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aptvdf.filter_core import PAPER_SPEC, design_prototype  # noqa: E402


@pytest.fixture(scope="session")
def paper_proto():
    return design_prototype(PAPER_SPEC)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SUMMARY", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
