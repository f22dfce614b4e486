import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    for mod in list(sys.modules.values()):
        lines = getattr(mod, "ACCEPTANCE_LINES", None)
        if isinstance(lines, dict) and lines:
            terminalreporter.section("acceptance criteria")
            for k in sorted(lines):
                terminalreporter.write_line(lines[k])
            break
