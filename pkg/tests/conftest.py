import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance criterion lines after capture is torn down.

    The acceptance tests append one line per criterion to
    test_acceptance.LINES while they run; printing them here puts them on the
    real terminal regardless of capture mode.
    """
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None) if mod else None
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
