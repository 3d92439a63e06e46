import logging

ACCEPTANCE_LINES: list[str] = []

logging.getLogger("numba").setLevel(logging.WARNING)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
