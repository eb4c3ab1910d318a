import helpers


def pytest_terminal_summary(terminalreporter):
    lines = getattr(helpers, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
