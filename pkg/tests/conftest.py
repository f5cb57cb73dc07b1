import acclog


def pytest_terminal_summary(terminalreporter):
    if not acclog.CLAUSES:
        return
    terminalreporter.section("acceptance criteria")
    for line in acclog.lines():
        terminalreporter.write_line(line)
