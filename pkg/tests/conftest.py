"""Shared test plumbing: collects acceptance-check verdict lines and
prints them in the terminal summary (immune to output capture)."""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
