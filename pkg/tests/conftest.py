"""Shared pytest wiring: surface the acceptance summary lines."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import SUMMARY_LINES
    except ImportError:
        return
    if SUMMARY_LINES:
        terminalreporter.section("acceptance criteria")
        for line in SUMMARY_LINES:
            terminalreporter.write_line(line)
