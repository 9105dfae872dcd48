"""Shared pytest plumbing.

The acceptance module records one line per top-level criterion through
``record_criterion``; the terminal-summary hook replays those lines after the
normal pytest report so they stay visible without ``-s``.
"""

CRITERION_LINES: list[str] = []


def record_criterion(line: str) -> None:
    CRITERION_LINES.append(line)
    print(line, flush=True)  # also visible live under -s


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)
