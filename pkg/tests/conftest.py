import pytest

from cmheights.numkernel import PrecisionContext

# filled by test_acceptance: (criterion, label, passed, detail)
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


@pytest.fixture(scope="session")
def ctx256():
    return PrecisionContext(256)


@pytest.fixture(scope="session")
def ctx128():
    return PrecisionContext(128)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: (t[0], t[1])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:>2} {label}: {detail}")
