import pytest

# (number, title, passed, detail) rows filled in by test_acceptance
CRITERIA = []


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str):
        CRITERIA.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(CRITERIA):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  [{number}] {title}: {detail}")
