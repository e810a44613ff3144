import pytest

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion."""

    def record(label: str, passed: bool, detail: str = ""):
        _CRITERIA[label] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (len(s.split()[0]), s)):
        ok, detail = _CRITERIA[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {label}  {detail}")
