import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line, then assert it."""

    def record(name: str, ok: bool, detail: str):
        line = f"{name} {'PASS' if ok else 'FAIL'} {detail}"
        _LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_LINES, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)
