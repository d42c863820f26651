import pytest

_GATE = {}


@pytest.fixture
def gate():
    """Record the one-line verdict of an acceptance criterion."""

    def record(name, ok, detail):
        line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
        _GATE[name] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _GATE:
        return
    terminalreporter.section("acceptance gate")
    for name in sorted(_GATE, key=lambda n: int(n.split("-")[1])):
        terminalreporter.write_line(_GATE[name])
