import pytest

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Append ``(criterion, passed, detail)`` rows shown in the terminal summary."""
    return request.config.stash[_ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_ACCEPTANCE_KEY, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(rows, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
