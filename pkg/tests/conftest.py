import pytest

from backshift.config import load_config


@pytest.fixture(scope="session")
def flagship():
    cfg = load_config(preset="v1-flagship")
    return cfg, cfg.context()


@pytest.fixture(scope="session")
def v2_isometry():
    cfg = load_config(preset="v2-isometry")
    return cfg, cfg.context()


@pytest.fixture(scope="session")
def v3_family():
    cfg = load_config(preset="v3-family")
    return cfg, cfg.context()



CRITERIA = {}


@pytest.fixture()
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, passed: bool, detail: str):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        CRITERIA[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[number])
