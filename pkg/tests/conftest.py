import numpy as np
import pytest

# criterion number -> (title, outcome, detail)
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.fixture
def record(request):
    """Attach a one-line measurement summary to the current acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")

    def _record(detail):
        n, title = marker.args
        _ACCEPTANCE[n] = (title, _ACCEPTANCE.get(n, (title, None, ""))[1], detail)

    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    n, title = marker.args
    _, prev, detail = _ACCEPTANCE.get(n, (title, None, ""))
    ok = rep.passed if prev is None else (prev and rep.passed)
    _ACCEPTANCE[n] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {n:2d}: {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
