import collections

import pytest

# criterion number -> list of (test name, passed, detail)
_CRITERIA = collections.OrderedDict()
_TITLES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    n, title = marker.args
    _TITLES[n] = title
    detail = getattr(item, "acceptance_detail", "")
    _CRITERIA.setdefault(n, []).append((item.name, rep.passed, detail))


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the acceptance summary."""

    def record(text):
        request.node.acceptance_detail = text

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entries = _CRITERIA[n]
        ok = all(passed for _, passed, _ in entries)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {_TITLES[n]}")
        for name, passed, text in entries:
            if text or not passed:
                tr.write_line(f"         {'ok  ' if passed else 'FAIL'} {name}: {text}")
