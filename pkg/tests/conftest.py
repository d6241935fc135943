import time

import pytest

_RESULTS = {}
_START = time.perf_counter()
SUITE_LIMIT_S = 120.0


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args
    detail = ""
    if rep.failed and call.excinfo is not None:
        detail = str(call.excinfo.value).strip().splitlines()[0][:160] if str(call.excinfo.value).strip() else ""
    _RESULTS[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    elapsed = time.perf_counter() - _START
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status, detail = _RESULTS[number]
        if number == 13:
            suite_ok = elapsed < SUITE_LIMIT_S
            title = f"{title}; suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s)"
            if not suite_ok:
                status = "FAIL"
        line = f"criterion {number:2d}: {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        tr.write_line(line)
