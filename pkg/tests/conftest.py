import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_criteria = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    details = [v for k, v in item.user_properties if k == "detail"]
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _criteria.append((str(number), title, outcome, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, detail in sorted(_criteria, key=lambda c: c[0]):
        line = f"[{outcome}] criterion {number}: {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def report(record_property):
    """Attach a one-line measurement to the acceptance summary."""
    def _report(text):
        print(text)
        record_property("detail", text)
    return _report
