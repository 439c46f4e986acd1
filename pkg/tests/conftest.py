import numpy as np
import pytest

from curetail.survdata import make_sample


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def uniform_sample(times, status, x=0.0):
    """All covariates equal, so every kernel weight is 1/n."""
    return make_sample(times, status, np.full(len(times), x))


_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    _criteria[number] = (title, report.outcome, props.get("detail", ""))


@pytest.fixture
def criterion(request, record_property):
    """Tag an acceptance test; ``criterion.detail(text)`` adds measured values to its summary line."""
    marker = request.node.get_closest_marker("criterion")
    record_property("criterion", marker.args)

    class _Detail:
        def detail(self, text):
            record_property("detail", text)

    return _Detail()


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcome, detail = _criteria[number]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {number:>2}: {verdict}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
