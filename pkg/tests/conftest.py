import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))   # oracle helper modules

_results = {}
_measured = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def measure(request):
    """Record a measured quantity that the acceptance summary prints."""
    def record(text):
        _measured[request.node.nodeid] = text
    return record


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results[report.nodeid] = report.outcome


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_terminal_summary(terminalreporter):
    rows = []
    for item in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", []) \
            + terminalreporter.stats.get("skipped", []):
        props = dict(getattr(item, "user_properties", []))
        if "criterion" in props:
            rows.append((props["criterion"], item.nodeid))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), nodeid in sorted(set(rows)):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[_results.get(nodeid, "skipped")]
        extra = _measured.get(nodeid, "")
        terminalreporter.write_line(f"criterion {number:>2}: {outcome}  {title}"
                                    + (f"  [{extra}]" if extra else ""))
