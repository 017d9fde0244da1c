import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

PROPERTY_MODULE = "test_properties.py"
PROPERTY_CRITERION = 8

_outcomes: dict[int, list[tuple[str, bool]]] = defaultdict(list)
_titles: dict[int, str] = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        if item.path.name == PROPERTY_MODULE:
            item.add_marker(pytest.mark.criterion(PROPERTY_CRITERION, "property suites"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    _titles.setdefault(number, title)
    # record the call phase, or a setup failure that prevented it
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[number].append((item.nodeid, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        passed = sum(ok for _, ok in results)
        status = "PASS" if passed == len(results) else "FAIL"
        tr.write_line(f"criterion {number} {status}: {_titles[number]} ({passed}/{len(results)} checks)")
        for nodeid, ok in results:
            if not ok:
                tr.write_line(f"    failed: {nodeid}")
