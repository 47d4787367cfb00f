import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spinlambek import SearchBudget, load_lexicon, parse_formula, run  # noqa: E402
from spinlambek.lexicon import default_lexicon_path  # noqa: E402

DUTCH = ["man", "die", "de", "hond", "bijt"]

_criteria: dict[int, dict] = {}


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(default_lexicon_path())


@pytest.fixture(scope="session")
def dutch_report(lexicon):
    return run(DUTCH, parse_formula("n"), SearchBudget(max_comm=1), lexicon=lexicon)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    item_marker = getattr(report, "criterion", None)
    if item_marker is None:
        return
    number, title = item_marker
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "seen": False})
    if report.when == "call" or report.outcome != "passed":
        entry["seen"] = True
        if report.outcome != "passed":
            entry["ok"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] and entry["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
