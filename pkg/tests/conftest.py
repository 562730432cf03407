"""Shared pytest wiring: per-criterion summary lines for the acceptance suite.

Tests marked ``@pytest.mark.criterion(n, "...")`` are aggregated by number;
a criterion passes only if every test carrying its number passed. The
terminal summary then prints one PASS/FAIL line per criterion.
"""

_CRITERIA: dict[int, str] = {}
_NODE_TO_CRITERION: dict[str, int] = {}
_OUTCOMES: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(number, description): ties a test to a numbered acceptance criterion",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is None:
            continue
        number, description = marker.args
        _CRITERIA[number] = description
        _NODE_TO_CRITERION[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _NODE_TO_CRITERION.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES.setdefault(number, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        outcomes = _OUTCOMES[number]
        if all(o == "passed" for o in outcomes):
            status = "PASS"
        elif any(o == "failed" for o in outcomes):
            status = "FAIL"
        else:
            status = "SKIP"
        terminalreporter.write_line(
            f"ACCEPTANCE {number}: {status} - {_CRITERIA[number]}"
        )
