"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import OrderedDict

_RESULTS = OrderedDict()  # criterion id -> list of (label, passed)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, label): acceptance criterion check")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, label = marker.args
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _RESULTS.setdefault(cid, []).append((label, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, checks in _RESULTS.items():
        ok = all(passed for _, passed in checks)
        failed = [label for label, passed in checks if not passed]
        detail = "; ".join(label for label, _ in checks) if ok else \
            "failed: " + "; ".join(failed)
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}  {detail}")
