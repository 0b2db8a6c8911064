import pytest


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(report, "user_properties", ()))
            if "criterion" in props and report.when in ("call", "setup"):
                rows.append((props["criterion"], outcome.upper(), report.nodeid.split("::")[-1]))
    if rows:
        terminalreporter.section("acceptance criteria")
        for criterion, outcome, name in sorted(rows, key=lambda r: (int(r[0].split()[0]), r[2])):
            terminalreporter.write_line(f"criterion {criterion:<28} {outcome:<8} {name}")


@pytest.fixture
def hand_fixture():
    """Hits at ranks 2 and 5 of 5, r=2, ratings 5.0 (rank 2) and 4.5 (rank 5)."""
    rec = ["i1", "i2", "i3", "i4", "i5"]
    rel = {"i2": 5.0, "i5": 4.5}
    return rec, rel, 5
