"""Collects per-criterion outcomes and prints one verdict line per criterion."""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "Table 1 reproduction",
    2: "Table 2 experiment",
    3: "Table 3 growth law",
    4: "limit identities",
    5: "exact-oracle soundness of the implicit bound",
    6: "Monte Carlo coverage",
    7: "Hoeffding lemma sweep",
    8: "Clopper-Pearson limits",
    9: "property suites",
}

# modules whose property and round-trip tests make up criterion 9
_PROPERTY_MODULES = {"test_numerics.py", "test_classic.py", "test_conditioned.py",
                     "test_region.py", "test_validation.py", "test_cli.py"}

_outcomes = defaultdict(list)


def _criteria_of(item):
    found = {mark.args[0] for mark in item.iter_markers("criterion")}
    if item.path.name in _PROPERTY_MODULES:
        found.add(9)
    return found


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    failed_setup = rep.when == "setup" and rep.outcome != "passed"
    if rep.when == "call" or failed_setup:
        notes = [v for k, v in item.user_properties if k == "finding"]
        for n in _criteria_of(item):
            _outcomes[n].append((item.name, rep.outcome, notes))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n} ({title}): NOT RUN")
            continue
        failed = [name for name, outcome, _ in results if outcome != "passed"]
        verdict = "PASS" if not failed else "FAIL"
        line = f"criterion {n} ({title}): {verdict}  [{len(results) - len(failed)}/{len(results)} tests]"
        if failed:
            line += "  failing: " + ", ".join(failed)
        tr.write_line(line)
        for _, _, notes in results:
            for note in notes:
                tr.write_line(f"    finding: {note}")
