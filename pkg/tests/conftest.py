import numpy as np
import pytest

from bilevelcut.frontend.generators import knapsack_toy, moore_bard
from bilevelcut.simplex import LpProblem, solve_lp


@pytest.fixture
def mb():
    return moore_bard()


@pytest.fixture
def toy():
    return knapsack_toy()


def relaxation(inst):
    M, rhs = inst.all_rows()
    return LpProblem(np.concatenate([inst.c, inst.d1]), M, rhs, inst.lower(), inst.upper())


@pytest.fixture
def mb_root(mb):
    return solve_lp(relaxation(mb))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(rep, "nodeid", "") or rep.when != "call" and outcome != "error":
                continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props:
                continue
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines.append((props["criterion"], f"criterion {props['criterion']:>2}: {verdict}  {props.get('detail', '')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
