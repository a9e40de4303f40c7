import itertools

import numpy as np
import pytest

from gbmsched.core import PAPER_PARAMS, nr_baseline_params


@pytest.fixture
def paper():
    return PAPER_PARAMS


@pytest.fixture
def nr():
    return nr_baseline_params()


def brute_expected_makespan(times, params):
    """Expectation over all 4**n raw scripts, straight from the allocation rule."""
    t = np.asarray(times, dtype=float)
    n = t.shape[1]
    total = 0.0
    for combo in itertools.product(range(4), repeat=n):
        p = np.prod([params.script_probabilities[k] for k in combo])
        loads = [0.0, 0.0]
        for j, k in enumerate(combo):
            s = params.script_values[k]
            if t[0, j] < s * t[1, j]:
                loads[0] += t[0, j]
            else:
                loads[1] += t[1, j]
        total += p * max(loads)
    return total


def brute_opt(times):
    t = np.asarray(times, dtype=float)
    m, n = t.shape
    best = np.inf
    for x in itertools.product(range(m), repeat=n):
        loads = [sum(t[i, j] for j in range(n) if x[j] == i) for i in range(m)]
        best = min(best, max(loads))
    return best


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per criterion and fail the test on a miss."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
