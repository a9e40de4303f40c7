import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gbmsched.mechanism import allocate_gbm2, allocate_mgbm, draw_scripts, sample_script
from gbmsched.oracle import agent_utility
from gbmsched.truthcheck import (
    DeviationSpec,
    check_expected_truthfulness,
    check_mgbm_truthfulness,
    check_universal_truthfulness,
    expected_utilities,
    standard_deviations,
    truthfulness_harness,
)

T = [[1.0], [2.0]]
S = [1.4844]


def one_row(agent, row):
    return DeviationSpec(scale_factors=(), per_task_offsets=(), custom_rows={agent: [row]})


def test_winning_misreport_keeps_payment():
    (rep,) = [r for r in check_universal_truthfulness(T, S, one_row(0, [1.5])) if r.agent == 0]
    assert rep.gain == 0.0
    assert rep.truthful_utility == pytest.approx(1.9688)


def test_losing_misreport_gives_up_surplus():
    (rep,) = [r for r in check_universal_truthfulness(T, S, one_row(0, [3.0])) if r.agent == 0]
    assert rep.deviant_utility == 0.0
    assert rep.gain == pytest.approx(-1.9688)


def test_deviant_utility_matches_reference_path(paper):
    rng = np.random.default_rng(2)
    t = 10 ** rng.uniform(-1, 1, size=(2, 4))
    s = sample_script(paper, 4, 6)
    for rep in check_universal_truthfulness(t, s, params=paper):
        reported = t.copy()
        reported[rep.agent] = rep.misreport
        ref = agent_utility(reported, t, allocate_gbm2(reported, s), rep.agent).utility
        assert rep.deviant_utility == pytest.approx(ref, abs=1e-12)


def test_standard_grid_size(paper):
    spec = standard_deviations([[1.0], [2.0]], paper)
    for agent in (0, 1):
        rows = spec.misreports([1.0] if agent == 0 else [2.0], agent)
        assert len(rows) >= 50 and np.all(rows > 0)


def test_spec_rejects_nonpositive():
    with pytest.raises(ValueError):
        one_row(0, [-1.0]).misreports([1.0], 0)


def test_harness_small(paper):
    summary = truthfulness_harness(paper, 50, seed=4)
    assert summary.ok and summary.max_gain <= 1e-9
    assert summary.min_deviations_per_agent >= 50


def test_payment_independence(paper):
    rng = np.random.default_rng(0)
    for _ in range(100):
        t = 10 ** rng.uniform(-1, 1, size=(2, 1))
        s = draw_scripts(paper, 1, rng)
        truth = allocate_gbm2(t, s)
        winner = truth.allocation[0]
        pays = set()
        for f in np.logspace(-2, 2, 41):
            rep = t.copy()
            rep[winner] *= f
            out = allocate_gbm2(rep, s)
            if out.allocation[0] == winner:
                pays.add(out.payments[winner])
        assert pays == {truth.payments[winner]}


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32))
def test_individual_rationality(n, seed):
    from gbmsched.core import PAPER_PARAMS as paper

    rng = np.random.default_rng(seed)
    t = 10 ** rng.uniform(-2, 2, size=(2, n))
    s = draw_scripts(paper, n, rng)
    out = allocate_gbm2(t, s)
    for agent in (0, 1):
        assert agent_utility(t, t, out, agent).utility >= 0


def test_expected_no_threshold_crossing_zero_gain(paper):
    # 1.0 vs 10.0: every report in (0.1 * 10/alpha ... ) keeps each branch unchanged
    reps = check_expected_truthfulness([[1.0], [10.0]], paper, one_row(0, [1.5]))
    assert [r.gain for r in reps if r.agent == 0] == [0.0]


def test_expected_l_task_underbid(paper):
    (rep,) = [r for r in check_expected_truthfulness([[1.0], [1.0]], paper, one_row(0, [0.5])) if r.agent == 0]
    # branch-by-branch: truth wins for s in {alpha, beta}; 0.5 also wins for 1/beta, 1/alpha at a loss
    a, b, r = paper.alpha, paper.beta, paper.r
    truth = (1 - r) * (a - 1) + (r - 0.5) * (b - 1)
    dev = truth + (r - 0.5) * (1 / b - 1) + (1 - r) * (1 / a - 1)
    assert rep.truthful_utility == pytest.approx(truth, abs=1e-12)
    assert rep.deviant_utility == pytest.approx(dev, abs=1e-12)
    assert rep.gain < 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32))
def test_expected_truthfulness_grid(n, seed):
    from gbmsched.core import PAPER_PARAMS as paper

    t = 10 ** np.random.default_rng(seed).uniform(-2, 2, size=(2, n))
    assert max(r.gain for r in check_expected_truthfulness(t, paper)) <= 1e-9


def test_expected_utility_is_average_of_universal(paper):
    t = np.array([[1.0, 2.0], [1.3, 1.1]])
    rows = np.array([[0.7, 2.5]])
    exact = expected_utilities(t, 0, rows, paper)[0]
    total = 0.0
    for k1, s1 in enumerate(paper.script_values):
        for k2, s2 in enumerate(paper.script_values):
            w = paper.script_probabilities[k1] * paper.script_probabilities[k2]
            rep = np.vstack([rows[0], t[1]])
            total += w * agent_utility(rep, t, allocate_gbm2(rep, [s1, s2]), 0).utility
    assert exact == pytest.approx(total, abs=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_mgbm_truthful_and_rational(paper, m):
    rng = np.random.default_rng(m)
    for _ in range(5):
        t = 10 ** rng.uniform(-1, 1, size=(m, 3))
        s = draw_scripts(paper, 3, rng)
        reps = check_mgbm_truthfulness(t, s, paper)
        assert max(r.gain for r in reps) <= 1e-9
        out = allocate_mgbm(t, paper, script=s)
        for i in range(m):
            assert agent_utility(t, t, out, i).utility >= -1e-12
