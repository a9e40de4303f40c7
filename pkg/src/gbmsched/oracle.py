"""Ground truth: makespans, brute-force optimum, exact expectations.

All exact routines enumerate assignments in lexicographic order with task 0
as the most significant digit and machine 0 first, so summation order (and
therefore every float result) is fixed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import (
    Instance,
    Outcome,
    Parameters,
    TooLarge,
    UtilityRecord,
    WrongMachineCount,
    check_allocation,
    validate_instance,
)
from .mechanism import (
    allocation_probabilities,
    draw_scripts,
    gbm2_rule,
    mgbm_config,
    mgbm_reduction,
)

OPT_CAP = 2**24
EXACT_MAX_TASKS = 20
_INNER_BLOCK = 2**16


def makespan(instance, allocation: Sequence[int]) -> float:
    inst = validate_instance(instance)
    alloc = check_allocation(allocation, inst.m, inst.n)
    return float(machine_loads(inst.times, alloc).max())


def machine_loads(times: np.ndarray, allocation: np.ndarray) -> np.ndarray:
    m, n = times.shape
    return np.bincount(allocation, weights=times[allocation, np.arange(n)], minlength=m)


def _enumerate_loads(times: np.ndarray) -> np.ndarray:
    """Loads of every assignment of the given tasks, shape ``(m**k, m)``."""
    m, k = times.shape
    loads = np.zeros((1, m))
    choice = np.arange(m)
    for j in range(k):
        size = loads.shape[0]
        loads = np.repeat(loads, m, axis=0)
        cols = np.tile(choice, size)
        loads[np.arange(size * m), cols] += times[cols, j]
    return loads


def opt_makespan(instance, cap: int = OPT_CAP) -> tuple[float, np.ndarray]:
    """Exhaustive optimum over all ``m**n`` allocations.

    The witness is the lexicographically first minimizer.
    """
    inst = validate_instance(instance)
    m, n = inst.m, inst.n
    if n == 0:
        return 0.0, np.zeros(0, dtype=int)
    if m**n > cap:
        raise TooLarge(f"{m}**{n} allocations exceed the enumeration cap {cap}")
    t = inst.times
    k = 1
    while k < n and m ** (k + 1) <= _INNER_BLOCK:
        k += 1
    head = n - k
    inner = _enumerate_loads(t[:, head:])
    best, witness = np.inf, None
    for prefix in itertools.product(range(m), repeat=head):
        base = np.zeros(m)
        for j, i in enumerate(prefix):
            base[i] += t[i, j]
        spans = (inner + base).max(axis=1)
        idx = int(np.argmin(spans))
        if spans[idx] < best:
            best = spans[idx]
            witness = np.array(prefix + np.unravel_index(idx, (m,) * k), dtype=int)
    return float(best), witness


@dataclass(frozen=True)
class OutcomeAtom:
    assignment: np.ndarray
    probability: float
    makespan: float
    last_machine: int  # 0 when machine 0 finishes no earlier than machine 1


@dataclass(frozen=True)
class JointStatistics:
    """Every assignment of a two-machine instance with its probability.

    ``joint[j, i, k]`` is ``Pr(last machine = i, task j on machine k)``.
    """

    times: np.ndarray
    p_machine0: np.ndarray
    loads: np.ndarray
    probability: np.ndarray
    joint: np.ndarray

    @property
    def n(self) -> int:
        return self.times.shape[1]

    @property
    def makespans(self) -> np.ndarray:
        return self.loads.max(axis=1)

    @property
    def last_machine(self) -> np.ndarray:
        return np.where(self.loads[:, 0] >= self.loads[:, 1], 0, 1)

    @property
    def expected_makespan(self) -> float:
        return float(np.sum(self.probability * self.makespans))

    @property
    def prob_last(self) -> np.ndarray:
        last = self.last_machine
        return np.array([self.probability[last == 0].sum(), self.probability[last == 1].sum()])

    def task_marginals(self) -> np.ndarray:
        """``Pr(task j on machine k)`` with shape ``(n, 2)``."""
        return self.joint.sum(axis=1)

    def coefficient_sum(self) -> float:
        """Sum over tasks of each task's contribution through the last machine."""
        t = self.times
        return float(np.sum(self.joint[:, 0, 0] * t[0] + self.joint[:, 1, 1] * t[1]))

    def assignments(self) -> np.ndarray:
        n = self.n
        idx = np.arange(self.probability.size)
        shifts = np.arange(n - 1, -1, -1)
        return (idx[:, None] >> shifts[None, :]) & 1

    def atoms(self) -> Iterator[OutcomeAtom]:
        assign = self.assignments()
        spans = self.makespans
        last = self.last_machine
        for k in range(self.probability.size):
            yield OutcomeAtom(assign[k], float(self.probability[k]), float(spans[k]), int(last[k]))


def two_machine_joint(times: np.ndarray, p_machine0) -> JointStatistics:
    """Enumerate ``2**n`` assignments for independent per-task probabilities.

    Works on raw arrays so zero-length tasks (absent reduced-case tasks) can
    take part without affecting any load.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(p_machine0, dtype=float)
    n = t.shape[1]
    if n > EXACT_MAX_TASKS:
        raise TooLarge(f"exact enumeration supports at most {EXACT_MAX_TASKS} tasks, got {n}")
    l0 = np.zeros(1)
    l1 = np.zeros(1)
    pr = np.ones(1)
    for j in range(n):
        l0 = np.stack([l0 + t[0, j], l0], axis=1).ravel()
        l1 = np.stack([l1, l1 + t[1, j]], axis=1).ravel()
        pr = np.stack([pr * p[j], pr * (1.0 - p[j])], axis=1).ravel()
    loads = np.stack([l0, l1], axis=1)
    last0 = l0 >= l1
    joint = np.zeros((n, 2, 2))
    for i, mask in enumerate((last0, ~last0)):
        w = np.where(mask, pr, 0.0)
        for j in range(n):
            joint[j, i] = w.reshape(2**j, 2, 2 ** (n - 1 - j)).sum(axis=(0, 2))
    return JointStatistics(t, p, loads, pr, joint)


def _require_two(inst: Instance):
    if inst.m != 2:
        raise WrongMachineCount(f"exact expectation needs 2 machines, got {inst.m}")


def joint_statistics(instance, params: Parameters, p_machine0=None) -> JointStatistics:
    """Joint law of the last machine and every task's assignment.

    ``p_machine0`` overrides the mechanism's per-task probabilities.
    """
    inst = validate_instance(instance)
    _require_two(inst)
    if inst.n > EXACT_MAX_TASKS:
        raise TooLarge(f"exact enumeration supports at most {EXACT_MAX_TASKS} tasks, got {inst.n}")
    if p_machine0 is None:
        p_machine0 = allocation_probabilities(inst.times[0], inst.times[1], params)
    return two_machine_joint(inst.times, p_machine0)


def exact_expected_makespan(instance, params: Parameters, p_machine0=None) -> float:
    return joint_statistics(instance, params, p_machine0).expected_makespan


def agent_utility(instance, true_times, outcome: Outcome, agent: int) -> UtilityRecord:
    """Utility ``payment - true load`` of ``agent``.

    ``instance`` holds the reports; only ``true_times`` enters the valuation.
    """
    true = np.asarray(true_times, dtype=float)
    alloc = np.asarray(outcome.allocation)
    mine = alloc == agent
    valuation = -float(true[agent][mine].sum())
    payment = float(outcome.payments[agent])
    return UtilityRecord(agent, valuation, payment, valuation + payment)


def _mc_summary(spans: np.ndarray) -> tuple[float, float]:
    mean = float(spans.mean())
    if spans.size < 2:
        return mean, 0.0
    return mean, float(spans.std(ddof=1) / np.sqrt(spans.size))


def monte_carlo_expected_makespan(
    instance, params: Parameters, samples: int, seed: int = 0
) -> tuple[float, float]:
    """Sampled mean makespan of the two-machine mechanism and its standard error."""
    inst = validate_instance(instance)
    _require_two(inst)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    t = inst.times
    s = draw_scripts(params, (samples, inst.n), rng)
    win0, _ = gbm2_rule(t[0], t[1], s)
    l0 = np.where(win0, t[0], 0.0).sum(axis=1)
    l1 = np.where(win0, 0.0, t[1]).sum(axis=1)
    return _mc_summary(np.maximum(l0, l1))


def monte_carlo_mgbm_makespan(
    instance, params: Parameters, samples: int, seed: int = 0, partition=None
) -> tuple[float, float]:
    """Sampled mean makespan of the m-machine wrapper."""
    inst = validate_instance(instance)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    cfg = mgbm_config(inst.m, partition)
    a, b, ta, tb, _, _ = mgbm_reduction(inst, cfg)
    rng = np.random.default_rng(seed)
    s = draw_scripts(params, (samples, inst.n), rng)
    win_a, _ = gbm2_rule(ta, tb, s)
    winner = np.where(win_a, a, b)
    cost = np.where(win_a, ta, tb)
    loads = np.stack([np.where(winner == i, cost, 0.0).sum(axis=1) for i in range(inst.m)], axis=1)
    return _mc_summary(loads.max(axis=1))


@dataclass(frozen=True)
class RatioReport:
    t_gbm: float
    t_opt: float
    ratio: float
    instance: Instance
    params: Parameters
    exact: bool = True
    stderr: float = 0.0


def ratio_report(instance, params: Parameters, samples: Optional[int] = None, seed: int = 0) -> RatioReport:
    """Expected mechanism makespan over brute-force optimum.

    Exact for two machines with at most 20 tasks unless ``samples`` is
    given; sampled (m-GBM for more machines) otherwise.
    """
    inst = validate_instance(instance)
    t_opt, _ = opt_makespan(inst)
    if inst.m == 2 and samples is None:
        t_gbm, exact, se = exact_expected_makespan(inst, params), True, 0.0
    else:
        if samples is None:
            raise TooLarge("exact expectation only covers 2 machines; pass samples for Monte Carlo")
        if inst.m == 2:
            t_gbm, se = monte_carlo_expected_makespan(inst, params, samples, seed)
        else:
            t_gbm, se = monte_carlo_mgbm_makespan(inst, params, samples, seed)
        exact = False
    if t_opt <= 0:
        raise ValueError("optimal makespan must be positive (instance has no tasks)")
    return RatioReport(t_gbm, t_opt, t_gbm / t_opt, inst, params, exact, se)
