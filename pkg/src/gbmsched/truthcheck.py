"""Deviation harnesses for universal and in-expectation truthfulness.

Utility is piecewise constant in an agent's own report, with jumps only where
the report crosses ``s * t_other`` for some script value ``s``. The grids
here therefore bracket every such threshold on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import Parameters, TooLarge, WrongMachineCount, validate_instance
from .mechanism import allocate_gbm2, allocate_mgbm, draw_scripts, gbm2_rule
from .oracle import EXACT_MAX_TASKS, agent_utility

DEFAULT_SCALES = tuple(np.round(np.logspace(-1, 1, 25), 6)) + (0.999, 0.9999, 1.0001, 1.001, 1.02)
DEFAULT_OFFSETS = (0.25, 0.5, 0.9, 0.99, 1.01, 1.1, 2.0, 4.0)
THRESHOLD_EPS = 1e-9


@dataclass(frozen=True)
class DeviationSpec:
    """Misreports for each agent, all strictly positive.

    ``scale_factors`` multiply the whole true row; each of ``per_task_offsets``
    multiplies one entry at a time; ``custom_rows`` maps an agent to explicit
    rows.
    """

    scale_factors: tuple = DEFAULT_SCALES
    per_task_offsets: tuple = DEFAULT_OFFSETS
    custom_rows: Mapping[int, Sequence[Sequence[float]]] = field(default_factory=dict)

    def misreports(self, true_row, agent: int) -> np.ndarray:
        row = np.asarray(true_row, dtype=float)
        n = row.size
        out = [row * f for f in self.scale_factors]
        for f in self.per_task_offsets:
            for j in range(n):
                dev = row.copy()
                dev[j] *= f
                out.append(dev)
        out.extend(np.asarray(r, dtype=float) for r in self.custom_rows.get(agent, ()))
        rows = np.array(out, dtype=float).reshape(len(out), n)
        if rows.size and not np.all(rows > 0):
            raise ValueError("misreports must be strictly positive")
        return rows


def threshold_rows(times: np.ndarray, agent: int, params: Parameters, eps: float = THRESHOLD_EPS) -> list:
    """Rows that put one task exactly on, just below and just above each threshold."""
    t0, t1 = times
    rows = []
    for s in params.script_values:
        for j in range(times.shape[1]):
            # agent 0 wins task j iff report < s * t1; agent 1 loses it iff report <= t0 / s
            thr = s * t1[j] if agent == 0 else t0[j] / s
            for v in (thr * (1 - eps), thr, thr * (1 + eps)):
                row = times[agent].copy()
                row[j] = v
                rows.append(row)
    return rows


def standard_deviations(instance, params: Parameters) -> DeviationSpec:
    inst = validate_instance(instance)
    custom = {i: threshold_rows(inst.times, i, params) for i in range(2)}
    return DeviationSpec(custom_rows=custom)


@dataclass(frozen=True)
class DeviationReport:
    agent: int
    misreport: np.ndarray
    truthful_utility: float
    deviant_utility: float

    @property
    def gain(self) -> float:
        return self.deviant_utility - self.truthful_utility


def _require_two(inst):
    if inst.m != 2:
        raise WrongMachineCount(f"expected 2 machines, got {inst.m}")


def _deviant_utilities(times: np.ndarray, agent: int, rows: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Utility of ``agent`` for each misreport row under the fixed script ``s``."""
    if agent == 0:
        win0, pay = gbm2_rule(rows, times[1], s)
        mine = win0
    else:
        win0, pay = gbm2_rule(times[0], rows, s)
        mine = ~win0
    return np.where(mine, pay - times[agent], 0.0).sum(axis=1)


def check_universal_truthfulness(instance, script, spec: Optional[DeviationSpec] = None,
                                 params: Optional[Parameters] = None) -> list:
    """Every misreport's utility gain under one fixed script, for both agents.

    Without ``spec`` the standard grid is used, which needs ``params`` for
    its threshold points.
    """
    inst = validate_instance(instance)
    _require_two(inst)
    if spec is None:
        if params is None:
            raise ValueError("need either a DeviationSpec or Parameters")
        spec = standard_deviations(inst, params)
    s = np.asarray(script, dtype=float)
    truthful = allocate_gbm2(inst, s)
    reports = []
    for agent in (0, 1):
        base = agent_utility(inst, inst.times, truthful, agent).utility
        rows = spec.misreports(inst.times[agent], agent)
        dev = _deviant_utilities(inst.times, agent, rows, s)
        reports.extend(DeviationReport(agent, rows[k], base, float(dev[k])) for k in range(len(rows)))
    return reports


def expected_utilities(times: np.ndarray, agent: int, rows: np.ndarray, params: Parameters) -> np.ndarray:
    """Exact expected utility for each report row.

    Allocation and payment of a task depend only on its own script value,
    so the expectation factorizes into a weighted sum over the four values.
    """
    s = params.script_values
    w = params.script_probabilities
    t = times
    if agent == 0:
        win0, pay = gbm2_rule(rows[:, :, None], t[1][None, :, None], s)
        gain = np.where(win0, pay - t[0][None, :, None], 0.0)
    else:
        win0, pay = gbm2_rule(t[0][None, :, None], rows[:, :, None], s)
        gain = np.where(~win0, pay - t[1][None, :, None], 0.0)
    return (gain @ w).sum(axis=1)


def check_expected_truthfulness(instance, params: Parameters, spec: Optional[DeviationSpec] = None) -> list:
    inst = validate_instance(instance)
    _require_two(inst)
    if inst.n > EXACT_MAX_TASKS:
        raise TooLarge(f"exact expectation supports at most {EXACT_MAX_TASKS} tasks, got {inst.n}")
    if spec is None:
        spec = standard_deviations(inst, params)
    reports = []
    for agent in (0, 1):
        base = float(expected_utilities(inst.times, agent, inst.times[agent][None, :], params)[0])
        rows = spec.misreports(inst.times[agent], agent)
        dev = expected_utilities(inst.times, agent, rows, params)
        reports.extend(DeviationReport(agent, rows[k], base, float(dev[k])) for k in range(len(rows)))
    return reports


def check_mgbm_truthfulness(instance, script, params: Parameters, spec: Optional[DeviationSpec] = None,
                            partition=None) -> list:
    """Fixed-script deviations for every machine of the m-machine wrapper.

    Threshold points are each task's capped critical report, which depends
    on the other machines' times; they are added per machine.
    """
    inst = validate_instance(instance)
    s = np.asarray(script, dtype=float)
    spec = spec or DeviationSpec()
    truthful = allocate_mgbm(inst, params, partition=partition, script=s)
    reports = []
    for agent in range(inst.m):
        base = agent_utility(inst, inst.times, truthful, agent).utility
        rows = list(spec.misreports(inst.times[agent], agent))
        others = np.delete(inst.times, agent, axis=0)
        for j in range(inst.n):
            for thr in np.unique(np.concatenate([others[:, j], others[:, j] * s[j], others[:, j] / s[j]])):
                for v in (thr * (1 - THRESHOLD_EPS), thr, thr * (1 + THRESHOLD_EPS)):
                    row = inst.times[agent].copy()
                    row[j] = v
                    rows.append(row)
        for row in rows:
            reported = inst.times.copy()
            reported[agent] = row
            out = allocate_mgbm(reported, params, partition=partition, script=s)
            dev = agent_utility(reported, inst.times, out, agent).utility
            reports.append(DeviationReport(agent, row, base, dev))
    return reports


@dataclass
class HarnessSummary:
    instances: int
    scripts_per_instance: int
    deviations: int
    min_deviations_per_agent: int
    max_gain: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def random_two_machine(rng: np.random.Generator, max_tasks: int = 10):
    n = int(rng.integers(1, max_tasks + 1))
    return 10.0 ** rng.uniform(-2, 2, size=(2, n))


def truthfulness_harness(params: Parameters, instances: int, seed: int = 0, scripts: int = 4,
                         max_tasks: int = 10, tol: float = 1e-9) -> HarnessSummary:
    """Random instances x random scripts x the standard deviation grid."""
    rng = np.random.default_rng(seed)
    total = 0
    fewest = None
    max_gain = -np.inf
    violations = []
    for _ in range(instances):
        times = random_two_machine(rng, max_tasks)
        spec = standard_deviations(times, params)
        for _ in range(scripts):
            s = draw_scripts(params, times.shape[1], rng)
            reports = check_universal_truthfulness(times, s, spec)
            total += len(reports)
            per_agent = min(sum(1 for r in reports if r.agent == a) for a in (0, 1))
            fewest = per_agent if fewest is None else min(fewest, per_agent)
            for rep in reports:
                if rep.gain > max_gain:
                    max_gain = rep.gain
                if rep.gain > tol:
                    violations.append((times, s, rep))
    return HarnessSummary(instances, scripts, total, fewest or 0, float(max_gain), violations)
