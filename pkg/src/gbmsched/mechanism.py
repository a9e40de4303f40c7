"""The randomly biased two-machine mechanism and its m-machine wrapper.

Each task is handled independently. A script value ``s`` is drawn from
``{alpha, beta, 1/beta, 1/alpha}`` with probabilities
``{1-r, r-1/2, r-1/2, 1-r}``; machine 0 wins iff ``t0 < s * t1`` and is paid
``s * t1``, otherwise machine 1 wins and is paid ``t0 / s``. For a fixed
script this is a weighted VCG auction per task, hence universally truthful.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    Instance,
    Outcome,
    Parameters,
    ScriptLengthMismatch,
    TaskCategory,
    WrongMachineCount,
    nr_baseline_params,
    validate_instance,
)

__all__ = [
    "ScriptDistribution",
    "MgbmConfig",
    "sample_script",
    "draw_scripts",
    "gbm2_rule",
    "allocate_gbm2",
    "task_category",
    "allocation_probability",
    "allocation_probabilities",
    "nr_baseline_params",
    "mgbm_config",
    "mgbm_reduction",
    "allocate_mgbm",
]


@dataclass(frozen=True)
class ScriptDistribution:
    support: np.ndarray
    probabilities: np.ndarray

    @classmethod
    def from_params(cls, params: Parameters) -> "ScriptDistribution":
        return cls(params.script_values, params.script_probabilities)


def draw_scripts(params: Parameters, shape, rng: np.random.Generator) -> np.ndarray:
    """Draw script values of arbitrary ``shape`` from a caller-owned generator."""
    idx = rng.choice(4, size=shape, p=params.script_probabilities)
    return params.script_values[idx]


def sample_script(params: Parameters, n: int, seed: int) -> np.ndarray:
    """``n`` independent script values, reproducible from ``seed``."""
    if n < 0:
        raise ValueError("task count must be >= 0")
    return draw_scripts(params, n, np.random.default_rng(seed))


def gbm2_rule(t0, t1, s):
    """Vectorized per-task rule.

    Returns ``(machine0_wins, payment_to_winner)``; inputs broadcast.
    Equality ``t0 == s * t1`` goes to machine 1.
    """
    t0 = np.asarray(t0, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    s = np.asarray(s, dtype=float)
    threshold = s * t1
    win0 = t0 < threshold
    pay = np.where(win0, threshold, t0 / s)
    return win0, pay


def allocate_gbm2(instance, script: Sequence[float]) -> Outcome:
    inst = validate_instance(instance)
    if inst.m != 2:
        raise WrongMachineCount(f"GBM needs exactly 2 machines, got {inst.m}")
    s = np.asarray(script, dtype=float)
    if s.shape != (inst.n,):
        raise ScriptLengthMismatch(f"script has {s.size} entries for {inst.n} tasks")
    if s.size and not np.all(s > 0):
        raise ValueError("script values must be positive")
    t = inst.times
    win0, pay = gbm2_rule(t[0], t[1], s)
    allocation = np.where(win0, 0, 1)
    payments = np.array([pay[win0].sum(), pay[~win0].sum()])
    return Outcome(allocation=allocation, payments=payments, task_payments=pay)


def task_category(t1: float, t2: float, params: Parameters) -> TaskCategory:
    """Diagnostic h/m/l label. A ratio of exactly alpha is M, exactly beta is L."""
    ratio = max(t1 / t2, t2 / t1)
    if ratio > params.alpha:
        kind = "H"
    elif ratio > params.beta:
        kind = "M"
    else:
        kind = "L"
    if t1 < t2:
        eff = 0
    elif t2 < t1:
        eff = 1
    else:
        eff = None
    return TaskCategory(kind, eff)


def allocation_probabilities(t0, t1, params: Parameters) -> np.ndarray:
    """Probability that machine 0 receives each task, by threshold case.

    Thresholds are formed as ``s * t1`` with the same floats the mechanism
    uses, so the result agrees with the script semantics even on boundaries.
    """
    t0 = np.asarray(t0, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    a, b, b_inv, a_inv = params.script_values
    r = params.r
    return np.select(
        [t0 >= a * t1, t0 >= b * t1, t0 >= b_inv * t1, t0 >= a_inv * t1],
        [0.0, 1.0 - r, 0.5, r],
        default=1.0,
    )


def allocation_probability(t1: float, t2: float, params: Parameters) -> float:
    return float(allocation_probabilities(t1, t2, params))


@dataclass(frozen=True)
class MgbmConfig:
    """Two equal-size halves of the (possibly padded) machine set.

    When ``pad_used`` is set, index ``m`` denotes the padding machine with
    infinite run times.
    """

    s1: tuple
    s2: tuple
    pad_used: bool


def mgbm_config(m: int, partition: Optional[tuple] = None) -> MgbmConfig:
    """Default partition is first half / second half of ``0..m-1`` plus pad."""
    if m < 2:
        raise WrongMachineCount(f"m-GBM needs at least 2 machines, got {m}")
    pad = m % 2 == 1
    if partition is None:
        order = list(range(m)) + ([m] if pad else [])
        half = len(order) // 2
        return MgbmConfig(tuple(order[:half]), tuple(order[half:]), pad)
    if isinstance(partition, MgbmConfig):
        s1, s2 = list(partition.s1), list(partition.s2)
    else:
        s1, s2 = (list(p) for p in partition)
    s1 = sorted(i for i in s1 if i != m)
    s2 = sorted(i for i in s2 if i != m)
    if set(s1) & set(s2) or sorted(s1 + s2) != list(range(m)) or not s1 or not s2:
        raise ValueError(f"partition {partition!r} must split machines 0..{m - 1} into two nonempty sets")
    if abs(len(s1) - len(s2)) > (1 if pad else 0):
        raise ValueError("partition halves must have equal size after padding")
    if pad:
        (s1 if len(s1) < len(s2) else s2).append(m)
    return MgbmConfig(tuple(s1), tuple(s2), pad)


def _half_minima(times: np.ndarray, members: tuple):
    sub = times[list(members)]
    order = np.argsort(sub, axis=0, kind="stable")
    idx = np.asarray(members)[order[0]]
    first = np.take_along_axis(sub, order[:1], axis=0)[0]
    if len(members) > 1:
        second = np.take_along_axis(sub, order[1:2], axis=0)[0]
    else:
        second = np.full(times.shape[1], np.inf)
    return idx, first, second


def mgbm_reduction(instance, config: Optional[MgbmConfig] = None):
    """Per-task champions of each half and their capping second minima.

    Returns ``(a, b, t_a, t_b, t_a2, t_b2)`` arrays of length ``n``.
    """
    inst = validate_instance(instance)
    cfg = config or mgbm_config(inst.m)
    times = inst.times
    if cfg.pad_used:
        times = np.vstack([times, np.full((1, inst.n), np.inf)])
    a, ta, ta2 = _half_minima(times, cfg.s1)
    b, tb, tb2 = _half_minima(times, cfg.s2)
    return a, b, ta, tb, ta2, tb2


def allocate_mgbm(
    instance,
    params: Parameters,
    seed: int = 0,
    partition=None,
    script: Optional[Sequence[float]] = None,
) -> Outcome:
    """Run the two-machine rule between the fastest machine of each half.

    The winner is paid ``min(gbm_payment, second-fastest time in its half)``.
    Passing ``script`` fixes the random bits instead of drawing from ``seed``.
    """
    inst = validate_instance(instance)
    cfg = mgbm_config(inst.m, partition)
    a, b, ta, tb, ta2, tb2 = mgbm_reduction(inst, cfg)
    if script is None:
        s = sample_script(params, inst.n, seed)
    else:
        s = np.asarray(script, dtype=float)
        if s.shape != (inst.n,):
            raise ScriptLengthMismatch(f"script has {s.size} entries for {inst.n} tasks")
    win_a, pay = gbm2_rule(ta, tb, s)
    allocation = np.where(win_a, a, b)
    task_pay = np.minimum(pay, np.where(win_a, ta2, tb2))
    payments = np.bincount(allocation, weights=task_pay, minlength=inst.m)[: inst.m]
    return Outcome(allocation=allocation, payments=payments, task_payments=task_pay)
