"""Worst-case analysis of the two-machine mechanism.

The reduced family has at most eight tasks A..H, each a magnitude times a
fixed ratio pattern, with a known optimal split (A, C, E, G on machine 0).
Its expected makespan is linear in the magnitudes; the coefficients are
bounded by nine closed forms whose maximum is the approximation ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional

import numpy as np

from .core import (
    EmptyFeasibleRegion,
    Instance,
    InfeasibleParameters,
    Parameters,
    RatioMismatch,
    WrongMachineCount,
    validate_instance,
)
from .oracle import (
    RatioReport,
    exact_expected_makespan,
    opt_makespan,
    two_machine_joint,
)

LABELS = "abcdefgh"


@dataclass(frozen=True)
class ReducedInstance:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    e: float = 0.0
    f: float = 0.0
    g: float = 0.0
    h: float = 0.0

    def __post_init__(self):
        for fld in fields(self):
            v = float(getattr(self, fld.name))
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"magnitude {fld.name}={v} must be finite and >= 0")
            object.__setattr__(self, fld.name, v)

    @classmethod
    def from_array(cls, values) -> "ReducedInstance":
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in LABELS])

    def scaled(self, factor: float) -> "ReducedInstance":
        return ReducedInstance.from_array(self.as_array() * factor)


def reduced_pattern(params: Parameters) -> tuple[np.ndarray, np.ndarray]:
    """Per-label ratio factors ``(2, 8)`` and limiting machine-0 probabilities ``(8,)``.

    The probabilities are those of tasks sitting just inside their category;
    at the exact boundary ratios the script rule can differ (see ``nudge``
    in :func:`reduced_times`).
    """
    a, b, r = params.alpha, params.beta, params.r
    factors = np.array(
        [
            [1, 1, 1, 1, b, a, 1, b],
            [a, a, a, b, 1, 1, b, 1],
        ],
        dtype=float,
    )
    probs = np.array([1.0, 1.0, r, r, 1 - r, 1 - r, 0.5, 0.5])
    return factors, probs


# Per label: which machine's time moves, and the sign of the relative move
# that puts the ratio strictly inside the intended category.
_NUDGE_ROW = np.array([1, 1, 1, 1, 0, 0, 1, 0])
_NUDGE_SIGN = np.array([+1, +1, -1, +1, +1, -1, -1, -1])


def reduced_times(red: ReducedInstance, params: Parameters, nudge: float = 0.0) -> np.ndarray:
    """All eight tasks as a ``(2, 8)`` matrix, zero magnitudes included."""
    factors, _ = reduced_pattern(params)
    t = factors * red.as_array()
    if nudge:
        cols = np.arange(8)
        t[_NUDGE_ROW, cols] *= 1 + _NUDGE_SIGN * nudge
    return t


def reduced_to_instance(red: ReducedInstance, params: Parameters, nudge: float = 0.0) -> Instance:
    """Two-machine instance of the present (nonzero) tasks.

    With ``nudge > 0`` boundary ratios move by that relative amount so the
    real mechanism allocates every task with its limiting probability.
    """
    t = reduced_times(red, params, nudge)
    return Instance(t[:, red.as_array() > 0])


def reduced_opt(red: ReducedInstance, params: Parameters) -> float:
    a, b, c, d, e, f, g, h = red.as_array()
    return max(a + c + params.beta * e + g, params.alpha * b + params.beta * d + f + h)


def reduced_expected_makespan(red: ReducedInstance, params: Parameters) -> float:
    """Expected makespan of the reduced instance under the limiting probabilities."""
    _, probs = reduced_pattern(params)
    present = red.as_array() > 0
    t = reduced_times(red, params)[:, present]
    return two_machine_joint(t, probs[present]).expected_makespan


@dataclass(frozen=True)
class CoefficientVector:
    c_a: float
    c_b: float
    c_c: float
    c_d: float
    c_e: float
    c_f: float
    c_g: float
    c_h: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, "c_" + k) for k in LABELS])

    def __getitem__(self, label: str) -> float:
        return getattr(self, "c_" + label.lower())

    def dot(self, red: ReducedInstance) -> float:
        return float(self.as_array() @ red.as_array())


def coefficient_vector(red: ReducedInstance, params: Parameters) -> CoefficientVector:
    """Exact multiplier of each magnitude in the expected makespan.

    Absent tasks keep their random assignment in the enumeration (they add
    no load), so every coefficient is defined.
    """
    factors, probs = reduced_pattern(params)
    stats = two_machine_joint(reduced_times(red, params), probs)
    joint = stats.joint
    coeffs = joint[:, 0, 0] * factors[0] + joint[:, 1, 1] * factors[1]
    return CoefficientVector(*(float(c) for c in coeffs))


BOUND_NAMES = tuple(f"B{k}" for k in range(1, 10))


def bound_values(alpha, beta, r) -> np.ndarray:
    """The nine closed-form bounds, broadcasting over array inputs.

    Stacked along a new leading axis of length nine.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    r = np.asarray(r, dtype=float)
    shape = np.broadcast(a, b, r).shape
    vals = [
        1 + 1 / a,
        2 * r + a - r**2 - a * r**2,
        1 + r / b,
        1 + (1 - r) * a,
        1 + b / 2,
        r**2 / b + 1 + r**2 + a - r - a * r,
        0.5 + r / 2 + a - a * r + b * r / 2,
        1 + r / (2 * b) + b / 2 - r / 2,
        0.75 + 0.75 * b,
    ]
    return np.stack([np.broadcast_to(v, shape) for v in vals])


@dataclass(frozen=True)
class BoundReport:
    values: np.ndarray
    feasible: bool
    binding: tuple

    @property
    def max(self) -> float:
        return float(self.values.max())

    def as_dict(self) -> dict:
        return dict(zip(BOUND_NAMES, (float(v) for v in self.values)))


def feasible_mask(alpha, beta, r):
    """Elementwise: where the closed-form bounds are valid for the given grids."""
    return (alpha > beta) & (beta > 1) & (alpha <= 1 + 1 / alpha) & (r >= 0.5) & (r < 1)


def bounds_eval(params: Parameters, binding_tol: float = 1e-4) -> BoundReport:
    """Evaluate the nine bounds; ``binding`` lists those within ``binding_tol`` of the max."""
    if not params.bound_feasible:
        raise InfeasibleParameters(
            f"bounds need beta > 1 and alpha <= 1 + 1/alpha, got {params.as_tuple()}"
        )
    vals = bound_values(params.alpha, params.beta, params.r)
    top = vals.max()
    binding = tuple(BOUND_NAMES[k] for k in range(9) if vals[k] >= top - binding_tol)
    return BoundReport(vals, True, binding)


def _pair10(p: Parameters) -> float:
    a, b, r = p.alpha, p.beta, p.r
    return (1 - r) + r / b + (1 + 1 / b) * r * (1 - r)


def _bound(k: int) -> Callable[[Parameters], float]:
    return lambda p: float(bound_values(p.alpha, p.beta, p.r)[k - 1])


# (machine-0 term, machine-1 term, bound name, bound). Terms are coefficient
# labels scaled by the optimum's ratio on that task.
PAIR_BOUNDS = (
    ("a", "b", "B1", _bound(1)),
    ("a", "d", "B3", _bound(3)),
    ("a", "f", "B4", _bound(4)),
    ("a", "h", "B5", _bound(5)),
    ("c", "b", "B1", _bound(1)),
    ("c", "d", "B6", _bound(6)),
    ("c", "f", "B2", _bound(2)),
    ("c", "h", "B7", _bound(7)),
    ("e", "b", "B1", _bound(1)),
    ("e", "d", "pair-ed", _pair10),
    ("e", "f", "B6", _bound(6)),
    ("e", "h", "B8", _bound(8)),
    ("g", "b", "B1", _bound(1)),
    ("g", "d", "B8", _bound(8)),
    ("g", "f", "B7", _bound(7)),
    ("g", "h", "B9", _bound(9)),
)


def normalized_terms(cv: CoefficientVector, params: Parameters) -> dict:
    """``C_a, C_c, C_e/beta, C_g`` and ``C_b/alpha, C_d/beta, C_f, C_h``."""
    a, b = params.alpha, params.beta
    div = {"a": 1, "b": a, "c": 1, "d": b, "e": b, "f": 1, "g": 1, "h": 1}
    return {k: cv[k] / div[k] for k in LABELS}


@dataclass
class PairwiseReport:
    trials: int
    max_slack: dict = field(default_factory=dict)  # pair -> max(sum - bound)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def random_reduced(rng: np.random.Generator, zero_prob: float = 0.2) -> ReducedInstance:
    """Magnitudes log-uniform in ``[1e-2, 1e2]``, each zero with ``zero_prob``."""
    vals = 10.0 ** rng.uniform(-2, 2, size=8)
    vals[rng.random(8) < zero_prob] = 0.0
    return ReducedInstance.from_array(vals)


def verify_pairwise_bounds(params: Parameters, trials: int, seed: int = 0, tol: float = 1e-9) -> PairwiseReport:
    if not params.bound_feasible:
        raise InfeasibleParameters(f"pairwise bounds need feasible parameters, got {params.as_tuple()}")
    rng = np.random.default_rng(seed)
    bounds = [(x, y, name, fn(params)) for x, y, name, fn in PAIR_BOUNDS]
    report = PairwiseReport(trials, {f"{x}+{y}": -np.inf for x, y, _, _ in bounds})
    for _ in range(trials):
        red = random_reduced(rng)
        terms = normalized_terms(coefficient_vector(red, params), params)
        for x, y, name, bound in bounds:
            key = f"{x}+{y}"
            slack = terms[x] + terms[y] - bound
            report.max_slack[key] = max(report.max_slack[key], slack)
            if slack > tol:
                report.violations.append((key, name, red, terms[x] + terms[y], bound))
    return report


@dataclass(frozen=True)
class GridSpec:
    alpha: tuple = (1.0, 1.62)
    beta: tuple = (1.0, 1.62)
    r: tuple = (0.5, 1.0)
    step: float = 0.01
    refinements: int = 2
    window: int = 10  # refinement half-width, in units of the previous step


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    if hi < lo:
        return np.empty(0)
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _grid_min(alphas, betas, rs):
    best = (np.inf, None)
    b, r = np.meshgrid(betas, rs, indexing="ij")
    for a in alphas:
        mask = feasible_mask(a, b, r)
        if not mask.any():
            continue
        obj = bound_values(a, b, r).max(axis=0)
        obj = np.where(mask, obj, np.inf)
        k = np.unravel_index(int(np.argmin(obj)), obj.shape)
        if obj[k] < best[0]:
            best = (float(obj[k]), (float(a), float(b[k]), float(r[k])))
    return best


def optimize_params(search: Optional[GridSpec] = None) -> tuple[Parameters, float]:
    """Minimize the largest bound by grid search plus local refinements."""
    spec = search or GridSpec()
    box = (spec.alpha, spec.beta, spec.r)
    obj, point = _grid_min(*(_axis(lo, hi, spec.step) for lo, hi in box))
    if point is None:
        raise EmptyFeasibleRegion(f"no feasible grid point in {box}")
    step = spec.step
    for _ in range(spec.refinements):
        fine = step / 10
        axes = []
        for (lo, hi), c in zip(box, point):
            start = max(lo, c - spec.window * step)
            stop = min(hi, c + spec.window * step)
            axes.append(_axis(start, stop, fine))
        cand_obj, cand = _grid_min(*axes)
        if cand is not None and cand_obj < obj:
            obj, point = cand_obj, cand
        step = fine
    return Parameters(*point), obj


def _ratio(inst: Instance, params: Parameters) -> float:
    t_opt, _ = opt_makespan(inst)
    return exact_expected_makespan(inst, params) / t_opt


def _ascend(x: np.ndarray, evaluate, allow_zero: bool, max_evals: int, min_step: float = 1e-7):
    """Coordinate ascent in log space with step halving."""
    best = evaluate(x)
    evals = 1
    step = 1.0
    while step >= min_step and evals < max_evals:
        improved = False
        for k in range(x.size):
            if x[k] == 0:
                moves = [1e-2]
            else:
                moves = [x[k] * math.exp(step), x[k] * math.exp(-step)]
                if allow_zero:
                    moves.append(0.0)
            cands = []
            for v in moves:
                y = x.copy()
                y[k] = v
                cands.append((evaluate(y), y))
            evals += len(cands)
            val, y = max(cands, key=lambda c: c[0])
            if val > best:
                x, best, improved = y, val, True
        if not improved:
            step /= 2
    return x, best


def ratio_search(params: Parameters, trials: int, seed: int = 0, max_tasks: int = 10,
                 max_evals: int = 2000, nudge: float = 1e-9) -> RatioReport:
    """Search for a bad instance: exact expectation over brute-force optimum.

    Half the starts are reduced-case instances (boundary ratios nudged into
    their categories), half are general instances with up to ``max_tasks``
    tasks; each start is refined by coordinate ascent.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst: Optional[RatioReport] = None

    def consider(inst: Instance, value: float):
        nonlocal worst
        if worst is None or value > worst.ratio:
            t_opt, _ = opt_makespan(inst)
            t_gbm = exact_expected_makespan(inst, params)
            worst = RatioReport(t_gbm, t_opt, t_gbm / t_opt, inst, params)

    def reduced_value(x):
        red = ReducedInstance.from_array(x)
        if not (x > 0).any():
            return -np.inf
        return _ratio(reduced_to_instance(red, params, nudge), params)

    for k in range(trials):
        if k % 2 == 0:
            x0 = random_reduced(rng, zero_prob=rng.uniform(0.2, 0.8)).as_array()
            if not (x0 > 0).any():
                x0[0] = 1.0
            x, _ = _ascend(x0, reduced_value, True, max_evals)
            consider(reduced_to_instance(ReducedInstance.from_array(x), params, nudge), reduced_value(x))
        else:
            n = int(rng.integers(1, max_tasks + 1))
            shape = (2, n)
            x0 = (10.0 ** rng.uniform(-2, 2, size=shape)).ravel()
            val = lambda x: _ratio(Instance(x.reshape(shape)), params)
            x, best = _ascend(x0, val, False, max_evals // 4)
            consider(Instance(x.reshape(shape)), best)
    return worst


def merge_tasks(instance, j1: int, j2: int, rtol: float = 1e-12) -> Instance:
    """Replace two tasks of equal time ratio by one with summed times."""
    inst = validate_instance(instance)
    if inst.m != 2:
        raise WrongMachineCount(f"merging is defined for 2 machines, got {inst.m}")
    if j1 == j2 or not (0 <= j1 < inst.n and 0 <= j2 < inst.n):
        raise IndexError(f"need two distinct task indices in [0, {inst.n}), got {j1}, {j2}")
    t = inst.times
    q1 = t[0, j1] / t[1, j1]
    q2 = t[0, j2] / t[1, j2]
    if abs(q1 - q2) > rtol * max(q1, q2):
        raise RatioMismatch(f"task ratios differ: {q1!r} vs {q2!r}")
    lo, hi = sorted((j1, j2))
    merged = t.copy()
    merged[:, lo] = t[:, j1] + t[:, j2]
    return Instance(np.delete(merged, hi, axis=1))


@dataclass(frozen=True)
class MergeReport:
    split_expected: float
    merged_expected: float
    split_opt: float
    merged_opt: float
    tol: float = 1e-9

    @property
    def expectation_monotone(self) -> bool:
        return self.merged_expected >= self.split_expected - self.tol

    @property
    def opt_monotone(self) -> bool:
        return self.merged_opt >= self.split_opt - self.tol

    @property
    def ok(self) -> bool:
        return self.expectation_monotone and self.opt_monotone


def check_merge_monotonicity(instance, j1: int, j2: int, params: Parameters) -> MergeReport:
    inst = validate_instance(instance)
    merged = merge_tasks(inst, j1, j2)
    return MergeReport(
        split_expected=exact_expected_makespan(inst, params),
        merged_expected=exact_expected_makespan(merged, params),
        split_opt=opt_makespan(inst)[0],
        merged_opt=opt_makespan(merged)[0],
    )
