"""Domain types, validation and the error hierarchy shared by every module.

Machine and task indices are 0-based throughout the Python API. Run times
are held in ``float64`` arrays of shape ``(m, n)``: row ``i`` is machine
``i``'s reported time for each task.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class GBMError(ValueError):
    """Base class for every error raised by this package."""


class NonPositiveEntry(GBMError):
    pass


class NonFiniteEntry(GBMError):
    pass


class RaggedMatrix(GBMError):
    pass


class OrderingViolation(GBMError):
    pass


class WrongMachineCount(GBMError):
    pass


class ScriptLengthMismatch(GBMError):
    pass


class TooLarge(GBMError):
    """An exact enumeration would exceed its configured cap."""


class InfeasibleParameters(GBMError):
    pass


class EmptyFeasibleRegion(GBMError):
    pass


class RatioMismatch(GBMError):
    pass


@dataclass(frozen=True)
class Parameters:
    """Thresholds ``alpha > beta >= 1`` and bias ``1/2 <= r < 1``.

    Construction validates the ordering chain; use :func:`validate_parameters`
    when a factory reads better.
    """

    alpha: float
    beta: float
    r: float

    def __post_init__(self):
        a, b, r = float(self.alpha), float(self.beta), float(self.r)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "r", r)
        if not all(math.isfinite(v) for v in (a, b, r)):
            raise OrderingViolation(f"non-finite parameter in {(a, b, r)}")
        if not a > b:
            raise OrderingViolation(f"need alpha > beta, got alpha={a}, beta={b}")
        if b < 1.0:
            raise OrderingViolation(f"need beta >= 1, got beta={b}")
        if not 0.5 <= r < 1.0:
            raise OrderingViolation(f"need 1/2 <= r < 1, got r={r}")

    @property
    def bound_feasible(self) -> bool:
        """Whether the closed-form bounds apply: ``alpha <= 1 + 1/alpha`` and ``beta > 1``."""
        return self.alpha <= 1.0 + 1.0 / self.alpha and self.beta > 1.0

    @property
    def script_values(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, 1.0 / self.beta, 1.0 / self.alpha])

    @property
    def script_probabilities(self) -> np.ndarray:
        r = self.r
        return np.array([1.0 - r, r - 0.5, r - 0.5, 1.0 - r])

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.r)


def validate_parameters(alpha: float, beta: float, r: float) -> Parameters:
    return Parameters(alpha, beta, r)


PAPER_PARAMS = Parameters(1.4844, 1.1854, 0.7932)


def nr_baseline_params() -> Parameters:
    """Nisan and Ronen's two-machine mechanism as a parameter specialization.

    With ``beta = 1`` and ``r = 1/2`` the middle script values carry zero
    probability, so scripts are uniform on ``{4/3, 3/4}``.
    """
    return Parameters(4.0 / 3.0, 1.0, 0.5)


class Instance:
    """Immutable ``m x n`` matrix of strictly positive, finite run times."""

    __slots__ = ("_times",)

    def __init__(self, times):
        arr = _as_matrix(times)
        if arr.size and not np.all(np.isfinite(arr)):
            i, j = np.argwhere(~np.isfinite(arr))[0]
            raise NonFiniteEntry(f"entry t[{i}][{j}] = {arr[i, j]} is not finite")
        if arr.size and not np.all(arr > 0):
            i, j = np.argwhere(~(arr > 0))[0]
            raise NonPositiveEntry(f"entry t[{i}][{j}] = {arr[i, j]} must be > 0")
        arr.setflags(write=False)
        self._times = arr

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def m(self) -> int:
        return self._times.shape[0]

    @property
    def n(self) -> int:
        return self._times.shape[1]

    def to_list(self) -> list[list[float]]:
        return self._times.tolist()

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self._times.shape == other._times.shape and bool(
            np.array_equal(self._times, other._times)
        )

    def __hash__(self):
        return hash((self._times.shape, self._times.tobytes()))

    def __repr__(self):
        return f"Instance({self.to_list()!r})"


def _as_matrix(raw) -> np.ndarray:
    if isinstance(raw, Instance):
        return raw.times.copy()
    if isinstance(raw, np.ndarray):
        if raw.ndim != 2:
            raise RaggedMatrix(f"expected a 2-D matrix, got shape {raw.shape}")
        if raw.shape[0] < 1:
            raise RaggedMatrix("need at least one machine row")
        return np.array(raw, dtype=float)
    rows = list(raw)
    if not rows:
        raise RaggedMatrix("need at least one machine row")
    rows = [list(row) for row in rows]
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedMatrix(f"row {i} has {len(row)} entries, row 0 has {width}")
    out = np.empty((len(rows), width), dtype=float)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
                raise NonFiniteEntry(f"entry t[{i}][{j}] = {v!r} is not a number")
            out[i, j] = float(v)
    return out


def validate_instance(raw) -> Instance:
    """Check shape, positivity and finiteness; the input is never mutated."""
    if isinstance(raw, Instance):
        return raw
    return Instance(raw)


@dataclass(frozen=True)
class Outcome:
    """Allocation (machine index per task) plus per-machine payments.

    ``task_payments[j]`` is what the winner of task ``j`` is paid for it, so
    ``payments`` is its per-machine sum.
    """

    allocation: np.ndarray
    payments: np.ndarray
    task_payments: np.ndarray

    def indicators(self, m: int) -> np.ndarray:
        """Binary ``x[i, j]`` matrix."""
        x = np.zeros((m, len(self.allocation)), dtype=int)
        x[self.allocation, np.arange(len(self.allocation))] = 1
        return x


@dataclass(frozen=True)
class TaskCategory:
    kind: str  # "H", "M" or "L"
    efficient_machine: Optional[int]  # None on exact ties


@dataclass(frozen=True)
class UtilityRecord:
    agent: int
    valuation: float
    payment: float
    utility: float


def check_allocation(allocation: Sequence[int], m: int, n: int) -> np.ndarray:
    alloc = np.asarray(allocation, dtype=int)
    if alloc.shape != (n,):
        raise ValueError(f"allocation has shape {alloc.shape}, expected ({n},)")
    if n and (alloc.min() < 0 or alloc.max() >= m):
        raise ValueError(f"allocation indices must lie in [0, {m})")
    return alloc
