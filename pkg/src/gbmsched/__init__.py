"""Randomly biased truthful mechanisms for scheduling on unrelated machines."""

from .analysis import (
    CoefficientVector,
    GridSpec,
    ReducedInstance,
    bounds_eval,
    check_merge_monotonicity,
    coefficient_vector,
    merge_tasks,
    optimize_params,
    ratio_search,
    reduced_opt,
    reduced_to_instance,
    verify_pairwise_bounds,
)
from .core import (
    PAPER_PARAMS,
    GBMError,
    Instance,
    Outcome,
    Parameters,
    nr_baseline_params,
    validate_instance,
    validate_parameters,
)
from .mechanism import (
    allocate_gbm2,
    allocate_mgbm,
    allocation_probability,
    sample_script,
    task_category,
)
from .oracle import (
    agent_utility,
    exact_expected_makespan,
    joint_statistics,
    makespan,
    monte_carlo_expected_makespan,
    monte_carlo_mgbm_makespan,
    opt_makespan,
    ratio_report,
)
from .truthcheck import (
    DeviationSpec,
    check_expected_truthfulness,
    check_mgbm_truthfulness,
    check_universal_truthfulness,
    truthfulness_harness,
)

__version__ = "0.1.0"
