"""Walk through one run of the two-machine mechanism, task by task."""

import numpy as np

from gbmsched import PAPER_PARAMS as P
from gbmsched import allocate_gbm2, sample_script, task_category
from gbmsched.mechanism import allocation_probabilities
from gbmsched.oracle import exact_expected_makespan, opt_makespan

# %% An instance with one task of each flavour
times = np.array([
    [1.0, 3.0, 1.0, 2.0, 1.3],
    [5.0, 1.0, 1.3, 2.0, 1.0],
])
print("alpha, beta, r =", P.as_tuple())
for j in range(times.shape[1]):
    cat = task_category(times[0, j], times[1, j], P)
    print(f"task {j}: {times[:, j]}  category {cat.kind}, faster machine {cat.efficient_machine}")

# %% Probability that machine 0 gets each task
print("P(machine 0):", allocation_probabilities(times[0], times[1], P))

# %% Fix the random bits and look at who wins and what they are paid
script = sample_script(P, times.shape[1], seed=3)
out = allocate_gbm2(times, script)
print("script     :", np.round(script, 4))
print("allocation :", out.allocation)
print("task pay   :", np.round(out.task_payments, 4))
print("payments   :", np.round(out.payments, 4))

# %% Expected makespan against the optimum
expected = exact_expected_makespan(times, P)
opt, witness = opt_makespan(times)
print(f"E[makespan] = {expected:.4f}, OPT = {opt:.4f} via {witness}, ratio = {expected / opt:.4f}")
