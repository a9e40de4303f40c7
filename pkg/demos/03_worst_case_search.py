"""Hunt for bad instances by local search, then look at the classic witness."""

from gbmsched import Instance
from gbmsched import PAPER_PARAMS as P
from gbmsched import nr_baseline_params, ratio_search
from gbmsched.oracle import exact_expected_makespan, opt_makespan

# %% Two tasks just inside the high-ratio region
a, eps = P.alpha, 1e-6
witness = Instance([[a, 1.0], [a * (a + eps), a + eps]])
ratio = exact_expected_makespan(witness, P) / opt_makespan(witness)[0]
print(f"witness ratio {ratio:.6f}   1 + 1/alpha = {1 + 1 / a:.6f}")

# %% Search from random starts at the tuned parameters
rep = ratio_search(P, 6, seed=0)
print(f"tuned: worst found {rep.ratio:.6f} on {rep.instance.n} tasks")
print(rep.instance.times)

# %% Same search at the 4/3 baseline climbs to 1.75
rep = ratio_search(nr_baseline_params(), 10, seed=0)
print(f"baseline: worst found {rep.ratio:.6f}")
