"""The nine case bounds, and the grid search that balances them."""

import time

import numpy as np

from gbmsched import PAPER_PARAMS as P
from gbmsched import bounds_eval, nr_baseline_params, optimize_params
from gbmsched.analysis import bound_values, feasible_mask

# %% Bounds at the tuned triple; three of them tie at the top
rep = bounds_eval(P)
for name, value in rep.as_dict().items():
    flag = "  <- binding" if name in rep.binding else ""
    print(f"{name} = {value:.6f}{flag}")

# %% The old 4/3 mechanism sits at 1.75
nr = nr_baseline_params()
print("B1 at", nr.as_tuple(), "=", bound_values(nr.alpha, nr.beta, nr.r)[0])

# %% Coarse-to-fine grid search for the minimax triple
start = time.perf_counter()
params, objective = optimize_params()
print(f"tuned {params.as_tuple()} -> max bound {objective:.7f} ({time.perf_counter() - start:.1f} s)")

# %% How the best objective moves with alpha alone
for a in np.arange(1.44, 1.53, 0.02):
    betas = np.linspace(1.0, a, 61)
    rs = np.linspace(0.5, 1.0, 101)
    B, R = np.meshgrid(betas, rs, indexing="ij")
    vals = bound_values(a, B, R).max(axis=0)
    vals[~feasible_mask(a, B, R)] = np.inf
    print(f"alpha={a:.2f}: best max bound {vals.min():.4f}")
