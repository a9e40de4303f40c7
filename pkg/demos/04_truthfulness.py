"""Try to gain by lying, and fail."""

import numpy as np

from gbmsched import PAPER_PARAMS as P
from gbmsched.mechanism import sample_script
from gbmsched.truthcheck import (
    DeviationSpec,
    check_expected_truthfulness,
    check_universal_truthfulness,
    truthfulness_harness,
)

times = np.array([[1.0, 2.0, 0.5], [1.3, 1.0, 4.0]])
script = sample_script(P, 3, seed=1)

# %% A handful of hand-picked lies by machine 0
spec = DeviationSpec(scale_factors=(0.5, 0.9, 1.1, 2.0), per_task_offsets=(0.7, 1.4))
for rep in check_universal_truthfulness(times, script, spec):
    if rep.agent == 0:
        print(f"report {np.round(rep.misreport, 3)}  gain {rep.gain:+.4f}")

# %% The same lies judged in expectation over the random bits
gains = [r.gain for r in check_expected_truthfulness(times, P, spec)]
print("largest expected gain:", max(gains))

# %% A randomized sweep with threshold-hugging lies
summary = truthfulness_harness(P, 100, seed=0)
print(f"{summary.deviations} deviations, max gain {summary.max_gain:.2e}, {len(summary.violations)} violations")
