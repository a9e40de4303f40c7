"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary.
"""

import time

import numpy as np

from gbmsched.analysis import (
    PAIR_BOUNDS,
    ReducedInstance,
    bound_values,
    bounds_eval,
    check_merge_monotonicity,
    coefficient_vector,
    normalized_terms,
    optimize_params,
    random_reduced,
    ratio_search,
    reduced_expected_makespan,
    reduced_to_instance,
)
from gbmsched.core import PAPER_PARAMS, Instance, nr_baseline_params
from gbmsched.mechanism import allocate_gbm2, allocate_mgbm, allocation_probabilities, draw_scripts
from gbmsched.oracle import (
    exact_expected_makespan,
    monte_carlo_expected_makespan,
    monte_carlo_mgbm_makespan,
    opt_makespan,
)
from gbmsched.truthcheck import truthfulness_harness

P = PAPER_PARAMS


def exact_ratio(t):
    return exact_expected_makespan(t, P) / opt_makespan(t)[0]


def test_bound_reproduction(acceptance):
    rep = bounds_eval(P)
    times = []
    for _ in range(200):
        start = time.perf_counter()
        bounds_eval(P)
        times.append(time.perf_counter() - start)
    ms = 1e3 * float(np.median(times))
    ok = abs(rep.max - 1.6737) <= 5e-4 and ms < 1.0
    acceptance("1 bound reproduction", ok, f"max={rep.max:.7f} binding={list(rep.binding)} median {ms:.3f} ms")


def test_parameter_recovery(acceptance):
    start = time.perf_counter()
    params, objective = optimize_params()
    secs = time.perf_counter() - start
    dist = max(abs(x - y) for x, y in zip(params.as_tuple(), P.as_tuple()))
    ok = objective <= 1.6738 and dist <= 0.01 and secs < 60
    acceptance("2 parameter recovery", ok, f"{params.as_tuple()} objective={objective:.7f} in {secs:.1f} s")


def test_baseline_recovery(acceptance):
    nr = nr_baseline_params()
    b1 = float(bound_values(nr.alpha, nr.beta, nr.r)[0])
    worst = ratio_search(nr, 10, seed=0, max_tasks=10)
    ok = b1 == 1.75 and 1.749 <= worst.ratio <= 1.75 + 1e-6 and worst.instance.n <= 10
    acceptance("3 baseline recovery", ok, f"B1={b1!r} search ratio={worst.ratio:.8f} (n={worst.instance.n})")


def test_worst_case_witness(acceptance):
    a, eps = P.alpha, 1e-6
    start = time.perf_counter()
    ratio = exact_ratio(Instance([[a, 1.0], [a * (a + eps), a + eps]]))
    secs = time.perf_counter() - start
    target = 1 + 1 / a
    ok = abs(ratio - target) <= 1e-4 and secs < 1
    acceptance("4 worst-case witness", ok, f"ratio={ratio:.7f} vs 1+1/alpha={target:.7f} in {1e3 * secs:.1f} ms")


def _random_instance(rng):
    n = int(rng.integers(1, 11))
    kind = rng.integers(3)
    if kind == 0:
        return 10.0 ** rng.uniform(-2, 2, size=(2, n))
    t1 = 10.0 ** rng.uniform(-1, 1, size=n)
    if kind == 1:
        # ratios sitting on or right next to the script thresholds
        s = P.script_values[rng.integers(4, size=n)]
        t0 = t1 * s * (1 + rng.choice([-1e-9, 0.0, 1e-9], size=n))
    else:
        t0 = t1 * np.exp(rng.uniform(-np.log(2), np.log(2), size=n))
    return np.vstack([t0, t1])


def test_ratio_ceiling(acceptance):
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    worst = max(exact_ratio(_random_instance(rng)) for _ in range(10_000))
    secs = time.perf_counter() - start
    ok = worst <= 1.6738 and secs < 300
    acceptance("5 ratio ceiling", ok, f"worst of 10000 = {worst:.7f} in {secs:.1f} s")


def test_universal_truthfulness(acceptance):
    summary = truthfulness_harness(P, 1000, seed=6, scripts=4)
    ok = summary.ok and summary.min_deviations_per_agent >= 50 and summary.max_gain <= 1e-9
    acceptance(
        "6 universal truthfulness",
        ok,
        f"{summary.instances} instances x {summary.scripts_per_instance} scripts, "
        f"{summary.deviations} deviations (>= {summary.min_deviations_per_agent} per agent), "
        f"max gain {summary.max_gain:.2e}, {len(summary.violations)} violations",
    )


def test_coefficient_identity(acceptance):
    rng = np.random.default_rng(7)
    bounds = [(x, y, fn(P)) for x, y, _, fn in PAIR_BOUNDS]
    worst_identity = worst_mechanism = worst_slack = -np.inf
    done = 0
    while done < 1000:
        red = random_reduced(rng, zero_prob=rng.uniform(0.0, 0.8))
        if not red.as_array().any():
            continue
        cv = coefficient_vector(red, P)
        # limiting-probability expectation, and the real mechanism on a nudged instance
        worst_identity = max(worst_identity, abs(cv.dot(red) - reduced_expected_makespan(red, P)))
        inst = reduced_to_instance(red, P, nudge=1e-13)
        worst_mechanism = max(worst_mechanism, abs(cv.dot(red) - exact_expected_makespan(inst, P)))
        terms = normalized_terms(cv, P)
        worst_slack = max(worst_slack, max(terms[x] + terms[y] - b for x, y, b in bounds))
        done += 1
    ok = worst_identity <= 1e-9 and worst_mechanism <= 1e-9 and worst_slack <= 1e-9
    acceptance(
        "7 coefficient identity",
        ok,
        f"{done} instances, identity err {worst_identity:.1e}, vs mechanism {worst_mechanism:.1e}, "
        f"max pairwise slack {worst_slack:.1e}",
    )


CATEGORY_RATIOS = {
    "h": lambda rng: P.alpha * 10.0 ** rng.uniform(1e-3, 1),
    "m": lambda rng: np.exp(rng.uniform(np.log(P.beta) + 1e-6, np.log(P.alpha) - 1e-6)),
    "l": lambda rng: np.exp(rng.uniform(0, np.log(P.beta) - 1e-6)),
}


def test_merge_monotonicity(acceptance):
    rng = np.random.default_rng(8)
    worst = np.inf
    counts = dict.fromkeys(CATEGORY_RATIOS, 0)
    for k in range(1200):
        cat = "hml"[k % 3]
        q = CATEGORY_RATIOS[cat](rng)
        if rng.random() < 0.5:
            q = 1 / q
        w = 10.0 ** rng.uniform(-1, 1, size=2)
        pair = np.array([[q * w[0], q * w[1]], [w[0], w[1]]])
        extra = 10.0 ** rng.uniform(-1, 1, size=(2, int(rng.integers(0, 5))))
        t = np.hstack([pair, extra])
        perm = rng.permutation(t.shape[1])
        t = t[:, perm]
        j1, j2 = (int(np.flatnonzero(perm == j)[0]) for j in (0, 1))
        rep = check_merge_monotonicity(t, j1, j2, P)
        worst = min(worst, rep.merged_expected - rep.split_expected)
        counts[cat] += 1
    ok = worst >= -1e-9
    acceptance("8 merge monotonicity", ok, f"{sum(counts.values())} pairs {counts}, min(merged - split) = {worst:.3e}")


def test_mgbm_sanity(acceptance):
    rng = np.random.default_rng(9)
    worst_margin = -np.inf
    cases = 0
    for m in (3, 4, 5):
        for _ in range(334):
            t = 10.0 ** rng.uniform(-1, 1, size=(m, int(rng.integers(1, 9))))
            mean, se = monte_carlo_mgbm_makespan(t, P, 10_000, seed=int(rng.integers(2**31)))
            opt = opt_makespan(t)[0]
            worst_margin = max(worst_margin, mean / opt - (0.8368 * m + 3 * se / opt))
            cases += 1
    # m = 2: same scripts give the same allocation, and sampled frequencies match
    same = True
    worst_z = 0.0
    draws = 2000
    for _ in range(20):
        t = 10.0 ** rng.uniform(-0.3, 0.3, size=(2, 4))
        s = draw_scripts(P, 4, rng)
        same &= np.array_equal(allocate_mgbm(t, P, script=s).allocation, allocate_gbm2(t, s).allocation)
        p0 = allocation_probabilities(t[0], t[1], P)
        scripts = draw_scripts(P, (draws, 4), rng)
        freq = np.mean([allocate_mgbm(t, P, script=row).allocation == 0 for row in scripts], axis=0)
        se = np.sqrt(np.maximum(p0 * (1 - p0), 1e-12) / draws)
        worst_z = max(worst_z, float(np.max(np.abs(freq - p0) / se)))
    ok = worst_margin <= 0 and same and worst_z <= 5
    acceptance(
        "9 m-GBM sanity",
        ok,
        f"{cases} instances, max(ratio - 0.8368m - 3se) = {worst_margin:.3f}; "
        f"m=2 identical allocations={same}, max |z| = {worst_z:.2f}",
    )


def test_oracle_cross_check(acceptance):
    rng = np.random.default_rng(10)
    worst = 0.0
    for k in range(100):
        n = int(rng.integers(1, 13))
        t = 10.0 ** rng.uniform(-0.5, 0.5, size=(2, n))
        exact = exact_expected_makespan(t, P)
        mean, se = monte_carlo_expected_makespan(t, P, 10_000, seed=k)
        diff = abs(mean - exact)
        z = 0.0 if diff <= 1e-12 else (np.inf if se == 0 else diff / se)
        worst = max(worst, z)
    ok = worst <= 5
    acceptance("10 oracle cross-check", ok, f"100 instances, max |MC - exact| / se = {worst:.2f}")
