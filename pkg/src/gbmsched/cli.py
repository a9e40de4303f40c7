"""Command-line experiment runner.

Machine and task indices are 1-based in every file and report this module
reads or writes; the library API underneath is 0-based.

Exit codes: 0 success, 1 usage/parse/validation error, 2 infeasible or
oversized request.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    GridSpec,
    bounds_eval,
    check_merge_monotonicity,
    optimize_params,
    ratio_search,
)
from .core import (
    EmptyFeasibleRegion,
    GBMError,
    InfeasibleParameters,
    Instance,
    PAPER_PARAMS,
    Parameters,
    TooLarge,
    nr_baseline_params,
)
from .mechanism import allocate_gbm2, allocate_mgbm, draw_scripts, mgbm_config, sample_script
from .oracle import EXACT_MAX_TASKS, machine_loads, ratio_report
from .truthcheck import (
    check_expected_truthfulness,
    check_universal_truthfulness,
    standard_deviations,
    truthfulness_harness,
)

PRESETS = {"paper": PAPER_PARAMS, "nisan-ronen": nr_baseline_params()}
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class InstanceFileError(GBMError):
    pass


def read_instance(path) -> Instance:
    """Load ``{"t": [[...], ...]}`` (one row per machine)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceFileError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFileError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or "t" not in doc:
        raise InstanceFileError(f'{path}: expected an object with key "t"')
    rows = doc["t"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InstanceFileError(f'{path}: "t" must be a list of rows')
    try:
        return Instance(rows)
    except GBMError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_instance(path, instance: Instance) -> None:
    Path(path).write_text(json.dumps({"t": instance.to_list()}) + "\n", encoding="utf-8")


def read_parameters(path) -> Parameters:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return Parameters(doc["alpha"], doc["beta"], doc["r"])


def _params(args) -> Parameters:
    given = [args.alpha, args.beta, args.r]
    if any(v is not None for v in given):
        if any(v is None for v in given):
            raise GBMError("--alpha, --beta and --r must be given together")
        return Parameters(*given)
    return PRESETS[args.preset]


def _params_dict(p: Parameters) -> dict:
    return {"alpha": p.alpha, "beta": p.beta, "r": p.r}


def _require_instance(args) -> Instance:
    if not args.instance:
        raise GBMError(f"{args.command} needs --instance PATH")
    return read_instance(args.instance)


def cmd_run(args) -> dict:
    inst = _require_instance(args)
    params = _params(args)
    out = {"command": "run", "params": _params_dict(params), "seed": args.seed, "m": inst.m, "n": inst.n}
    script = sample_script(params, inst.n, args.seed)
    if inst.m == 2:
        outcome = allocate_gbm2(inst, script)
        out["mechanism"] = "gbm"
    else:
        cfg = mgbm_config(inst.m)
        outcome = allocate_mgbm(inst, params, args.seed)
        out["mechanism"] = "m-gbm"
        out["partition"] = [[i + 1 for i in half if i < inst.m] for half in (cfg.s1, cfg.s2)]
        out["padded"] = cfg.pad_used
        if cfg.pad_used:
            out["note"] = f"odd machine count: padded with an infinite-time machine in half {2 if inst.m in cfg.s2 else 1}"
    loads = machine_loads(inst.times, outcome.allocation)
    out.update(
        script=script.tolist(),
        allocation=(outcome.allocation + 1).tolist(),
        loads=loads.tolist(),
        makespan=float(loads.max()) if inst.n else 0.0,
        payments=outcome.payments.tolist(),
    )
    return out


def cmd_ratio(args) -> dict:
    inst = _require_instance(args)
    params = _params(args)
    samples = args.samples
    if samples is None and (inst.m != 2 or inst.n > EXACT_MAX_TASKS):
        raise TooLarge(
            f"exact expectation covers 2 machines and at most {EXACT_MAX_TASKS} tasks; "
            "rerun with --samples N for a Monte Carlo estimate"
        )
    rep = ratio_report(inst, params, samples=samples, seed=args.seed)
    return {
        "command": "ratio",
        "params": _params_dict(params),
        "t_gbm": rep.t_gbm,
        "t_opt": rep.t_opt,
        "ratio": rep.ratio,
        "exact": rep.exact,
        "stderr": rep.stderr,
    }


def cmd_bounds(args) -> dict:
    params = _params(args)
    rep = bounds_eval(params)
    return {
        "command": "bounds",
        "params": _params_dict(params),
        "bounds": rep.as_dict(),
        "max": rep.max,
        "binding": list(rep.binding),
    }


def cmd_tune(args) -> dict:
    spec = GridSpec(step=args.step) if args.step else GridSpec()
    params, objective = optimize_params(spec)
    return {"command": "tune", "params": _params_dict(params), "objective": objective}


def cmd_truthful(args) -> dict:
    params = _params(args)
    if args.instance:
        inst = read_instance(args.instance)
        rng = np.random.default_rng(args.seed)
        spec = standard_deviations(inst, params)
        reports = []
        for _ in range(4):
            script = draw_scripts(params, inst.n, rng)
            reports += check_universal_truthfulness(inst, script, spec)
        expected = check_expected_truthfulness(inst, params, spec)
        gains = [r.gain for r in reports + expected]
        bad = sum(g > 1e-9 for g in gains)
        return {
            "command": "truthful",
            "instances": 1,
            "deviations": len(gains),
            "max_gain": max(gains),
            "violations": bad,
            "summary": f"{bad} violations",
        }
    trials = args.trials if args.trials is not None else 1000
    summary = truthfulness_harness(params, trials, seed=args.seed)
    return {
        "command": "truthful",
        "instances": summary.instances,
        "deviations": summary.deviations,
        "max_gain": summary.max_gain,
        "violations": len(summary.violations),
        "summary": f"{len(summary.violations)} violations",
    }


def cmd_ratio_search(args) -> dict:
    params = _params(args)
    trials = args.trials if args.trials is not None else 20
    rep = ratio_search(params, trials, seed=args.seed)
    return {
        "command": "ratio-search",
        "params": _params_dict(params),
        "ratio": rep.ratio,
        "t_gbm": rep.t_gbm,
        "t_opt": rep.t_opt,
        "instance": {"t": rep.instance.to_list()},
    }


def cmd_merge_check(args) -> dict:
    inst = _require_instance(args)
    params = _params(args)
    if not args.tasks:
        raise GBMError("merge-check needs --tasks J1 J2")
    j1, j2 = (j - 1 for j in args.tasks)
    rep = check_merge_monotonicity(inst, j1, j2, params)
    return {
        "command": "merge-check",
        "split_expected": rep.split_expected,
        "merged_expected": rep.merged_expected,
        "split_opt": rep.split_opt,
        "merged_opt": rep.merged_opt,
        "monotone": rep.ok,
    }


COMMANDS = {
    "run": cmd_run,
    "ratio": cmd_ratio,
    "bounds": cmd_bounds,
    "tune": cmd_tune,
    "truthful": cmd_truthful,
    "ratio-search": cmd_ratio_search,
    "merge-check": cmd_merge_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gbmsched", description="Randomly biased truthful scheduling on unrelated machines.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--instance", metavar="PATH")
    parser.add_argument("--preset", choices=sorted(PRESETS), default="paper")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--r", type=float)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--tasks", type=int, nargs=2, metavar=("J1", "J2"))
    parser.add_argument("--step", type=float, help="coarse grid step for tune")
    parser.add_argument("--format", choices=("json", "table"), default="json")
    parser.add_argument("--out", metavar="PATH")
    return parser


def _table_value(v):
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_table_value(x)}" for k, x in v.items())
    if isinstance(v, list):
        return "[" + ", ".join(_table_value(x) for x in v) + "]"
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2)
    width = max(len(k) for k in report)
    return "\n".join(f"{k:<{width}}  {_table_value(v)}" for k, v in report.items())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except (TooLarge, InfeasibleParameters, EmptyFeasibleRegion) as exc:
        print(f"gbmsched: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GBMError, IndexError) as exc:
        print(f"gbmsched: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, args.format) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
