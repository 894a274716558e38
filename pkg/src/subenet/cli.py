"""Command-line interface.

Verbs:

* ``solve``      full-data smooth elastic-net fit
* ``subsample``  one sketch-and-solve run under a chosen plan
* ``twostep``    pilot + optimal-plan estimator
* ``cv``         cross-validated penalty selection
* ``simulate``   write a synthetic dataset as CSV
* ``bench``      repeated-run benchmark with CSV/JSON reports
* ``sweep``      pilot/final budget split study

Exit codes: 0 success, 1 usage error, 2 bad or unreadable data,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .algorithms import TwoStepConfig, full_reference, run_algorithm1, run_two_step
from .data_io import load_csv, save_csv
from .errors import CsvFormatError, InvalidArgumentError, NumericalError
from .experiments import (
    DEFAULT_PROPORTIONS,
    ExperimentConfig,
    run_experiment,
    run_proportion_sweep,
)
from .model import HyperParams
from .newton import NewtonConfig
from .sampling import blev_ssp, posp_ssp, uniform_ssp
from .simulate import CaseId, SimulationCase, generate
from .tuning import CVConfig, cross_validate


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); we reserve 2 for data errors
        raise _UsageError(message)


def _add_source_args(p: argparse.ArgumentParser):
    p.add_argument("--case", choices=[c.value for c in CaseId], help="synthetic case id")
    p.add_argument("--n", type=int, default=10000, help="rows for a synthetic case")
    p.add_argument("--p", type=int, default=50, help="covariates for a synthetic case")
    p.add_argument("--sigma", type=float, default=3.0, help="noise level for a synthetic case")
    p.add_argument("--exp-rate", type=float, default=2.0,
                   help="case3 exponential rate (mean is 1/rate)")
    p.add_argument("--csv", help="CSV file to load instead of simulating")
    p.add_argument("--target", default="y", help="response column name in CSV files")
    p.add_argument("--add-intercept", action="store_true",
                   help="append an all-ones covariate column at ingestion")
    p.add_argument("--standardize", action="store_true",
                   help="center and scale covariate columns at ingestion")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def _add_hp_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--lambda", dest="lam", type=float, required=required,
                   help="penalty strength")
    p.add_argument("--eta", type=float, required=required, help="l1/l2 mix in (0, 1)")
    p.add_argument("--alpha", type=float, default=10.0, help="smoothing sharpness")


def _add_newton_args(p: argparse.ArgumentParser):
    p.add_argument("--grad-tol", type=float, default=None,
                   help="absolute gradient threshold (default: 1e-8 scaled by the initial gradient)")
    p.add_argument("--step-tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--no-damping", action="store_true", help="pure Newton steps")


def _newton_cfg(args) -> NewtonConfig:
    return NewtonConfig(
        grad_tol=args.grad_tol,
        step_tol=args.step_tol,
        max_iter=args.max_iter,
        damping="none" if args.no_damping else "backtracking",
    )


def _case_from_args(args) -> SimulationCase:
    return SimulationCase(
        case_id=args.case,
        n=args.n,
        p=args.p,
        sigma=args.sigma,
        seed=args.seed,
        exp_rate=args.exp_rate,
    )


def _dataset_from_args(args):
    if args.csv is not None:
        return load_csv(
            args.csv,
            target=args.target,
            add_intercept=args.add_intercept,
            standardize=args.standardize,
        )
    if args.case is None:
        raise _UsageError("either --csv or --case is required")
    return generate(_case_from_args(args))


def _emit(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _report_payload(report) -> dict:
    return {
        "beta": [float(v) for v in report.beta],
        "role": report.coef.role.value,
        "iterations": report.iterations,
        "converged": report.converged,
        "final_grad_norm": report.final_grad_norm,
        "grad_tol": report.grad_tol,
    }


def _cmd_solve(args) -> int:
    data = _dataset_from_args(args)
    hp = HyperParams(lam=args.lam, eta=args.eta, alpha=args.alpha)
    report = full_reference(data, hp, _newton_cfg(args))
    _emit(_report_payload(report), args.out)
    return 0


def _cmd_subsample(args) -> int:
    data = _dataset_from_args(args)
    hp = HyperParams(lam=args.lam, eta=args.eta, alpha=args.alpha)
    newton = _newton_cfg(args)
    if args.method == "uniform":
        plan = uniform_ssp(data.n)
    elif args.method == "blev":
        plan = blev_ssp(data)
    else:
        # the optimal plan is defined at the full-data optimum; solve for it first
        ref = full_reference(data, hp, newton)
        plan = posp_ssp(data, ref.beta, hp, mix_gamma=args.mix_gamma)
    report = run_algorithm1(data, plan, args.c, hp, newton, args.seed)
    payload = _report_payload(report)
    payload["method"] = args.method
    payload["c"] = args.c
    _emit(payload, args.out)
    return 0


def _cmd_twostep(args) -> int:
    data = _dataset_from_args(args)
    hp = HyperParams(lam=args.lam, eta=args.eta, alpha=args.alpha)
    result = run_two_step(
        data,
        hp,
        TwoStepConfig(
            c0=args.c0,
            c=args.c,
            newton=_newton_cfg(args),
            seed=args.seed,
            mix_gamma=args.mix_gamma,
        ),
    )
    payload = {
        "pilot": _report_payload(result.pilot_report),
        "final": _report_payload(result.final_report),
        "c0": args.c0,
        "c": args.c,
    }
    _emit(payload, args.out)
    return 0


def _cmd_cv(args) -> int:
    data = _dataset_from_args(args)
    cfg = CVConfig(
        k=args.k,
        lambda_grid=tuple(args.lambda_grid) if args.lambda_grid else CVConfig().lambda_grid,
        eta_grid=tuple(args.eta_grid) if args.eta_grid else CVConfig().eta_grid,
        cv_sample_size=min(args.cv_sample_size, data.n),
        alpha=args.alpha,
        seed=args.seed,
    )
    hp, table = cross_validate(data, cfg, _newton_cfg(args))
    payload = {
        "selected": {"lambda": hp.lam, "eta": hp.eta, "alpha": hp.alpha},
        "table": [{"lambda": s.lam, "eta": s.eta, "mean_mse": s.mean_mse} for s in table],
    }
    _emit(payload, args.out)
    return 0


def _cmd_simulate(args) -> int:
    if args.case is None:
        raise _UsageError("simulate requires --case")
    data = generate(_case_from_args(args))
    save_csv(data, args.out, target=args.target)
    print(f"wrote {data.n} rows x {data.p + 1} columns to {args.out}")
    return 0


def _experiment_config(args) -> ExperimentConfig:
    if args.csv is not None:
        source = args.csv
    elif args.case is not None:
        source = _case_from_args(args)
    else:
        raise _UsageError("either --csv or --case is required")
    hp = None
    if args.lam is not None or args.eta is not None:
        if args.lam is None or args.eta is None:
            raise _UsageError("--lambda and --eta must be given together (or neither, for CV)")
        hp = HyperParams(lam=args.lam, eta=args.eta, alpha=args.alpha)
    return ExperimentConfig(
        source=source,
        methods=tuple(args.method.split(",")) if args.method else ("uniform", "posp"),
        c_grid=tuple(args.c) if args.c else (1000,),
        c0=args.c0,
        repeats=args.repeats,
        hp=hp,
        seed=args.seed,
        threads=args.threads,
        test_size=args.test_size,
        test_csv=args.test_csv,
        target=args.target,
        add_intercept=args.add_intercept,
        standardize=args.standardize,
        mix_gamma=args.mix_gamma,
        newton=_newton_cfg(args),
        hit_k=args.hit_k,
        group_column=args.group_column,
    )


def _cmd_bench(args) -> int:
    report = run_experiment(
        _experiment_config(args), out=args.out, include_timing=not args.no_timing
    )
    if not args.out:
        print(report.to_csv_text(include_timing=not args.no_timing), end="")
    else:
        print(f"wrote {args.out}.csv and {args.out}.json ({len(report.rows)} rows)")
    return 0


def _cmd_sweep(args) -> int:
    proportions = tuple(args.proportions) if args.proportions else DEFAULT_PROPORTIONS
    report = run_proportion_sweep(
        _experiment_config(args),
        budget=args.budget,
        proportions=proportions,
        out=args.out,
        include_timing=not args.no_timing,
    )
    if not args.out:
        print(report.to_csv_text(include_timing=not args.no_timing), end="")
    else:
        print(f"wrote {args.out}.csv and {args.out}.json ({len(report.rows)} rows)")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="subenet", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", help="full-data smooth elastic-net fit")
    _add_source_args(p)
    _add_hp_args(p)
    _add_newton_args(p)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("subsample", help="single sketch-and-solve run")
    _add_source_args(p)
    _add_hp_args(p)
    _add_newton_args(p)
    p.add_argument("--method", choices=["uniform", "blev", "posp"], default="uniform")
    p.add_argument("--c", type=int, required=True, help="subsample size")
    p.add_argument("--mix-gamma", type=float, default=0.0,
                   help="uniform mixing weight for the optimal plan")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_subsample)

    p = sub.add_parser("twostep", help="pilot + optimal-plan estimator")
    _add_source_args(p)
    _add_hp_args(p)
    _add_newton_args(p)
    p.add_argument("--c0", type=int, required=True, help="pilot subsample size")
    p.add_argument("--c", type=int, required=True, help="final subsample size")
    p.add_argument("--mix-gamma", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_twostep)

    p = sub.add_parser("cv", help="cross-validated penalty selection")
    _add_source_args(p)
    _add_newton_args(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--cv-sample-size", type=int, default=500)
    p.add_argument("--lambda-grid", type=float, nargs="+", default=None)
    p.add_argument("--eta-grid", type=float, nargs="+", default=None)
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("simulate", help="write a synthetic dataset as CSV")
    _add_source_args(p)
    p.add_argument("--out", required=True, help="CSV path to write")
    p.set_defaults(func=_cmd_simulate)

    for verb, helptext, fn in (
        ("bench", "repeated-run benchmark", _cmd_bench),
        ("sweep", "pilot/final budget split study", _cmd_sweep),
    ):
        p = sub.add_parser(verb, help=helptext)
        _add_source_args(p)
        _add_hp_args(p, required=False)
        _add_newton_args(p)
        p.add_argument("--method", default=None,
                       help="comma-separated subset of uniform,blev,posp")
        p.add_argument("--c", type=int, nargs="+", default=None,
                       help="final-stage subsample sizes to benchmark")
        p.add_argument("--c0", type=int, default=1000)
        p.add_argument("--repeats", type=int, default=100)
        p.add_argument("--threads", type=int, default=max(1, os.cpu_count() or 1))
        p.add_argument("--test-size", type=int, default=1000)
        p.add_argument("--test-csv", default=None)
        p.add_argument("--hit-k", type=int, default=None)
        p.add_argument("--group-column", default=None)
        p.add_argument("--mix-gamma", type=float, default=0.0)
        p.add_argument("--no-timing", action="store_true",
                       help="omit wall-clock columns for bit-reproducible outputs")
        p.add_argument("--out", help="output base path; writes <out>.csv and <out>.json")
        if verb == "sweep":
            p.add_argument("--budget", type=int, required=True,
                           help="total draws split between pilot and final stage")
            p.add_argument("--proportions", type=float, nargs="+", default=None)
        p.set_defaults(func=fn)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (CsvFormatError, InvalidArgumentError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
