"""Benchmark harness: repeated subsample runs, metrics, CSV/JSON reports.

Every repeat gets its own seed derived from the master seed and the
(method, c0, c, repeat) labels, so results are independent of execution
order and thread count.  Aggregation runs over repeat index with
``math.fsum``, which makes full reports bit-reproducible for a fixed
master seed; only wall-clock timing columns vary between runs, and they
can be omitted with ``include_timing=False``.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ._seeds import derive_seed
from .algorithms import TwoStepConfig, full_reference, run_algorithm1, run_two_step
from .errors import InvalidArgumentError, NumericalError, SubenetError
from .data_io import load_csv, load_grouped_csv
from .metrics import metric_hit_k, metric_mae
from .model import Dataset, HyperParams
from .newton import NewtonConfig
from .sampling import SamplingPlan, blev_ssp, uniform_ssp
from .simulate import SimulationCase, generate
from .tuning import CVConfig, cross_validate

__all__ = [
    "ExperimentConfig",
    "MetricRow",
    "MetricReport",
    "run_experiment",
    "run_proportion_sweep",
    "DEFAULT_PROPORTIONS",
]

_METHOD_IDS = {"uniform": 1, "blev": 2, "posp": 3}

DEFAULT_PROPORTIONS = (0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18, 0.20, 0.30, 0.40, 0.50)

_SCHEMA_VERSION = 1

_BASE_COLUMNS = [
    "method",
    "c",
    "c0",
    "proportion",
    "repeats",
    "failures",
    "mse",
    "mse_sd",
    "re",
    "re_sd",
    "mae",
    "mae_sd",
    "hit_k",
    "hit_k_sd",
    "newton_steps_mean",
    "newton_steps_sd",
]
_TIMING_COLUMNS = ["wall_time_mean", "wall_time_sd"]


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run: data source, methods, sizes, penalty, seed.

    ``source`` is either a :class:`SimulationCase` or a CSV path.  With a
    simulation source the test set is a fresh draw of ``test_size`` rows
    from the same case; with a CSV source it is ``test_csv`` if given,
    otherwise the training rows themselves.  ``hp=None`` selects the
    penalty by cross-validation first (``cv`` settings, default grids).
    """

    source: SimulationCase | str | Path
    methods: tuple[str, ...] = ("uniform", "posp")
    c_grid: tuple[int, ...] = (1000,)
    c0: int = 1000
    repeats: int = 100
    hp: HyperParams | None = None
    cv: CVConfig | None = None
    seed: int = 0
    threads: int = 1
    test_size: int = 1000
    test_csv: str | None = None
    target: str = "y"
    add_intercept: bool = False
    standardize: bool = False
    mix_gamma: float = 0.0
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    hit_k: int | None = None
    group_column: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "c_grid", tuple(int(c) for c in self.c_grid))
        unknown = [m for m in self.methods if m not in _METHOD_IDS]
        if unknown or not self.methods:
            raise InvalidArgumentError(
                f"methods must be a non-empty subset of {sorted(_METHOD_IDS)}, got {self.methods}"
            )
        if not self.c_grid or any(c < 1 for c in self.c_grid):
            raise InvalidArgumentError(f"c_grid must hold positive sizes, got {self.c_grid}")
        if self.c0 < 1:
            raise InvalidArgumentError(f"c0 must be positive, got {self.c0}")
        if self.repeats < 1:
            raise InvalidArgumentError(f"repeats must be positive, got {self.repeats}")
        if self.threads < 1:
            raise InvalidArgumentError(f"threads must be positive, got {self.threads}")
        if self.test_size < 1:
            raise InvalidArgumentError(f"test_size must be positive, got {self.test_size}")
        if (self.hit_k is None) != (self.group_column is None):
            raise InvalidArgumentError("hit_k and group_column must be given together")


@dataclass(frozen=True)
class MetricRow:
    """Aggregated metrics for one (method, subsample size) cell."""

    method: str
    c: int
    c0: int | None
    proportion: float | None
    repeats: int
    failures: int
    mse: float | None
    mse_sd: float | None
    re: float | None
    re_sd: float | None
    mae: float | None
    mae_sd: float | None
    hit_k: float | None
    hit_k_sd: float | None
    newton_steps_mean: float | None
    newton_steps_sd: float | None
    wall_time_mean: float | None
    wall_time_sd: float | None

    def as_dict(self, include_timing: bool = True) -> dict:
        cols = _BASE_COLUMNS + (_TIMING_COLUMNS if include_timing else [])
        return {name: getattr(self, name) for name in cols}


@dataclass(frozen=True)
class MetricReport:
    """All rows of one experiment plus the canonical config and its hash."""

    rows: tuple[MetricRow, ...]
    config: dict
    config_hash: str
    schema_version: int = _SCHEMA_VERSION

    def to_csv_text(self, include_timing: bool = True) -> str:
        cols = _BASE_COLUMNS + (_TIMING_COLUMNS if include_timing else []) + ["config_hash"]
        lines = [",".join(cols)]
        for row in self.rows:
            rec = row.as_dict(include_timing)
            rec["config_hash"] = self.config_hash
            lines.append(",".join(_csv_cell(rec[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def to_json_text(self, include_timing: bool = True) -> str:
        payload = {
            "schema_version": self.schema_version,
            "config_hash": self.config_hash,
            "config": self.config,
            "rows": [row.as_dict(include_timing) for row in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, out_base: str | Path, include_timing: bool = True) -> tuple[Path, Path]:
        """Write ``<base>.csv`` and ``<base>.json``; returns the two paths."""
        base = Path(out_base)
        if base.suffix in (".csv", ".json"):
            base = base.with_suffix("")
        base.parent.mkdir(parents=True, exist_ok=True)
        csv_path = base.with_suffix(".csv")
        json_path = base.with_suffix(".json")
        csv_path.write_text(self.to_csv_text(include_timing), encoding="utf-8")
        json_path.write_text(self.to_json_text(include_timing), encoding="utf-8")
        return csv_path, json_path


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _canonical_config(cfg: ExperimentConfig, extra: dict | None = None) -> dict:
    """Config as plain JSON values; execution details (threads, output) excluded."""
    if isinstance(cfg.source, SimulationCase):
        source = {
            "kind": "simulation",
            "case": cfg.source.case_id.value,
            "n": cfg.source.n,
            "p": cfg.source.p,
            "sigma": cfg.source.sigma,
            "seed": cfg.source.seed,
            "exp_rate": cfg.source.exp_rate,
        }
        test = {"kind": "simulation", "size": cfg.test_size}
    else:
        source = {
            "kind": "csv",
            "path": str(cfg.source),
            "target": cfg.target,
            "add_intercept": cfg.add_intercept,
            "standardize": cfg.standardize,
        }
        test = (
            {"kind": "csv", "path": cfg.test_csv}
            if cfg.test_csv
            else {"kind": "train"}
        )
    out = {
        "source": source,
        "test": test,
        "methods": list(cfg.methods),
        "c_grid": list(cfg.c_grid),
        "c0": cfg.c0,
        "repeats": cfg.repeats,
        "hp": (
            {"lam": cfg.hp.lam, "eta": cfg.hp.eta, "alpha": cfg.hp.alpha}
            if cfg.hp is not None
            else "cv"
        ),
        "seed": cfg.seed,
        "mix_gamma": cfg.mix_gamma,
        "newton": {
            "grad_tol": cfg.newton.grad_tol,
            "step_tol": cfg.newton.step_tol,
            "max_iter": cfg.newton.max_iter,
            "damping": cfg.newton.damping,
        },
        "hit_k": cfg.hit_k,
        "group_column": cfg.group_column,
    }
    if extra:
        out.update(extra)
    return out


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _resolve_training(cfg: ExperimentConfig) -> Dataset:
    if isinstance(cfg.source, SimulationCase):
        return generate(cfg.source)
    return load_csv(
        cfg.source,
        target=cfg.target,
        add_intercept=cfg.add_intercept,
        standardize=cfg.standardize,
    )


_TEST_STREAM = 17  # fixed label for the simulated test-set draw


def _resolve_test(cfg: ExperimentConfig, train: Dataset):
    """Returns (test dataset, per-row group labels or None)."""
    if isinstance(cfg.source, SimulationCase):
        test_case = replace(
            cfg.source, n=cfg.test_size, seed=derive_seed(cfg.source.seed, _TEST_STREAM)
        )
        return generate(test_case), None
    if cfg.test_csv is None:
        return train, None
    if cfg.group_column is not None:
        return load_grouped_csv(
            cfg.test_csv,
            target=cfg.target,
            group_column=cfg.group_column,
            add_intercept=cfg.add_intercept,
            standardize=cfg.standardize,
        )
    return (
        load_csv(
            cfg.test_csv,
            target=cfg.target,
            add_intercept=cfg.add_intercept,
            standardize=cfg.standardize,
        ),
        None,
    )


@dataclass
class _RepeatOutcome:
    ok: bool
    sq_dist: float = math.nan
    ratio: float = math.nan
    mae: float = math.nan
    hit: float = math.nan
    steps: int = 0
    wall: float = 0.0


def _group_slices(labels: Sequence[str]) -> list[np.ndarray]:
    order: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        order.setdefault(lab, []).append(i)
    return [np.asarray(ix, dtype=np.int64) for ix in order.values()]


class _Bench:
    """Shared state for one experiment: data, reference solution, test set."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.train = _resolve_training(cfg)
        if cfg.hp is not None:
            self.hp = cfg.hp
            self.cv_table = None
        else:
            cv_cfg = cfg.cv if cfg.cv is not None else CVConfig(
                cv_sample_size=min(500, self.train.n), seed=derive_seed(cfg.seed, 11)
            )
            self.hp, self.cv_table = cross_validate(self.train, cv_cfg, cfg.newton)
        ref_report = full_reference(self.train, self.hp, cfg.newton)
        if not ref_report.converged:
            raise NumericalError(
                "full-data reference solve did not converge; aborting the experiment"
            )
        self.beta_ref = ref_report.beta
        self.test, group_labels = _resolve_test(cfg, self.train)
        self.groups = _group_slices(group_labels) if group_labels is not None else None
        base = self.test.x @ self.beta_ref - self.test.y
        self.test_denom = float(base @ base)
        self.plans: dict[str, SamplingPlan] = {}

    def plan_for(self, method: str) -> SamplingPlan:
        if method not in self.plans:
            if method == "uniform":
                self.plans[method] = uniform_ssp(self.train.n)
            elif method == "blev":
                self.plans[method] = blev_ssp(self.train)
            else:
                raise InvalidArgumentError(f"no static plan for method {method!r}")
        return self.plans[method]

    def run_repeat(self, method: str, c0: int | None, c: int, seed: int) -> _RepeatOutcome:
        t0 = time.perf_counter()
        try:
            if method == "posp":
                result = run_two_step(
                    self.train,
                    self.hp,
                    TwoStepConfig(
                        c0=c0,
                        c=c,
                        newton=self.cfg.newton,
                        seed=seed,
                        mix_gamma=self.cfg.mix_gamma,
                    ),
                )
                beta = result.beta_final
                steps = result.final_report.iterations
            else:
                report = run_algorithm1(
                    self.train, self.plan_for(method), c, self.hp, self.cfg.newton, seed
                )
                beta = report.beta
                steps = report.iterations
        except (SubenetError, np.linalg.LinAlgError):
            return _RepeatOutcome(ok=False, wall=time.perf_counter() - t0)
        wall = time.perf_counter() - t0

        diff = beta - self.beta_ref
        err = self.test.x @ beta - self.test.y
        out = _RepeatOutcome(
            ok=True,
            sq_dist=float(diff @ diff),
            ratio=float(err @ err) / self.test_denom - 1.0,
            mae=metric_mae(beta, self.test),
            steps=steps,
            wall=wall,
        )
        if self.groups is not None and self.cfg.hit_k is not None:
            pred = self.test.x @ beta
            out.hit = metric_hit_k(
                [pred[ix] for ix in self.groups],
                [self.test.y[ix] for ix in self.groups],
                self.cfg.hit_k,
            )
        return out

    def run_cell(
        self, method: str, c0: int | None, c: int, proportion: float | None = None
    ) -> MetricRow:
        cfg = self.cfg
        seeds = [
            derive_seed(cfg.seed, _METHOD_IDS[method], c0 if c0 is not None else 0, c, r)
            for r in range(cfg.repeats)
        ]
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                outcomes = list(
                    pool.map(lambda s: self.run_repeat(method, c0, c, s), seeds)
                )
        else:
            outcomes = [self.run_repeat(method, c0, c, s) for s in seeds]

        ok = [o for o in outcomes if o.ok]
        failures = cfg.repeats - len(ok)
        mse, mse_sd = _mean_sd([o.sq_dist for o in ok])
        re, re_sd = _mean_sd([o.ratio for o in ok])
        mae, mae_sd = _mean_sd([o.mae for o in ok])
        if self.groups is not None and cfg.hit_k is not None and ok:
            hit, hit_sd = _mean_sd([o.hit for o in ok])
        else:
            hit, hit_sd = None, None
        steps, steps_sd = _mean_sd([float(o.steps) for o in ok])
        wall, wall_sd = _mean_sd([o.wall for o in ok])
        return MetricRow(
            method=method,
            c=c,
            c0=c0,
            proportion=proportion,
            repeats=cfg.repeats,
            failures=failures,
            mse=mse,
            mse_sd=mse_sd,
            re=re,
            re_sd=re_sd,
            mae=mae,
            mae_sd=mae_sd,
            hit_k=hit,
            hit_k_sd=hit_sd,
            newton_steps_mean=steps,
            newton_steps_sd=steps_sd,
            wall_time_mean=wall,
            wall_time_sd=wall_sd,
        )


def _mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var)


def run_experiment(cfg: ExperimentConfig, out: str | Path | None = None,
                   include_timing: bool = True) -> MetricReport:
    """Run every (method, c) cell of the config and aggregate the metrics.

    Per-repeat failures are counted per cell, never fatal; only a failed
    full-data reference solve aborts.  When ``out`` is given the report
    is also written as ``<out>.csv`` and ``<out>.json``.
    """
    bench = _Bench(cfg)
    rows = []
    for method in cfg.methods:
        for c in cfg.c_grid:
            c0 = cfg.c0 if method == "posp" else None
            rows.append(bench.run_cell(method, c0, c))
    config = _canonical_config(
        cfg, extra={"selected_hp": {"lam": bench.hp.lam, "eta": bench.hp.eta, "alpha": bench.hp.alpha}}
    )
    report = MetricReport(
        rows=tuple(rows), config=config, config_hash=_config_hash(config)
    )
    if out is not None:
        report.write(out, include_timing)
    return report


def run_proportion_sweep(
    cfg: ExperimentConfig,
    budget: int,
    proportions: Sequence[float] = DEFAULT_PROPORTIONS,
    out: str | Path | None = None,
    include_timing: bool = True,
) -> MetricReport:
    """Split a fixed draw budget between pilot and final stage.

    For each proportion q, the two-step estimator runs with c0 =
    round(q * budget) and c = budget - c0.  A uniform baseline at the
    full budget is appended as the last row.  ``cfg.c_grid`` and
    ``cfg.c0`` are ignored here.
    """
    if budget < 2:
        raise InvalidArgumentError(f"budget must be at least 2, got {budget}")
    proportions = tuple(float(q) for q in proportions)
    if not proportions or any(not 0.0 < q < 1.0 for q in proportions):
        raise InvalidArgumentError("proportions must lie strictly in (0, 1)")
    bench = _Bench(cfg)
    rows = []
    for q in proportions:
        c0 = min(max(int(round(q * budget)), 1), budget - 1)
        rows.append(bench.run_cell("posp", c0, budget - c0, proportion=q))
    rows.append(bench.run_cell("uniform", None, budget, proportion=None))
    config = _canonical_config(
        cfg,
        extra={
            "sweep": {"budget": budget, "proportions": list(proportions)},
            "selected_hp": {"lam": bench.hp.lam, "eta": bench.hp.eta, "alpha": bench.hp.alpha},
        },
    )
    report = MetricReport(
        rows=tuple(rows), config=config, config_hash=_config_hash(config)
    )
    if out is not None:
        report.write(out, include_timing)
    return report
