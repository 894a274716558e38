"""Subsample estimators: single-plan solves and the two-step procedure.

The two-step estimator first solves a uniform pilot sketch of size c0,
builds the residual-norm optimal plan at the pilot coefficients, then
draws and solves a second sketch of size c under that plan, warm-started
at the pilot.  Only the second-stage sample enters the final solve.
Pilot and final draws use independent streams derived from one seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._seeds import derive_seed
from .errors import InvalidArgumentError, PilotFailureError
from .model import CoefRole, Dataset, HyperParams
from .newton import NewtonConfig, NewtonReport, solve_full, solve_sketch
from .sampling import SamplingPlan, draw_with_replacement, posp_ssp, uniform_ssp

__all__ = ["TwoStepConfig", "TwoStepResult", "run_algorithm1", "run_two_step", "full_reference"]

# labels for the two internal streams split off cfg.seed
_PILOT_STREAM = 1
_FINAL_STREAM = 2


@dataclass(frozen=True)
class TwoStepConfig:
    """Sizes, solver settings and seed for the two-step estimator."""

    c0: int
    c: int
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    seed: int = 0
    mix_gamma: float = 0.0

    def __post_init__(self):
        if self.c0 < 1 or self.c < 1:
            raise InvalidArgumentError(
                f"subsample sizes must be positive, got c0={self.c0}, c={self.c}"
            )


@dataclass(frozen=True)
class TwoStepResult:
    """Pilot and final solver reports plus the plan used for the final draw."""

    pilot_report: NewtonReport
    final_report: NewtonReport
    plan: SamplingPlan

    @property
    def beta_pilot(self) -> np.ndarray:
        return self.pilot_report.beta

    @property
    def beta_final(self) -> np.ndarray:
        return self.final_report.beta


def run_algorithm1(
    data: Dataset,
    plan: SamplingPlan,
    c: int,
    hp: HyperParams,
    cfg: NewtonConfig | None = None,
    seed: int = 0,
    init=None,
    role: CoefRole = CoefRole.SUBSAMPLE,
) -> NewtonReport:
    """Draw a sketch of size ``c`` under ``plan`` and solve it.

    Deterministic given (data, plan, c, seed); the report carries the
    weighted-sketch optimum.
    """
    sketch = draw_with_replacement(plan, data, c, seed)
    return solve_sketch(sketch, hp, init=init, cfg=cfg, role=role)


def run_two_step(data: Dataset, hp: HyperParams, cfg: TwoStepConfig) -> TwoStepResult:
    """Pilot solve, optimal plan at the pilot, then the final sketch solve."""
    pilot_seed = derive_seed(cfg.seed, _PILOT_STREAM)
    final_seed = derive_seed(cfg.seed, _FINAL_STREAM)

    pilot_report = run_algorithm1(
        data,
        uniform_ssp(data.n),
        cfg.c0,
        hp,
        cfg=cfg.newton,
        seed=pilot_seed,
        role=CoefRole.PILOT,
    )
    if not pilot_report.converged:
        raise PilotFailureError(
            f"pilot solve did not converge in {pilot_report.iterations} iterations "
            f"(final gradient norm {pilot_report.final_grad_norm:.3e})",
            report=pilot_report,
        )

    plan = posp_ssp(data, pilot_report.beta, hp, mix_gamma=cfg.mix_gamma)
    final_report = run_algorithm1(
        data,
        plan,
        cfg.c,
        hp,
        cfg=cfg.newton,
        seed=final_seed,
        init=pilot_report.beta,
        role=CoefRole.TWO_STEP,
    )
    return TwoStepResult(pilot_report=pilot_report, final_report=final_report, plan=plan)


def full_reference(
    data: Dataset, hp: HyperParams, cfg: NewtonConfig | None = None
) -> NewtonReport:
    """Full-data smooth optimum; the reference point subsample estimators target."""
    return solve_full(data, hp, cfg=cfg, role=CoefRole.FULL_SMOOTH)
