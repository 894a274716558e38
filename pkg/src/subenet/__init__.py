"""Randomized subsampling for large-scale smooth elastic-net regression.

The package fits the elastic net with a twice-differentiable l1
surrogate by Newton's method, draws weighted row subsamples under
uniform, leverage or residual-norm optimal plans, and provides the
asymptotic variance machinery, synthetic benchmarks, cross-validation
and an experiment harness around them.
"""

from ._seeds import derive_seed, make_rng
from .algorithms import TwoStepConfig, TwoStepResult, full_reference, run_algorithm1, run_two_step
from .asymptotics import (
    AsymptoticDiagnostics,
    compute_c_osa,
    compute_mx,
    compute_v,
    compute_v0,
    compute_v0_posp,
    sandwich_variance,
    standardize_errors,
)
from .data_io import load_csv, load_grouped_csv, save_csv
from .errors import (
    CsvFormatError,
    DegeneratePlanError,
    InvalidArgumentError,
    NumericalError,
    PilotFailureError,
    SubenetError,
)
from .experiments import (
    DEFAULT_PROPORTIONS,
    ExperimentConfig,
    MetricReport,
    MetricRow,
    run_experiment,
    run_proportion_sweep,
)
from .metrics import metric_hit_k, metric_mae, metric_mse, metric_re
from .model import (
    CoefRole,
    Coefficients,
    Dataset,
    HyperParams,
    SketchSample,
    gradient_smooth,
    hessian_smooth,
    loss_exact,
    loss_smooth,
    penalty_exact,
    penalty_gradient,
    penalty_hessian_diag,
    penalty_smooth,
    sketch_gradient,
    sketch_hessian,
    sketch_loss,
    smooth_abs,
    smooth_abs_grad,
    smooth_abs_hess,
    smooth_norm,
)
from .newton import NewtonConfig, NewtonReport, solve_full, solve_sketch
from .sampling import (
    OspCoefficients,
    PlanKind,
    SamplingPlan,
    blev_ssp,
    draw_with_replacement,
    osp_coefficients,
    posp_ssp,
    uniform_ssp,
)
from .simulate import CaseId, SimulationCase, generate, true_beta
from .tuning import CVConfig, CVScore, cross_validate, default_eta_grid, default_lambda_grid

__version__ = "0.1.0"
