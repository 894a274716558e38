"""K-fold cross-validation for the penalty weights.

Tuning runs on a uniformly drawn (without replacement) subset of the
training rows, defaulting to 500, so the grid search stays cheap even
when the dataset is large.  Each grid point is scored by the average
held-out unpenalized squared prediction error over the folds; exact
score ties are broken toward the larger lam, then the smaller eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._seeds import make_rng
from .errors import InvalidArgumentError
from .model import Dataset, HyperParams
from .newton import NewtonConfig, solve_full

__all__ = ["CVConfig", "CVScore", "default_lambda_grid", "default_eta_grid", "cross_validate"]


def default_lambda_grid() -> tuple[float, ...]:
    """exp(-3), exp(-2), ..., exp(10)."""
    return tuple(math.exp(k) for k in range(-3, 11))


def default_eta_grid() -> tuple[float, ...]:
    """0.1, 0.2, ..., 0.9."""
    return tuple(k / 10 for k in range(1, 10))


@dataclass(frozen=True)
class CVConfig:
    k: int = 5
    lambda_grid: tuple[float, ...] = field(default_factory=default_lambda_grid)
    eta_grid: tuple[float, ...] = field(default_factory=default_eta_grid)
    cv_sample_size: int = 500
    alpha: float = 10.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "eta_grid", tuple(float(v) for v in self.eta_grid))
        if self.k < 2:
            raise InvalidArgumentError(f"k must be at least 2, got {self.k}")
        if self.cv_sample_size < self.k:
            raise InvalidArgumentError(
                f"cv_sample_size={self.cv_sample_size} is smaller than k={self.k}"
            )
        if not self.lambda_grid or not self.eta_grid:
            raise InvalidArgumentError("lambda_grid and eta_grid must be non-empty")
        if any(v <= 0 for v in self.lambda_grid):
            raise InvalidArgumentError("lambda grid values must be positive")
        if any(not 0.0 < v < 1.0 for v in self.eta_grid):
            raise InvalidArgumentError("eta grid values must lie strictly in (0, 1)")
        if self.alpha <= 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class CVScore:
    lam: float
    eta: float
    mean_mse: float


def fold_assignments(n: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """A shuffled partition of range(n) into k near-equal folds."""
    if k < 2 or k > n:
        raise InvalidArgumentError(f"need 2 <= k <= n, got k={k}, n={n}")
    return list(np.array_split(rng.permutation(n), k))


def cross_validate(
    data: Dataset, cfg: CVConfig, newton: NewtonConfig | None = None
) -> tuple[HyperParams, list[CVScore]]:
    """Select (lam, eta) by K-fold CV on a drawn subset; alpha stays fixed.

    Returns the selected hyperparameters and the full score table, one
    row per grid point in (lam outer, eta inner) order.
    """
    if cfg.cv_sample_size > data.n:
        raise InvalidArgumentError(
            f"cv_sample_size={cfg.cv_sample_size} exceeds the {data.n} available rows"
        )
    rng = make_rng(cfg.seed)
    subset = rng.choice(data.n, size=cfg.cv_sample_size, replace=False)
    folds = fold_assignments(cfg.cv_sample_size, cfg.k, rng)

    x_sub = data.x[subset]
    y_sub = data.y[subset]
    splits = []
    for fold in folds:
        mask = np.ones(cfg.cv_sample_size, dtype=bool)
        mask[fold] = False
        splits.append(
            (Dataset(x=x_sub[mask], y=y_sub[mask]), x_sub[fold], y_sub[fold])
        )

    table: list[CVScore] = []
    for lam in cfg.lambda_grid:
        for eta in cfg.eta_grid:
            hp = HyperParams(lam=lam, eta=eta, alpha=cfg.alpha)
            fold_scores = []
            for train, x_val, y_val in splits:
                beta = solve_full(train, hp, cfg=newton).beta
                err = x_val @ beta - y_val
                fold_scores.append(float(err @ err) / x_val.shape[0])
            table.append(CVScore(lam=lam, eta=eta, mean_mse=math.fsum(fold_scores) / cfg.k))

    best = min(table, key=lambda s: (s.mean_mse, -s.lam, s.eta))
    return HyperParams(lam=best.lam, eta=best.eta, alpha=cfg.alpha), table
