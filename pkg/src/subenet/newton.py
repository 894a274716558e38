"""Damped Newton solver for the smooth elastic-net criterion.

The data term of both the full and the sketch criterion is a fixed
quadratic in beta, so each solve precomputes its (weighted) Gram matrix
once; per-iteration work is then one Cholesky factorization of the p x p
Hessian plus O(p^2).  Building the Gram costs O(N p^2), giving
O(max(N, p) p^2) per solve up to the iteration count.

Backtracking (Armijo) damping is the default and guarantees monotone
descent; ``damping="none"`` takes unit steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, NumericalError
from .model import (
    CoefRole,
    Coefficients,
    Dataset,
    HyperParams,
    SketchSample,
    penalty_gradient,
    penalty_hessian_diag,
    penalty_smooth,
)

__all__ = ["NewtonConfig", "NewtonReport", "solve_full", "solve_sketch"]

_ARMIJO_C = 1e-4
_ARMIJO_SHRINK = 0.5
_MAX_BACKTRACKS = 100


@dataclass(frozen=True)
class NewtonConfig:
    """Stopping rules and damping mode.

    ``grad_tol=None`` resolves at solve time to ``1e-8 * (1 + ||g0||_inf)``
    where ``g0`` is the gradient at the initial point; pass an explicit
    value for an absolute threshold.  Iteration also stops when the step
    norm falls below ``step_tol``.
    """

    grad_tol: float | None = None
    step_tol: float = 1e-10
    max_iter: int = 100
    damping: str = "backtracking"

    def __post_init__(self):
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise InvalidArgumentError(f"grad_tol must be positive or None, got {self.grad_tol}")
        if not self.step_tol > 0:
            raise InvalidArgumentError(f"step_tol must be positive, got {self.step_tol}")
        if self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.damping not in ("backtracking", "none"):
            raise InvalidArgumentError(
                f"damping must be 'backtracking' or 'none', got {self.damping!r}"
            )


@dataclass(frozen=True)
class NewtonReport:
    """Solve outcome: coefficients, iteration count and the stopping state.

    ``grad_tol`` records the effective gradient threshold used, which
    matters when the config left it to the default rule.
    """

    coef: Coefficients
    iterations: int
    converged: bool
    final_grad_norm: float
    grad_tol: float

    @property
    def beta(self) -> np.ndarray:
        return self.coef.beta


@dataclass(frozen=True)
class _Quadratic:
    """Data term 1/2 b^T G b - l^T b + 1/2 c of the (possibly weighted) least squares part."""

    gram: np.ndarray
    lin: np.ndarray
    const: float

    @classmethod
    def from_dataset(cls, data: Dataset) -> "_Quadratic":
        return cls(gram=data.gram, lin=data.xty, const=data.yty)

    @classmethod
    def from_sketch(cls, sketch: SketchSample) -> "_Quadratic":
        w = sketch.weights
        return cls(
            gram=(sketch.x * w[:, None]).T @ sketch.x,
            lin=sketch.x.T @ (w * sketch.y),
            const=float(w @ (sketch.y * sketch.y)),
        )

    def loss(self, beta: np.ndarray, hp: HyperParams) -> float:
        return (
            0.5 * float(beta @ (self.gram @ beta))
            - float(self.lin @ beta)
            + 0.5 * self.const
            + penalty_smooth(beta, hp)
        )

    def gradient(self, beta: np.ndarray, hp: HyperParams) -> np.ndarray:
        return self.gram @ beta - self.lin + penalty_gradient(beta, hp)

    def hessian(self, beta: np.ndarray, hp: HyperParams) -> np.ndarray:
        h = np.array(self.gram, copy=True)
        h[np.diag_indices_from(h)] += penalty_hessian_diag(beta, hp)
        return h


def _newton_step(quad: _Quadratic, beta: np.ndarray, g: np.ndarray, hp: HyperParams) -> np.ndarray:
    h = quad.hessian(beta, hp)
    try:
        cf = scipy.linalg.cho_factor(h, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"Hessian factorization failed: {exc}") from exc
    return scipy.linalg.cho_solve(cf, -g, check_finite=False)


def _minimize(
    quad: _Quadratic,
    hp: HyperParams,
    init: np.ndarray,
    cfg: NewtonConfig,
    role: CoefRole,
) -> NewtonReport:
    beta = np.array(init, dtype=np.float64, copy=True)
    g = quad.gradient(beta, hp)
    grad_tol = cfg.grad_tol if cfg.grad_tol is not None else 1e-8 * (
        1.0 + float(np.abs(g).max())
    )

    iterations = 0
    converged = float(np.abs(g).max()) <= grad_tol
    while not converged and iterations < cfg.max_iter:
        direction = _newton_step(quad, beta, g, hp)
        t = 1.0
        if cfg.damping == "backtracking":
            f0 = quad.loss(beta, hp)
            slope = float(g @ direction)
            for _ in range(_MAX_BACKTRACKS):
                if quad.loss(beta + t * direction, hp) <= f0 + _ARMIJO_C * t * slope:
                    break
                t *= _ARMIJO_SHRINK
            else:
                raise NumericalError("backtracking line search failed to make progress")
        step = t * direction
        beta = beta + step
        g = quad.gradient(beta, hp)
        iterations += 1
        if float(np.abs(g).max()) <= grad_tol or float(np.linalg.norm(step)) <= cfg.step_tol:
            converged = True

    return NewtonReport(
        coef=Coefficients(beta=beta, role=role),
        iterations=iterations,
        converged=converged,
        final_grad_norm=float(np.abs(g).max()),
        grad_tol=float(grad_tol),
    )


def _resolve_init(init, p: int) -> np.ndarray:
    if init is None:
        return np.zeros(p)
    if isinstance(init, Coefficients):
        init = init.beta
    init = np.asarray(init, dtype=np.float64)
    if init.shape != (p,):
        raise InvalidArgumentError(f"init must have shape ({p},), got {init.shape}")
    if not np.isfinite(init).all():
        raise InvalidArgumentError("init contains non-finite entries")
    return init


def solve_full(
    data: Dataset,
    hp: HyperParams,
    init=None,
    cfg: NewtonConfig | None = None,
    role: CoefRole = CoefRole.FULL_SMOOTH,
) -> NewtonReport:
    """Minimize the smooth criterion on the full dataset.

    ``init`` defaults to the zero vector.  The report's role tag is
    ``full_smooth`` unless overridden.
    """
    cfg = cfg or NewtonConfig()
    return _minimize(
        _Quadratic.from_dataset(data), hp, _resolve_init(init, data.p), cfg, role
    )


def solve_sketch(
    sketch: SketchSample,
    hp: HyperParams,
    init=None,
    cfg: NewtonConfig | None = None,
    role: CoefRole = CoefRole.SUBSAMPLE,
) -> NewtonReport:
    """Minimize the inverse-probability weighted criterion on a drawn sketch."""
    cfg = cfg or NewtonConfig()
    return _minimize(
        _Quadratic.from_sketch(sketch), hp, _resolve_init(init, sketch.p), cfg, role
    )
