"""Asymptotic variance of subsample estimators and normality diagnostics.

Conditional on the data, a weighted-subsample estimator drawn under a
plan pi is asymptotically normal around the full-data smooth optimum
beta_hat, with covariance V = M^{-1} V0 M^{-1} where

    M  = (1/N) * Hessian of the smooth criterion at the reference,
    V0 = 1/(C N^2) * [ sum_n (1/pi_n) r_n^2 x_n x_n^T
                       + c c^T + sum_n r_n (c x_n^T + x_n c^T) ],

with r_n the residuals and c the penalty gradient at the reference.  At
the exact optimum the first-order condition sum_n r_n x_n + c = 0 makes
V0 positive semidefinite.  ``compute_v0_posp`` evaluates the same matrix
with the optimal-plan probabilities substituted in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, NumericalError
from .model import Coefficients, Dataset, HyperParams, hessian_smooth, penalty_gradient

if TYPE_CHECKING:
    from .sampling import SamplingPlan

__all__ = [
    "AsymptoticDiagnostics",
    "compute_mx",
    "compute_c_osa",
    "compute_v0",
    "compute_v0_posp",
    "sandwich_variance",
    "compute_v",
    "standardize_errors",
]


@dataclass(frozen=True)
class AsymptoticDiagnostics:
    """Pieces of the sandwich variance: M, penalty gradient c, inner V0, V and its trace."""

    m_x: np.ndarray
    c_osa: np.ndarray
    v0: np.ndarray
    v: np.ndarray
    trace_v: float


def _ref_vector(beta_ref, p: int) -> np.ndarray:
    if isinstance(beta_ref, Coefficients):
        beta_ref = beta_ref.beta
    beta_ref = np.asarray(beta_ref, dtype=np.float64)
    if beta_ref.shape != (p,):
        raise InvalidArgumentError(f"beta_ref must have shape ({p},), got {beta_ref.shape}")
    if not np.isfinite(beta_ref).all():
        raise InvalidArgumentError("beta_ref contains non-finite entries")
    return beta_ref


def compute_mx(data: Dataset, beta_ref, hp: HyperParams) -> np.ndarray:
    """Smooth-criterion Hessian at the reference divided by the row count."""
    beta_ref = _ref_vector(beta_ref, data.p)
    return hessian_smooth(data, beta_ref, hp) / data.n


def compute_c_osa(beta_ref, hp: HyperParams) -> np.ndarray:
    """Penalty-gradient vector at the reference.

    At the smooth optimum this balances the data score exactly:
    sum_n r_n x_n + c = 0.
    """
    if isinstance(beta_ref, Coefficients):
        beta_ref = beta_ref.beta
    return penalty_gradient(np.asarray(beta_ref, dtype=np.float64), hp)


def _check_c(c: int) -> int:
    if c < 1:
        raise InvalidArgumentError(f"subsample size c must be at least 1, got {c}")
    return int(c)


def compute_v0(
    data: Dataset, plan: "SamplingPlan", beta_ref, hp: HyperParams, c: int
) -> np.ndarray:
    """Inner variance matrix V0 for an arbitrary plan.

    Rows with zero plan probability contribute nothing when their
    residual is exactly zero (the 0/0 convention); a zero-probability row
    with nonzero residual makes the variance undefined and raises.
    """
    c = _check_c(c)
    beta_ref = _ref_vector(beta_ref, data.p)
    if plan.n != data.n:
        raise InvalidArgumentError(f"plan covers {plan.n} rows but data has {data.n}")
    r = data.x @ beta_ref - data.y
    pi = plan.probs
    dead = pi <= 0.0
    if np.any(dead & (r != 0.0)):
        raise InvalidArgumentError(
            "plan assigns zero probability to a row with nonzero residual"
        )
    w = np.where(dead, 0.0, (r * r) / np.where(dead, 1.0, pi))
    first = (data.x * w[:, None]).T @ data.x
    cvec = compute_c_osa(beta_ref, hp)
    sx = data.x.T @ r
    cross = np.outer(cvec, sx) + np.outer(sx, cvec)
    v0 = (first + np.outer(cvec, cvec) + cross) / (c * data.n**2)
    return 0.5 * (v0 + v0.T)


def compute_v0_posp(data: Dataset, beta_ref, hp: HyperParams, c: int) -> np.ndarray:
    """V0 with the optimal-plan probabilities substituted in closed form.

    The plan-dependent sum collapses to
    (sum_n |r_n| ||M^{-1} x_n||) * sum_n (|r_n| / ||M^{-1} x_n||) x_n x_n^T.
    """
    from .sampling import _residual_norm_scores

    c = _check_c(c)
    beta_ref = _ref_vector(beta_ref, data.p)
    r, norms = _residual_norm_scores(data, beta_ref, hp)
    dead = norms <= 0.0
    if np.any(dead & (r != 0.0)):
        raise InvalidArgumentError(
            "a row with nonzero residual has a zero norm score; variance undefined"
        )
    total = float((np.abs(r) * norms).sum())
    w = np.where(dead, 0.0, np.abs(r) / np.where(dead, 1.0, norms))
    first = total * ((data.x * w[:, None]).T @ data.x)
    cvec = compute_c_osa(beta_ref, hp)
    sx = data.x.T @ r
    cross = np.outer(cvec, sx) + np.outer(sx, cvec)
    v0 = (first + np.outer(cvec, cvec) + cross) / (c * data.n**2)
    return 0.5 * (v0 + v0.T)


def sandwich_variance(m_x: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """M^{-1} V0 M^{-1} using Cholesky solves; M must be positive definite."""
    try:
        cf = scipy.linalg.cho_factor(m_x, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"M is not positive definite: {exc}") from exc
    half = scipy.linalg.cho_solve(cf, v0, check_finite=False)
    v = scipy.linalg.cho_solve(cf, half.T, check_finite=False).T
    return 0.5 * (v + v.T)


def compute_v(
    data: Dataset, plan: "SamplingPlan", beta_ref, hp: HyperParams, c: int
) -> AsymptoticDiagnostics:
    """Full sandwich variance for a plan, bundled with its ingredients."""
    beta_ref = _ref_vector(beta_ref, data.p)
    m_x = compute_mx(data, beta_ref, hp)
    c_osa = compute_c_osa(beta_ref, hp)
    v0 = compute_v0(data, plan, beta_ref, hp, c)
    v = sandwich_variance(m_x, v0)
    return AsymptoticDiagnostics(
        m_x=m_x, c_osa=c_osa, v0=v0, v=v, trace_v=float(np.trace(v))
    )


def standardize_errors(
    samples: Sequence[np.ndarray] | np.ndarray,
    beta_hat,
    v: np.ndarray | AsymptoticDiagnostics,
) -> np.ndarray:
    """Map estimator samples to V^{-1/2} (sample - beta_hat) rows.

    Under the asymptotic regime the rows are approximately standard
    normal vectors.  V is symmetrized and eigen-decomposed; negative
    eigenvalues are clipped at zero before inversion and an effectively
    singular V raises :class:`NumericalError`.
    """
    if isinstance(v, AsymptoticDiagnostics):
        v = v.v
    if isinstance(beta_hat, Coefficients):
        beta_hat = beta_hat.beta
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    mat = np.asarray(v, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] != beta_hat.shape[0]:
        raise InvalidArgumentError("v must be square and match beta_hat's length")
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != beta_hat.shape[0]:
        raise InvalidArgumentError("samples and beta_hat have mismatched lengths")

    sym = 0.5 * (mat + mat.T)
    evals, evecs = np.linalg.eigh(sym)
    evals = np.clip(evals, 0.0, None)
    if evals.max(initial=0.0) <= 0.0 or evals.min() <= evals.max() * 1e-14:
        raise NumericalError("V is singular; standardized errors are undefined")
    inv_sqrt = (evecs * (1.0 / np.sqrt(evals))) @ evecs.T
    return (arr - beta_hat) @ inv_sqrt.T
