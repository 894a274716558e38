"""Data containers and the smooth elastic-net criterion.

The exact elastic-net objective for data (X, Y) with N rows is

    L(beta) = 1/2 ||Y - X beta||^2
              + lam * ((1 - eta)/2 * ||beta||_2^2 + eta * ||beta||_1).

The l1 term is replaced by a twice-differentiable surrogate built from

    sabs(x; alpha) = (1/alpha) * (log(1 + exp(-alpha x)) + log(1 + exp(alpha x)))

which satisfies |x| < sabs(x; alpha) <= |x| + 2 log(2)/alpha and converges
to |x| as alpha grows.  Summing over coordinates gives the smooth norm,
and the smooth criterion replaces ||beta||_1 with it.  With lam > 0 and
0 < eta < 1 the smooth criterion is strictly convex with a positive
definite Hessian, so Newton's method applies directly.

Subsample ("sketch") variants of the criterion reweight each drawn row by
the inverse of its sampling probability, so the random data term is an
unbiased estimate of the full one; the penalty is never reweighted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "Dataset",
    "HyperParams",
    "CoefRole",
    "Coefficients",
    "SketchSample",
    "smooth_abs",
    "smooth_abs_grad",
    "smooth_abs_hess",
    "smooth_norm",
    "penalty_exact",
    "penalty_smooth",
    "penalty_gradient",
    "penalty_hessian_diag",
    "loss_exact",
    "loss_smooth",
    "gradient_smooth",
    "hessian_smooth",
    "sketch_loss",
    "sketch_gradient",
    "sketch_hessian",
]


def _clean_matrix(a, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a 2-d array, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def _clean_vector(a, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a 1-d array, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Dense regression data: covariates ``x`` of shape (n, p) and response ``y`` of shape (n,).

    Arrays are copied to float64, validated to be finite, and frozen.
    The Gram matrix and related one-pass summaries are cached on first
    use so repeated solves and diagnostics on the same data reuse them.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _clean_matrix(self.x, "x")
        y = _clean_vector(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise InvalidArgumentError(
                f"x has {x.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidArgumentError("dataset must have at least one row and one column")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        """X^T X, computed once and cached."""
        g = self.x.T @ self.x
        g.setflags(write=False)
        return g

    @cached_property
    def xty(self) -> np.ndarray:
        v = self.x.T @ self.y
        v.setflags(write=False)
        return v

    @cached_property
    def yty(self) -> float:
        return float(self.y @ self.y)


@dataclass(frozen=True)
class HyperParams:
    """Penalty weights: overall strength ``lam`` > 0, mix ``eta`` in (0, 1), smoothing ``alpha`` > 0."""

    lam: float
    eta: float
    alpha: float = 10.0

    def __post_init__(self):
        for name in ("lam", "eta", "alpha"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise InvalidArgumentError(f"{name} must be finite, got {v}")
        if self.lam <= 0:
            raise InvalidArgumentError(f"lam must be positive, got {self.lam}")
        if not 0.0 < self.eta < 1.0:
            raise InvalidArgumentError(f"eta must lie strictly in (0, 1), got {self.eta}")
        if self.alpha <= 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")


class CoefRole(str, Enum):
    """Provenance tag for a coefficient vector."""

    TRUE = "true"
    FULL_SMOOTH = "full_smooth"
    FULL_EXACT = "full_exact"
    PILOT = "pilot"
    SUBSAMPLE = "subsample"
    TWO_STEP = "two_step"


@dataclass(frozen=True)
class Coefficients:
    """A coefficient vector with a role tag saying how it was obtained."""

    beta: np.ndarray
    role: CoefRole = CoefRole.SUBSAMPLE

    def __post_init__(self):
        beta = _clean_vector(self.beta, "beta")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "role", CoefRole(self.role))

    @property
    def p(self) -> int:
        return self.beta.shape[0]


@dataclass(frozen=True)
class SketchSample:
    """Rows drawn with replacement, with the probability each row had of being drawn.

    ``x[c]``, ``y[c]`` are verbatim copies of source row ``indices[c]``
    and ``probs[c]`` is that row's probability in the plan used for the
    draw.  ``weights`` are the 1/(C * prob) factors applied to the data
    term of the sketch criterion.
    """

    x: np.ndarray
    y: np.ndarray
    probs: np.ndarray
    indices: np.ndarray
    source_n: int

    def __post_init__(self):
        x = _clean_matrix(self.x, "x")
        y = _clean_vector(self.y, "y")
        probs = _clean_vector(self.probs, "probs")
        indices = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        c = x.shape[0]
        if c < 1:
            raise InvalidArgumentError("a sketch must contain at least one row")
        if y.shape[0] != c or probs.shape[0] != c or indices.shape[0] != c:
            raise InvalidArgumentError("x, y, probs and indices must have the same length")
        if np.any(probs <= 0):
            raise InvalidArgumentError("sketch probabilities must be strictly positive")
        if self.source_n < 1:
            raise InvalidArgumentError("source_n must be at least 1")
        if indices.min() < 0 or indices.max() >= self.source_n:
            raise InvalidArgumentError("sketch indices out of range for source_n")
        for arr in (x, y, probs, indices):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "indices", indices)

    @property
    def c(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @cached_property
    def weights(self) -> np.ndarray:
        w = 1.0 / (self.c * self.probs)
        w.setflags(write=False)
        return w


# ---------------------------------------------------------------------------
# scalar smooth-absolute family


def _check_alpha(alpha: float) -> float:
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidArgumentError(f"alpha must be a positive finite real, got {alpha}")
    return float(alpha)


def _as_float_array(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise InvalidArgumentError(f"{name} must be finite")
    return arr


def smooth_abs(x, alpha: float):
    """Smooth surrogate of ``|x|``.

    Evaluated in the overflow-safe form ``|x| + (2/alpha) * log1p(exp(-alpha |x|))``,
    which is exact in real arithmetic and never exponentiates a positive
    argument.  At 0 the value is ``2 log(2) / alpha``; as ``alpha * |x|``
    grows it approaches ``|x|`` from above.  Accepts scalars or arrays.
    """
    alpha = _check_alpha(alpha)
    arr = _as_float_array(x)
    ax = np.abs(arr)
    out = ax + (2.0 / alpha) * np.log1p(np.exp(-alpha * ax))
    return out if out.ndim else float(out)

def smooth_abs_grad(x, alpha: float):
    """Derivative of :func:`smooth_abs`: ``tanh(alpha x / 2)``, an odd sigmoid in (-1, 1)."""
    alpha = _check_alpha(alpha)
    arr = _as_float_array(x)
    out = np.tanh(0.5 * alpha * arr)
    return out if out.ndim else float(out)

def smooth_abs_hess(x, alpha: float):
    """Second derivative of :func:`smooth_abs`.

    Computed as ``2 alpha e / (1 + e)^2`` with ``e = exp(-alpha |x|)``:
    strictly positive, even in x, maximal at 0 where it equals alpha/2.
    For very large ``alpha |x|`` the result is clamped to the smallest
    positive normal double rather than underflowing to zero, keeping
    penalty Hessian contributions positive.
    """
    alpha = _check_alpha(alpha)
    arr = _as_float_array(x)
    e = np.exp(-alpha * np.abs(arr))
    out = np.maximum(2.0 * alpha * e / (1.0 + e) ** 2, np.finfo(np.float64).tiny)
    return out if out.ndim else float(out)

def smooth_norm(beta, alpha: float) -> float:
    """Sum of :func:`smooth_abs` over coordinates; smooth stand-in for the l1 norm."""
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1:
        raise InvalidArgumentError(f"beta must be a vector, got shape {beta.shape}")
    return float(np.sum(smooth_abs(beta, alpha)))


# ---------------------------------------------------------------------------
# penalties


def penalty_exact(beta: np.ndarray, hp: HyperParams) -> float:
    beta = _as_float_array(beta, "beta")
    return hp.lam * (
        0.5 * (1.0 - hp.eta) * float(beta @ beta) + hp.eta * float(np.abs(beta).sum())
    )


def penalty_smooth(beta: np.ndarray, hp: HyperParams) -> float:
    beta = _as_float_array(beta, "beta")
    return hp.lam * (
        0.5 * (1.0 - hp.eta) * float(beta @ beta) + hp.eta * smooth_norm(beta, hp.alpha)
    )


def penalty_gradient(beta: np.ndarray, hp: HyperParams) -> np.ndarray:
    """Gradient of the smooth penalty: ``lam (1-eta) beta + lam eta tanh(alpha beta / 2)``."""
    beta = _as_float_array(beta, "beta")
    return hp.lam * (1.0 - hp.eta) * beta + hp.lam * hp.eta * smooth_abs_grad(beta, hp.alpha)


def penalty_hessian_diag(beta: np.ndarray, hp: HyperParams) -> np.ndarray:
    """Diagonal of the smooth penalty Hessian; the penalty Hessian is exactly diagonal."""
    beta = _as_float_array(beta, "beta")
    return np.full_like(beta, hp.lam * (1.0 - hp.eta)) + hp.lam * hp.eta * smooth_abs_hess(
        beta, hp.alpha
    )


# ---------------------------------------------------------------------------
# full-data criterion


def _check_beta(beta, p: int) -> np.ndarray:
    beta = _as_float_array(beta, "beta")
    if beta.ndim != 1 or beta.shape[0] != p:
        raise InvalidArgumentError(f"beta must have shape ({p},), got {beta.shape}")
    return beta


def loss_exact(data: Dataset, beta: np.ndarray, hp: HyperParams) -> float:
    """Exact elastic-net objective, with the non-smooth l1 term."""
    beta = _check_beta(beta, data.p)
    r = data.x @ beta - data.y
    return 0.5 * float(r @ r) + penalty_exact(beta, hp)


def loss_smooth(data: Dataset, beta: np.ndarray, hp: HyperParams) -> float:
    """Smooth objective: l1 replaced by the smooth norm.

    Exceeds :func:`loss_exact` by at most ``lam * eta * 2 p log(2) / alpha``.
    """
    beta = _check_beta(beta, data.p)
    r = data.x @ beta - data.y
    return 0.5 * float(r @ r) + penalty_smooth(beta, hp)


def gradient_smooth(data: Dataset, beta: np.ndarray, hp: HyperParams) -> np.ndarray:
    """Gradient of :func:`loss_smooth`: ``X^T (X beta - Y)`` plus the penalty gradient."""
    beta = _check_beta(beta, data.p)
    return data.x.T @ (data.x @ beta - data.y) + penalty_gradient(beta, hp)


def hessian_smooth(data: Dataset, beta: np.ndarray, hp: HyperParams) -> np.ndarray:
    """Hessian of :func:`loss_smooth`: ``X^T X`` plus a positive diagonal.

    Positive definite for every beta since lam > 0 and eta < 1.
    """
    beta = _check_beta(beta, data.p)
    h = np.array(data.gram, copy=True)
    h[np.diag_indices_from(h)] += penalty_hessian_diag(beta, hp)
    return h


# ---------------------------------------------------------------------------
# sketch criterion


def sketch_loss(sketch: SketchSample, beta: np.ndarray, hp: HyperParams) -> float:
    """Inverse-probability weighted objective on a drawn sketch.

    The data term ``1/(2C) sum_c (1/prob_c) (x_c beta - y_c)^2`` is an
    unbiased estimate of the full-data term under the drawing plan; the
    penalty is identical to the full smooth criterion, never reweighted.
    """
    beta = _check_beta(beta, sketch.p)
    r = sketch.x @ beta - sketch.y
    return 0.5 * float(sketch.weights @ (r * r)) + penalty_smooth(beta, hp)


def sketch_gradient(sketch: SketchSample, beta: np.ndarray, hp: HyperParams) -> np.ndarray:
    beta = _check_beta(beta, sketch.p)
    r = sketch.x @ beta - sketch.y
    return sketch.x.T @ (sketch.weights * r) + penalty_gradient(beta, hp)


def sketch_hessian(sketch: SketchSample, beta: np.ndarray, hp: HyperParams) -> np.ndarray:
    beta = _check_beta(beta, sketch.p)
    h = (sketch.x * sketch.weights[:, None]).T @ sketch.x
    h[np.diag_indices_from(h)] += penalty_hessian_diag(beta, hp)
    return h
