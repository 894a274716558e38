"""Row sampling plans and with-replacement drawing.

A plan assigns each of the N source rows a probability; sketches are
drawn with replacement under the plan.  Three plan families are provided:

* uniform: every row gets 1/N;
* basic leverage: probabilities proportional to the leverage scores
  (squared row norms of a thin orthogonal factor of X);
* residual-norm optimal ("posp"): probabilities proportional to
  |r_n| * ||M^{-1} x_n||_2, where r_n are residuals at a reference
  coefficient vector and M is the scaled smooth Hessian there.  This is
  the plan minimizing the trace of the asymptotic variance among all
  probability-normalized plans.

Drawing uses Walker/Vose alias tables: O(N) table construction and O(1)
per draw, seeded with PCG64 so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from ._seeds import make_rng
from .asymptotics import compute_c_osa, compute_mx
from .errors import DegeneratePlanError, InvalidArgumentError, NumericalError
from .model import Coefficients, Dataset, HyperParams, SketchSample

__all__ = [
    "PlanKind",
    "SamplingPlan",
    "OspCoefficients",
    "uniform_ssp",
    "blev_ssp",
    "posp_ssp",
    "osp_coefficients",
    "draw_with_replacement",
]

_SUM_TOL = 1e-12


class PlanKind(str, Enum):
    UNIFORM = "uniform"
    BLEV = "blev"
    POSP = "posp"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SamplingPlan:
    """Per-row probabilities summing to one; entries may be zero but never negative."""

    probs: np.ndarray
    kind: PlanKind = PlanKind.CUSTOM

    def __post_init__(self):
        probs = np.ascontiguousarray(np.asarray(self.probs, dtype=np.float64))
        if probs.ndim != 1 or probs.shape[0] < 1:
            raise InvalidArgumentError("probs must be a non-empty 1-d array")
        if not np.isfinite(probs).all():
            raise InvalidArgumentError("probs contains non-finite entries")
        if np.any(probs < 0):
            raise InvalidArgumentError("probs contains negative entries")
        total = float(probs.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise InvalidArgumentError(f"probs must sum to 1 within {_SUM_TOL}, got {total!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "kind", PlanKind(self.kind))

    @property
    def n(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class OspCoefficients:
    """Per-row quadratic coefficients behind the optimal plan.

    For each row, the plan probability solves a * pi^2 + b_n * pi + d_n
    with the normalizer choice that makes ``a`` the negated square of
    sum_n |r_n| ||M^{-1} x_n||; then pi_n = sqrt(-d_n / a).
    """

    a: float
    b: np.ndarray
    d: np.ndarray
    k: float

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        d = np.ascontiguousarray(np.asarray(self.d, dtype=np.float64))
        if b.shape != d.shape or b.ndim != 1:
            raise InvalidArgumentError("b and d must be 1-d arrays of equal length")
        if np.any(d < 0):
            raise InvalidArgumentError("d entries must be nonnegative")
        if self.a > 0:
            raise InvalidArgumentError(f"a must be nonpositive, got {self.a}")
        b.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)


def uniform_ssp(n: int) -> SamplingPlan:
    """The plan assigning every one of ``n`` rows probability 1/n."""
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    return SamplingPlan(probs=np.full(n, 1.0 / n), kind=PlanKind.UNIFORM)


def blev_ssp(data: Dataset) -> SamplingPlan:
    """Basic leverage plan: pi_n proportional to the leverage score of row n.

    Leverages are squared row norms of Q from a thin QR factorization of
    X and sum to p, so the plan is their normalization.  Requires n >= p
    and full column rank.
    """
    if data.n < data.p:
        raise InvalidArgumentError(
            f"leverage plan needs n >= p, got n={data.n}, p={data.p}"
        )
    q, r = np.linalg.qr(data.x, mode="reduced")
    diag = np.abs(np.diag(r))
    tol = max(data.n, data.p) * np.finfo(np.float64).eps * (diag.max() if diag.size else 0.0)
    deficient = int(np.sum(diag <= tol))
    if deficient:
        raise NumericalError(
            f"x is rank deficient: {deficient} of {data.p} columns are numerically dependent"
        )
    lev = np.sum(q * q, axis=1)
    return SamplingPlan(probs=lev / lev.sum(), kind=PlanKind.BLEV)


def _residual_norm_scores(data: Dataset, beta_ref: np.ndarray, hp: HyperParams):
    """|r_n| and ||M^{-1} x_n||_2 for every row, with M the scaled Hessian at beta_ref."""
    r = data.x @ beta_ref - data.y
    m = compute_mx(data, beta_ref, hp)
    try:
        cf = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"scaled Hessian factorization failed: {exc}") from exc
    minv_xt = scipy.linalg.cho_solve(cf, data.x.T, check_finite=False)
    norms = np.sqrt(np.sum(minv_xt * minv_xt, axis=0))
    return r, norms


def posp_ssp(
    data: Dataset,
    beta_ref: np.ndarray,
    hp: HyperParams,
    mix_gamma: float = 0.0,
) -> SamplingPlan:
    """Optimal plan: pi_n proportional to |r_n| * ||M^{-1} x_n||_2 at ``beta_ref``.

    Rows fitted exactly at the reference get probability zero.  If every
    row does, no plan exists and :class:`DegeneratePlanError` is raised;
    falling back to uniform is the caller's decision.  ``mix_gamma`` in
    [0, 1] blends in that uniform floor: pi <- (1-g) pi + g/n, which keeps
    inverse-probability weights bounded at a small optimality cost.
    """
    if not 0.0 <= mix_gamma <= 1.0:
        raise InvalidArgumentError(f"mix_gamma must lie in [0, 1], got {mix_gamma}")
    r, norms = _residual_norm_scores(data, _check_ref(beta_ref, data.p), hp)
    scores = np.abs(r) * norms
    total = float(scores.sum())
    if total <= 0.0:
        raise DegeneratePlanError(
            "all rows have zero residual at the reference; optimal plan is undefined"
        )
    probs = scores / total
    if mix_gamma > 0.0:
        probs = (1.0 - mix_gamma) * probs + mix_gamma / data.n
    return SamplingPlan(probs=probs, kind=PlanKind.POSP)


def _check_ref(beta_ref, p: int) -> np.ndarray:
    if isinstance(beta_ref, Coefficients):
        beta_ref = beta_ref.beta
    beta_ref = np.asarray(beta_ref, dtype=np.float64)
    if beta_ref.shape != (p,):
        raise InvalidArgumentError(f"beta_ref must have shape ({p},), got {beta_ref.shape}")
    if not np.isfinite(beta_ref).all():
        raise InvalidArgumentError("beta_ref contains non-finite entries")
    return beta_ref


def osp_coefficients(data: Dataset, beta_ref, hp: HyperParams) -> OspCoefficients:
    """Quadratic coefficients of the per-row optimality condition at ``beta_ref``.

    With mc = M^{-1} c (c the penalty gradient at the reference) and
    u_n = M^{-1} x_n:

    * ``b[n] = 2 r_n mc . u_n``
    * ``d[n] = r_n^2 ||u_n||^2``
    * ``k = ||mc||^2 + (sum_n |r_n| ||u_n||)^2`` (normalizer choice)
    * ``a = ||mc||^2 - k``, nonpositive by construction.

    The positive root (-b + sqrt(b^2 - 4 a d)) / (2a) of each row's
    quadratic reproduces the optimal plan probabilities.
    """
    beta_ref = _check_ref(beta_ref, data.p)
    r = data.x @ beta_ref - data.y
    m = compute_mx(data, beta_ref, hp)
    try:
        cf = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"scaled Hessian factorization failed: {exc}") from exc
    minv_xt = scipy.linalg.cho_solve(cf, data.x.T, check_finite=False)
    mc = scipy.linalg.cho_solve(cf, compute_c_osa(beta_ref, hp), check_finite=False)
    norms = np.sqrt(np.sum(minv_xt * minv_xt, axis=0))
    mc_sq = float(mc @ mc)
    total = float((np.abs(r) * norms).sum())
    k = mc_sq + total * total
    return OspCoefficients(
        a=mc_sq - k,
        b=2.0 * r * (mc @ minv_xt),
        d=(r * r) * (norms * norms),
        k=k,
    )


# ---------------------------------------------------------------------------
# alias-method drawing


def _build_alias(probs: np.ndarray):
    """Walker/Vose alias table in O(n); zero-probability rows are never drawn."""
    n = probs.shape[0]
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    scaled = list(probs * n)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        (small if scaled[l] < 1.0 else large).append(l)
    # leftovers on either stack are 1 up to roundoff
    return prob, alias


def draw_with_replacement(
    plan: SamplingPlan, data: Dataset, c: int, seed: int
) -> SketchSample:
    """Draw ``c`` rows with replacement under ``plan``, seeded and reproducible.

    Each drawn row is copied verbatim together with its plan probability.
    The same (plan, data, c, seed) always yields the same sketch.
    """
    if c < 1:
        raise InvalidArgumentError(f"c must be at least 1, got {c}")
    if plan.n != data.n:
        raise InvalidArgumentError(
            f"plan covers {plan.n} rows but data has {data.n}"
        )
    prob, alias = _build_alias(plan.probs)
    rng = make_rng(seed)
    cols = rng.integers(0, data.n, size=c)
    u = rng.random(size=c)
    idx = np.where(u < prob[cols], cols, alias[cols])
    return SketchSample(
        x=data.x[idx],
        y=data.y[idx],
        probs=plan.probs[idx],
        indices=idx,
        source_n=data.n,
    )
