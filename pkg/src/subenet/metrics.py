"""Evaluation metrics for subsample estimators.

All aggregation uses ``math.fsum`` so results do not depend on the order
repeats were produced in.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .model import Coefficients, Dataset

__all__ = ["metric_mse", "metric_re", "metric_hit_k", "metric_mae"]


def _betas(estimates, name: str = "estimates") -> list[np.ndarray]:
    out = []
    for est in estimates:
        if isinstance(est, Coefficients):
            est = est.beta
        est = np.asarray(est, dtype=np.float64)
        if est.ndim != 1:
            raise InvalidArgumentError(f"{name} must be 1-d vectors")
        out.append(est)
    if not out:
        raise InvalidArgumentError(f"{name} must be non-empty")
    if len({v.shape[0] for v in out}) != 1:
        raise InvalidArgumentError(f"{name} have inconsistent lengths")
    return out


def _ref(reference, p: int) -> np.ndarray:
    if isinstance(reference, Coefficients):
        reference = reference.beta
    reference = np.asarray(reference, dtype=np.float64)
    if reference.shape != (p,):
        raise InvalidArgumentError(f"reference must have shape ({p},)")
    return reference


def metric_mse(estimates: Sequence, reference) -> float:
    """Mean squared l2 distance of the estimates from the reference vector."""
    betas = _betas(estimates)
    ref = _ref(reference, betas[0].shape[0])
    return math.fsum(float((b - ref) @ (b - ref)) for b in betas) / len(betas)


def metric_re(estimates: Sequence, reference, test: Dataset) -> float:
    """Mean excess prediction error relative to the reference on a test set.

    For each estimate, the squared test residual norm divided by the
    reference's; the metric is the mean ratio minus one, so the
    reference itself scores 0 and anything else at least -1.
    """
    betas = _betas(estimates)
    ref = _ref(reference, betas[0].shape[0])
    if test.p != ref.shape[0]:
        raise InvalidArgumentError("test covariate dimension does not match estimates")
    base = test.x @ ref - test.y
    denom = float(base @ base)
    if denom == 0.0:
        raise InvalidArgumentError("reference fits the test set exactly; ratio undefined")
    ratios = []
    for b in betas:
        err = test.x @ b - test.y
        ratios.append(float(err @ err) / denom)
    return math.fsum(ratios) / len(ratios) - 1.0


def _top_k(scores: np.ndarray, k: int) -> set[int]:
    # stable sort on the negated scores: ties keep original row order
    return set(np.argsort(-scores, kind="stable")[:k].tolist())


def metric_hit_k(
    predicted: Sequence[np.ndarray], actual: Sequence[np.ndarray], k: int
) -> float:
    """Average per-group overlap between predicted and actual top-k rows.

    ``predicted`` and ``actual`` are parallel sequences of per-group
    score vectors (for example, one vector per test day).  Within each
    group both sides are ranked descending with ties broken by original
    row order, and the intersection size of the two top-k sets is
    averaged across groups.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be at least 1, got {k}")
    if len(predicted) != len(actual) or not predicted:
        raise InvalidArgumentError("predicted and actual must be equal-length and non-empty")
    hits = []
    for pred, act in zip(predicted, actual):
        pred = np.asarray(pred, dtype=np.float64)
        act = np.asarray(act, dtype=np.float64)
        if pred.shape != act.shape or pred.ndim != 1:
            raise InvalidArgumentError("per-group score vectors must be 1-d and aligned")
        if pred.shape[0] < k:
            raise InvalidArgumentError(
                f"a group has {pred.shape[0]} rows, fewer than k={k}"
            )
        hits.append(len(_top_k(pred, k) & _top_k(act, k)))
    return math.fsum(hits) / len(hits)


def metric_mae(beta, test: Dataset) -> float:
    """Mean absolute prediction error of one coefficient vector on a test set."""
    if isinstance(beta, Coefficients):
        beta = beta.beta
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (test.p,):
        raise InvalidArgumentError(f"beta must have shape ({test.p},)")
    return float(np.mean(np.abs(test.x @ beta - test.y)))
