"""Synthetic benchmark cases: designs, signals, and noise levels."""

import math

import numpy as np
import pytest

from subenet import CaseId, InvalidArgumentError, SimulationCase, generate, true_beta

from _oracles import rng_for


# -------------------------------------------------------------- true_beta


def test_true_beta_blocked_cases_at_default_width():
    want = np.repeat([4.0, 0.0, 2.0, 0.0, 1.0], 10)
    assert np.array_equal(true_beta(CaseId.CASE1, 50), want)
    assert np.array_equal(true_beta(CaseId.CASE2, 50), want)


def test_true_beta_case3_constant():
    assert np.array_equal(true_beta(CaseId.CASE3, 50), np.full(50, 2.0))
    assert np.array_equal(true_beta(CaseId.CASE3, 7), np.full(7, 2.0))


def test_true_beta_case4_leading_signal():
    beta = true_beta(CaseId.CASE4, 50)
    assert np.array_equal(beta[:20], np.full(20, 3.0))
    assert np.array_equal(beta[20:], np.zeros(30))


def test_true_beta_scales_with_p():
    assert np.array_equal(
        true_beta(CaseId.CASE1, 10), np.repeat([4.0, 0.0, 2.0, 0.0, 1.0], 2)
    )
    beta4 = true_beta(CaseId.CASE4, 20)
    assert np.array_equal(beta4[:8], np.full(8, 3.0))
    assert np.array_equal(beta4[8:], np.zeros(12))


def test_true_beta_divisibility_requirements():
    with pytest.raises(InvalidArgumentError):
        true_beta(CaseId.CASE1, 7)
    with pytest.raises(InvalidArgumentError):
        true_beta(CaseId.CASE4, 15)


# -------------------------------------------------------------- generation


def test_generate_is_deterministic():
    case = SimulationCase(case_id=CaseId.CASE1, n=100, p=10, seed=5)
    a = generate(case)
    b = generate(case)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
    c = generate(SimulationCase(case_id=CaseId.CASE1, n=100, p=10, seed=6))
    assert not np.array_equal(a.x, c.x)


def test_case1_autoregressive_covariance():
    data = generate(SimulationCase(case_id=CaseId.CASE1, n=100_000, p=5, seed=1))
    emp = np.cov(data.x, rowvar=False)
    want = 0.5 ** np.abs(np.subtract.outer(np.arange(5), np.arange(5)))
    assert np.max(np.abs(emp - want)) < 0.02


def test_case2_heavier_tails_than_case1():
    n = 100_000
    light = generate(SimulationCase(case_id=CaseId.CASE1, n=n, p=5, seed=2))
    heavy = generate(SimulationCase(case_id=CaseId.CASE2, n=n, p=5, seed=2))
    assert np.all(np.isfinite(heavy.x))

    def kurtosis(v):
        z = (v - v.mean()) / v.std()
        return float(np.mean(z**4))

    k_light = kurtosis(light.x[:, 0])
    k_heavy = kurtosis(heavy.x[:, 0])
    assert abs(k_light - 3.0) < 0.2
    assert k_heavy > 3.0 * k_light


def test_case3_exponential_mean():
    data = generate(SimulationCase(case_id=CaseId.CASE3, n=100_000, p=50, seed=3))
    means = data.x.mean(axis=0)
    assert np.max(np.abs(means - 0.5)) < 0.01
    assert np.all(data.x > 0.0)
    slower = generate(
        SimulationCase(case_id=CaseId.CASE3, n=100_000, p=5, seed=3, exp_rate=1.0)
    )
    assert np.max(np.abs(slower.x.mean(axis=0) - 1.0)) < 0.02


def test_case4_grouped_correlation():
    data = generate(SimulationCase(case_id=CaseId.CASE4, n=100_000, p=50, seed=4))
    corr = np.corrcoef(data.x, rowvar=False)
    target = 1.0 / 1.01
    # coordinates sharing a latent factor
    assert abs(corr[0, 1] - target) < 0.005
    assert abs(corr[5, 9] - target) < 0.005
    # coordinates from different factor blocks
    assert abs(corr[0, 5]) < 0.02
    assert abs(corr[0, 12]) < 0.02
    # free coordinates beyond the four blocks
    assert abs(corr[40, 41]) < 0.02
    assert abs(corr[0, 45]) < 0.02


def test_residual_noise_level():
    n = 100_000
    case = SimulationCase(case_id=CaseId.CASE1, n=n, p=10, seed=7)
    data = generate(case)
    resid = data.y - data.x @ case.beta_true
    var = float(resid.var())
    se = 9.0 * math.sqrt(2.0 / n)
    assert abs(var - 9.0) <= 3.0 * se


def test_sigma_override():
    case = SimulationCase(case_id=CaseId.CASE1, n=50_000, p=5, sigma=0.5, seed=8)
    data = generate(case)
    resid = data.y - data.x @ case.beta_true
    assert abs(float(resid.var()) - 0.25) < 0.02


def test_custom_beta_accepted_and_isolated():
    beta = np.array([1.0, 2.0, 3.0])
    case = SimulationCase(case_id=CaseId.CASE1, n=1000, p=3, beta_true=beta, seed=9)
    data = generate(case)
    assert data.p == 3
    beta[0] = 99.0  # caller-side mutation must not leak in
    assert case.beta_true[0] == 1.0


def test_case_validation():
    with pytest.raises(InvalidArgumentError):
        SimulationCase(case_id=CaseId.CASE1, n=0, p=5)
    with pytest.raises(InvalidArgumentError):
        SimulationCase(case_id=CaseId.CASE1, n=10, p=5, sigma=-1.0)
    with pytest.raises(InvalidArgumentError):
        SimulationCase(case_id=CaseId.CASE1, n=10, p=5, beta_true=np.ones(4))
    with pytest.raises(InvalidArgumentError):
        SimulationCase(case_id=CaseId.CASE4, n=10, p=15)
    with pytest.raises(InvalidArgumentError):
        SimulationCase(case_id=CaseId.CASE3, n=10, p=5, exp_rate=0.0)


def test_case2_matches_case1_design_rescaled():
    # same seed: the heavy-tailed rows are the light rows over a chi-square
    # draw, so signs agree where magnitudes only grew
    n, p = 1000, 5
    light = generate(SimulationCase(case_id=CaseId.CASE1, n=n, p=p, seed=11))
    heavy = generate(SimulationCase(case_id=CaseId.CASE2, n=n, p=p, seed=11))
    ratio = heavy.x / light.x
    # one scale factor per row
    assert np.max(ratio.std(axis=1) / np.abs(ratio.mean(axis=1))) < 1e-10
    assert np.all(ratio > 0.0)
