"""Single-pass subsample solve and the pilot-then-optimal two-step driver."""

import numpy as np
import pytest

from subenet import (
    CoefRole,
    Dataset,
    DegeneratePlanError,
    HyperParams,
    InvalidArgumentError,
    NewtonConfig,
    PilotFailureError,
    SamplingPlan,
    TwoStepConfig,
    full_reference,
    posp_ssp,
    run_algorithm1,
    run_two_step,
    solve_full,
    uniform_ssp,
)

from _oracles import random_dataset, rng_for


def _hp(lam=1.0, eta=0.5, alpha=10.0):
    return HyperParams(lam=lam, eta=eta, alpha=alpha)


def test_run_algorithm1_deterministic_in_seed():
    rng = rng_for("alg1-seed")
    data = random_dataset(rng, 300, 4)
    plan = uniform_ssp(300)
    a = run_algorithm1(data, plan, 60, _hp(), seed=5)
    b = run_algorithm1(data, plan, 60, _hp(), seed=5)
    c = run_algorithm1(data, plan, 60, _hp(), seed=6)
    assert np.array_equal(a.beta, b.beta)
    assert not np.array_equal(a.beta, c.beta)
    assert a.coef.role is CoefRole.SUBSAMPLE


def test_run_algorithm1_concentrated_plan_solves_single_row_problem():
    rng = rng_for("alg1-one-row")
    x = rng.standard_normal((3, 2))
    y = rng.standard_normal(3)
    data = Dataset(x=x, y=y)
    plan = SamplingPlan(probs=np.array([1.0, 0.0, 0.0]))
    got = run_algorithm1(
        data, plan, 4, _hp(), cfg=NewtonConfig(grad_tol=1e-12), seed=1
    ).beta
    # all draws hit row 0 with pi=1, so the sketch criterion is the plain
    # one-row smooth criterion
    single = Dataset(x=x[:1].copy(), y=y[:1].copy())
    want = solve_full(single, _hp(), cfg=NewtonConfig(grad_tol=1e-12)).beta
    assert np.max(np.abs(got - want)) < 1e-10


def test_two_step_reproducible_and_role_tagged():
    rng = rng_for("two-step-repro")
    data = random_dataset(rng, 2000, 5)
    cfg = TwoStepConfig(c0=200, c=400, seed=9)
    a = run_two_step(data, _hp(), cfg)
    b = run_two_step(data, _hp(), cfg)
    assert np.array_equal(a.beta_pilot, b.beta_pilot)
    assert np.array_equal(a.beta_final, b.beta_final)
    assert np.array_equal(a.plan.probs, b.plan.probs)
    assert a.pilot_report.coef.role is CoefRole.PILOT
    assert a.final_report.coef.role is CoefRole.TWO_STEP
    other = run_two_step(data, _hp(), TwoStepConfig(c0=200, c=400, seed=10))
    assert not np.array_equal(a.beta_final, other.beta_final)


def test_two_step_plan_is_optimal_plan_at_pilot():
    rng = rng_for("two-step-plan")
    data = random_dataset(rng, 1500, 4)
    result = run_two_step(data, _hp(), TwoStepConfig(c0=300, c=300, seed=2))
    want = posp_ssp(data, result.beta_pilot, _hp())
    assert np.array_equal(result.plan.probs, want.probs)


def test_two_step_plan_mixing_passthrough():
    rng = rng_for("two-step-mix")
    data = random_dataset(rng, 1000, 3)
    result = run_two_step(data, _hp(), TwoStepConfig(c0=200, c=200, seed=4, mix_gamma=0.3))
    want = posp_ssp(data, result.beta_pilot, _hp(), mix_gamma=0.3)
    assert np.array_equal(result.plan.probs, want.probs)
    assert np.all(result.plan.probs > 0.0)


def test_two_step_large_pilot_approaches_full_data_plan():
    rng = rng_for("two-step-large-pilot")
    data = random_dataset(rng, 1000, 5)
    hp = _hp()
    result = run_two_step(data, hp, TwoStepConfig(c0=100_000, c=100, seed=8))
    ideal = posp_ssp(data, solve_full(data, hp).beta, hp)
    assert float(np.abs(result.plan.probs - ideal.probs).sum()) < 0.02


def test_pilot_failure_raises_with_report():
    rng = rng_for("two-step-pilot-fail")
    data = random_dataset(rng, 500, 4)
    cfg = TwoStepConfig(
        c0=50, c=50, seed=3, newton=NewtonConfig(grad_tol=1e-15, max_iter=1)
    )
    with pytest.raises(PilotFailureError) as exc_info:
        run_two_step(data, _hp(alpha=100.0), cfg)
    report = exc_info.value.report
    assert not report.converged
    assert report.iterations == 1


def test_degenerate_pilot_residuals_raise():
    # all-zero targets: the pilot lands exactly at the origin and every
    # residual vanishes, so no informative plan exists
    rng = rng_for("two-step-degenerate")
    x = rng.standard_normal((200, 3))
    data = Dataset(x=x, y=np.zeros(200))
    with pytest.raises(DegeneratePlanError):
        run_two_step(data, _hp(), TwoStepConfig(c0=40, c=40, seed=1))


def test_two_step_config_validation():
    with pytest.raises(InvalidArgumentError):
        TwoStepConfig(c0=0, c=10)
    with pytest.raises(InvalidArgumentError):
        TwoStepConfig(c0=10, c=-1)


def test_full_reference_matches_solver():
    rng = rng_for("full-ref")
    data = random_dataset(rng, 400, 6)
    hp = _hp()
    ref = full_reference(data, hp)
    direct = solve_full(data, hp)
    assert np.array_equal(ref.beta, direct.beta)
    assert ref.coef.role is CoefRole.FULL_SMOOTH
    assert ref.converged


def test_run_algorithm1_accepts_warm_start():
    rng = rng_for("alg1-warm")
    data = random_dataset(rng, 600, 4)
    plan = uniform_ssp(600)
    cold = run_algorithm1(data, plan, 200, _hp(), seed=12)
    warm = run_algorithm1(data, plan, 200, _hp(), seed=12, init=cold.beta)
    assert np.array_equal(warm.beta, cold.beta) or warm.iterations <= cold.iterations
