"""Benchmark harness: repeat cells, aggregation, serialization, sweeps."""

import json

import numpy as np
import pytest

from subenet import (
    CaseId,
    ExperimentConfig,
    HyperParams,
    InvalidArgumentError,
    NewtonConfig,
    SimulationCase,
    run_experiment,
    run_proportion_sweep,
)

_HP = HyperParams(lam=1.0, eta=0.5, alpha=10.0)


def _sim_cfg(**kw):
    base = dict(
        source=SimulationCase(case_id=CaseId.CASE1, n=800, p=5, seed=1),
        methods=("uniform",),
        c_grid=(100,),
        c0=50,
        repeats=3,
        hp=_HP,
        seed=7,
        test_size=200,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_single_cell_report_shape():
    report = run_experiment(_sim_cfg(repeats=1))
    assert len(report.rows) == 1
    row = report.rows[0]
    assert row.method == "uniform"
    assert row.c == 100
    assert row.c0 is None  # pilot size is a two-step concept
    assert row.repeats == 1
    assert row.failures == 0
    assert row.mse is not None and row.mse >= 0.0
    assert row.mse_sd is None  # undefined with one repeat
    assert row.re is not None and row.re >= -1.0
    assert row.mae is not None and row.mae >= 0.0
    assert row.hit_k is None  # not requested
    assert row.newton_steps_mean is not None
    assert row.wall_time_mean is not None and row.wall_time_mean >= 0.0


def test_grid_produces_row_per_method_and_size():
    report = run_experiment(
        _sim_cfg(methods=("uniform", "blev", "posp"), c_grid=(100, 200))
    )
    assert len(report.rows) == 6
    keys = [(r.method, r.c) for r in report.rows]
    assert ("posp", 100) in keys and ("blev", 200) in keys
    for row in report.rows:
        if row.method == "posp":
            assert row.c0 == 50
        else:
            assert row.c0 is None


def test_repeatability_and_thread_invariance(tmp_path):
    cfg_a = _sim_cfg(methods=("uniform", "posp"), c_grid=(100, 200), repeats=6)
    cfg_b = _sim_cfg(methods=("uniform", "posp"), c_grid=(100, 200), repeats=6)
    cfg_t = _sim_cfg(
        methods=("uniform", "posp"), c_grid=(100, 200), repeats=6, threads=4
    )
    rep_a = run_experiment(cfg_a)
    rep_b = run_experiment(cfg_b)
    rep_t = run_experiment(cfg_t)
    # identical seeds: byte-identical serialization once timing is excluded
    assert rep_a.to_csv_text(include_timing=False) == rep_b.to_csv_text(
        include_timing=False
    )
    assert rep_a.to_json_text(include_timing=False) == rep_b.to_json_text(
        include_timing=False
    )
    # thread count must not reach the numbers or the hash
    assert rep_a.to_csv_text(include_timing=False) == rep_t.to_csv_text(
        include_timing=False
    )
    assert rep_a.config_hash == rep_t.config_hash


def test_csv_schema_golden():
    report = run_experiment(_sim_cfg())
    header = report.to_csv_text(include_timing=True).splitlines()[0]
    assert header == (
        "method,c,c0,proportion,repeats,failures,"
        "mse,mse_sd,re,re_sd,mae,mae_sd,hit_k,hit_k_sd,"
        "newton_steps_mean,newton_steps_sd,wall_time_mean,wall_time_sd,config_hash"
    )
    bare = report.to_csv_text(include_timing=False).splitlines()[0]
    assert "wall_time" not in bare
    assert bare.endswith("config_hash")


def test_json_schema_golden():
    report = run_experiment(_sim_cfg())
    doc = json.loads(report.to_json_text(include_timing=False))
    assert set(doc) == {"schema_version", "config_hash", "config", "rows"}
    assert doc["schema_version"] == 1
    assert len(doc["config_hash"]) == 16
    int(doc["config_hash"], 16)  # hex
    assert doc["config"]["seed"] == 7
    assert "threads" not in doc["config"]
    row = doc["rows"][0]
    assert row["method"] == "uniform"
    assert "wall_time_mean" not in row


def test_write_produces_csv_and_json(tmp_path):
    out = tmp_path / "bench"
    report = run_experiment(_sim_cfg(), out=out)
    csv_path = tmp_path / "bench.csv"
    json_path = tmp_path / "bench.json"
    assert csv_path.exists() and json_path.exists()
    assert csv_path.read_text() == report.to_csv_text(include_timing=True)
    assert json.loads(json_path.read_text())["config_hash"] == report.config_hash


def test_config_hash_tracks_settings_not_threads():
    a = run_experiment(_sim_cfg(repeats=2))
    b = run_experiment(_sim_cfg(repeats=2, threads=3))
    c = run_experiment(_sim_cfg(repeats=2, seed=8))
    assert a.config_hash == b.config_hash
    assert a.config_hash != c.config_hash


def test_csv_source_with_self_test(tmp_path):
    from subenet import generate, save_csv

    train = generate(SimulationCase(case_id=CaseId.CASE1, n=300, p=5, seed=3))
    path = tmp_path / "train.csv"
    save_csv(train, path)
    cfg = ExperimentConfig(
        source=str(path),
        methods=("uniform",),
        c_grid=(80,),
        repeats=2,
        hp=_HP,
        seed=1,
    )
    report = run_experiment(cfg)
    assert len(report.rows) == 1
    assert report.rows[0].mse is not None


def test_all_failed_repeats_leave_metrics_empty(tmp_path):
    # y identically zero: the pilot lands on the origin with zero residuals
    # everywhere, so every two-step repeat dies in plan construction; the
    # harness records the failures and leaves the aggregates blank
    rng = np.random.default_rng(0)
    lines = ["a,b,y"]
    for row in rng.standard_normal((50, 2)):
        lines.append(f"{float(row[0])!r},{float(row[1])!r},0.0")
    path = tmp_path / "zero.csv"
    path.write_text("\n".join(lines) + "\n")
    cfg = ExperimentConfig(
        source=str(path),
        methods=("posp",),
        c_grid=(20,),
        c0=10,
        repeats=3,
        hp=_HP,
        seed=2,
    )
    report = run_experiment(cfg)
    row = report.rows[0]
    assert row.failures == 3
    assert row.mse is None and row.re is None and row.mae is None
    cells = report.to_csv_text(include_timing=False).splitlines()[1].split(",")
    assert "" in cells  # blanks, not NaNs


def test_hit_k_requires_grouped_test_data(tmp_path):
    with pytest.raises(InvalidArgumentError):
        _sim_cfg(hit_k=3)  # no group column to rank within
    with pytest.raises(InvalidArgumentError):
        _sim_cfg(group_column="g")  # grouping without a k


def test_hit_k_with_grouped_csv(tmp_path):
    from subenet import generate, save_csv

    rng = np.random.default_rng(5)
    train = generate(SimulationCase(case_id=CaseId.CASE1, n=400, p=5, seed=9))
    train_path = tmp_path / "train.csv"
    save_csv(train, train_path)
    # grouped test file: 4 groups of 6 rows
    lines = ["g," + ",".join(f"x{j}" for j in range(1, 6)) + ",y"]
    for g in range(4):
        for _ in range(6):
            x = rng.standard_normal(5)
            y = float(x @ np.array([4.0, 0.0, 2.0, 0.0, 1.0]) + rng.standard_normal())
            lines.append(f"g{g}," + ",".join(repr(float(v)) for v in x) + f",{y!r}")
    test_path = tmp_path / "test.csv"
    test_path.write_text("\n".join(lines) + "\n")
    cfg = ExperimentConfig(
        source=str(train_path),
        methods=("uniform",),
        c_grid=(150,),
        repeats=4,
        hp=_HP,
        seed=4,
        test_csv=str(test_path),
        hit_k=2,
        group_column="g",
    )
    report = run_experiment(cfg)
    row = report.rows[0]
    assert row.hit_k is not None
    assert 0.0 <= row.hit_k <= 2.0
    assert row.hit_k_sd is not None


def test_cv_runs_when_hp_missing():
    from subenet import CVConfig

    cfg = _sim_cfg(
        hp=None,
        cv=CVConfig(
            k=3, lambda_grid=(0.5, 2.0), eta_grid=(0.3,), cv_sample_size=200, seed=11
        ),
        repeats=2,
    )
    report = run_experiment(cfg)
    assert report.rows[0].mse is not None
    assert report.config["selected_hp"]["lam"] in (0.5, 2.0)


# ------------------------------------------------------------- sweep


def test_sweep_rows_cover_grid_plus_baseline():
    cfg = _sim_cfg(methods=("posp",), repeats=2)
    report = run_proportion_sweep(cfg, budget=40)
    # default grid has 13 proportions; one uniform baseline row is appended
    assert len(report.rows) == 14
    props = [r.proportion for r in report.rows]
    assert props[:-1] == list(pytest.approx(p) for p in (
        0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18, 0.20, 0.30, 0.40, 0.50
    ))
    assert props[-1] is None
    baseline = report.rows[-1]
    assert baseline.method == "uniform"
    assert baseline.c == 40
    for row in report.rows[:-1]:
        assert row.method == "posp"
        assert row.c0 + row.c == 40
        assert row.c0 >= 1 and row.c >= 1


def test_sweep_degenerate_budget_two():
    cfg = _sim_cfg(methods=("posp",), repeats=2)
    report = run_proportion_sweep(cfg, budget=2, proportions=(0.5,))
    assert len(report.rows) == 2
    row = report.rows[0]
    assert row.c0 == 1 and row.c == 1


def test_sweep_extreme_proportions_clamped():
    cfg = _sim_cfg(methods=("posp",), repeats=2)
    report = run_proportion_sweep(cfg, budget=30, proportions=(0.001, 0.999))
    first, last = report.rows[0], report.rows[1]
    assert first.c0 == 1 and first.c == 29
    assert last.c0 == 29 and last.c == 1


def test_sweep_validation():
    cfg = _sim_cfg(methods=("posp",), repeats=2)
    with pytest.raises(InvalidArgumentError):
        run_proportion_sweep(cfg, budget=1)
    with pytest.raises(InvalidArgumentError):
        run_proportion_sweep(cfg, budget=30, proportions=(0.0,))
    with pytest.raises(InvalidArgumentError):
        run_proportion_sweep(cfg, budget=30, proportions=(1.0,))


# ----------------------------------------------- desk-scale method ordering


@pytest.mark.slow
def test_desk_scale_method_ordering():
    # N=20000, p=20 workload: the pilot-then-optimal plan should beat
    # uniform at the same final-stage size at every grid point, and basic
    # leverage should land within 50% of uniform
    cfg = ExperimentConfig(
        source=SimulationCase(case_id=CaseId.CASE1, n=20_000, p=20, seed=42),
        methods=("uniform", "blev", "posp"),
        c_grid=(500, 1000, 2000),
        c0=500,
        repeats=200,
        hp=_HP,
        seed=100,
        test_size=1000,
        threads=4,
    )
    report = run_experiment(cfg)
    mse = {(r.method, r.c): r.mse for r in report.rows}
    fails = {(r.method, r.c): r.failures for r in report.rows}
    assert all(v == 0 for v in fails.values()), fails
    for c in (500, 1000, 2000):
        assert mse[("posp", c)] < mse[("uniform", c)], (c, mse)
        ratio = mse[("blev", c)] / mse[("uniform", c)]
        assert abs(ratio - 1.0) < 0.5, (c, ratio)
