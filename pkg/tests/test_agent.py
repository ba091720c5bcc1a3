import numpy as np
import pytest

from sonicguide.agent import OperatorConfig, run_simulated_operator, summarize_trials


def test_operator_finds_targets_2d():
    records = run_simulated_operator(OperatorConfig(trials=6, mode="2d", seed=12))
    assert all(r.outcome == "hit" for r in records)
    assert all(r.steps <= 50 for r in records)


def test_operator_finds_targets_3d():
    records = run_simulated_operator(OperatorConfig(trials=6, mode="3d", seed=12))
    hits = [r for r in records if r.outcome == "hit"]
    assert len(hits) >= 5


def test_operator_deterministic_under_seed():
    a = run_simulated_operator(OperatorConfig(trials=3, mode="2d", seed=4))
    b = run_simulated_operator(OperatorConfig(trials=3, mode="2d", seed=4))
    assert [r.path for r in a] == [r.path for r in b]
    assert [r.steps for r in a] == [r.steps for r in b]


def test_start_inside_zone_hits_in_one_step():
    cfg = OperatorConfig(trials=1, mode="2d", seed=0, start_distance=0.01)
    record = run_simulated_operator(cfg)[0]
    assert record.outcome == "hit"
    assert record.steps == 1
    assert record.path_length == 0.0


def test_2d_trials_stay_in_plane():
    records = run_simulated_operator(OperatorConfig(trials=2, mode="2d", seed=9))
    for record in records:
        assert all(p[2] == 0.0 for _, p in record.path)


def test_hit_outcome_matches_final_position():
    records = run_simulated_operator(OperatorConfig(trials=4, mode="3d", seed=2))
    for record in records:
        final = np.array(record.path[-1][1])
        inside = np.linalg.norm(final) <= record.target_radius
        assert (record.outcome == "hit") == inside


def test_paths_start_at_configured_distance():
    records = run_simulated_operator(OperatorConfig(trials=3, mode="3d", seed=8))
    for record in records:
        assert np.linalg.norm(record.start_position) == pytest.approx(0.8, abs=1e-6)


def test_summary_shape():
    records = run_simulated_operator(OperatorConfig(trials=4, mode="2d", seed=1))
    summary = summarize_trials(records)
    assert summary["trials"] == 4
    assert 0.0 <= summary["hit_rate"] <= 1.0
    assert summary["median_steps"] is not None
