import math

import numpy as np
import pytest

from cleantable.harness import (
    CSV_HEADER,
    ExperimentConfig,
    LearningCurve,
    emit_plots,
    load_curves,
    persist,
    run_condition,
    smooth,
    sweep,
)
from cleantable.learner import LearnerConfig
from cleantable.learner import initial_q_from_oracle
from cleantable.scenario import INITIAL_STATES, oracle_episode_length


def tiny(condition="rl", **kw):
    defaults = dict(condition=condition, agents=3, episodes=20, master_seed=5)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestSmooth:
    def test_window_one_is_identity(self):
        assert smooth([3.0, 1.0, 2.0], 1) == [3.0, 1.0, 2.0]

    def test_hand_computed(self):
        assert smooth([0, 1, 0, 1], 2) == [0, 0.5, 0.5, 0.5]

    def test_constant_unchanged(self):
        assert smooth([0.7] * 10, 4) == pytest.approx([0.7] * 10)

    def test_partial_windows_at_start(self):
        assert smooth([1, 2, 3, 4], 3) == [1, 1.5, 2, 3]

    def test_bad_window(self):
        with pytest.raises(ValueError):
            smooth([1.0], 0)


class TestRunCondition:
    def test_oracle_single_episode(self):
        cfg = tiny(agents=1, episodes=1, learner=LearnerConfig(epsilon=0.0, alpha=0.0))
        curve = run_condition(cfg, initial_q=initial_q_from_oracle())
        lstar = oracle_episode_length(INITIAL_STATES[0])
        assert curve.raw_mean[0] == pytest.approx(1 - 0.01 * (lstar - 1))

    def test_deterministic_per_master_seed(self):
        a = run_condition(tiny())
        b = run_condition(tiny())
        assert a.raw_mean == b.raw_mean
        assert a.cumulative_per_agent == b.cumulative_per_agent

    def test_curve_shapes(self):
        curve = run_condition(tiny())
        assert len(curve.raw_mean) == 20
        assert len(curve.smoothed_mean) == 20
        assert len(curve.stderr) == 20
        assert len(curve.cumulative_per_agent) == 3

    def test_smoothing_invariant(self):
        curve = run_condition(tiny(smoothing_window=4))
        assert curve.smoothed_mean == pytest.approx(smooth(curve.raw_mean, 4))

    def test_agent_order_irrelevant(self):
        curve = run_condition(tiny(agents=5))
        rewards = curve.rewards
        permuted = rewards[::-1]
        for ep in range(rewards.shape[1]):
            assert math.fsum(permuted[:, ep]) / 5 == curve.raw_mean[ep]

    def test_irl_condition_uses_feedback(self):
        cfg = tiny("irl")
        assert cfg.resolved_learner().use_feedback
        assert not cfg.resolved_learner().use_affordances
        run_condition(cfg)

    def test_affordance_condition(self, trained_net):
        curve = run_condition(tiny("rl-aff", episodes=10), net=trained_net)
        assert len(curve.raw_mean) == 10

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(condition="bogus")
        with pytest.raises(ValueError):
            ExperimentConfig(agents=0)


class TestSweep:
    def test_empty_values(self):
        assert sweep(tiny("irl"), "theta_min", []) == []

    def test_theta_sweep_shapes(self):
        results = sweep(tiny("irl", agents=2, episodes=5), "theta_min", [0.0, 0.5])
        assert [v for v, _ in results] == [0.0, 0.5]
        for value, curve in results:
            assert len(curve.raw_mean) == 5
            assert curve.param == f"theta_min={value:g}"

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            sweep(tiny(), "alpha", [0.1])


class TestPersistence:
    def test_round_trip(self, tmp_path):
        curves = [run_condition(tiny()), run_condition(tiny("irl", master_seed=6), param="x=1")]
        path = tmp_path / "curves.csv"
        persist(curves, path)
        loaded = load_curves(path)
        assert len(loaded) == 2
        for orig, back in zip(curves, loaded):
            assert back.condition == orig.condition
            assert back.param == orig.param
            assert back.raw_mean == orig.raw_mean
            assert back.smoothed_mean == orig.smoothed_mean
            assert back.stderr == orig.stderr

    def test_row_count(self, tmp_path):
        curves = [run_condition(tiny()), run_condition(tiny("irl", master_seed=6))]
        path = tmp_path / "curves.csv"
        persist(curves, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 1 + 2 * 20

    def test_unwritable_path_reports_filename(self, tmp_path):
        target = tmp_path / "missing-dir" / "curves.csv"
        with pytest.raises(OSError, match="curves.csv"):
            persist([run_condition(tiny())], target)

    def test_plot_file_created(self, tmp_path):
        path = tmp_path / "curves.png"
        emit_plots([run_condition(tiny())], path)
        assert path.stat().st_size > 0
