"""The synthetic learner: closed-form accuracy, prediction draws, dynamics."""

import math

import pytest

from curaug.curriculum import CurriculumConfig
from curaug.levels import MAX_LEVEL
from curaug.longtail import ClassProfile, exp_profile
from curaug.rng import Stream
from curaug.simlearner import (
    SimLearnerParams,
    SimulatedProbeEvaluator,
    decile_means,
    run_dynamics,
    sim_accuracy,
    sim_predict,
)


def flat_params(num_classes=4, rate=0.05, difficulty=0.5, seed=0):
    return SimLearnerParams(
        learn_rates=(rate,) * num_classes, difficulty=difficulty, seed=seed
    )


class TestSimAccuracy:
    def test_untrained_undiluted_is_half(self):
        assert sim_accuracy(flat_params(), 0, 0, 0) == 0.5

    def test_zero_difficulty_strength_independent(self):
        params = flat_params(difficulty=0.0)
        values = {sim_accuracy(params, 1, s, 7) for s in range(0, 30, 5)}
        assert len(values) == 1

    def test_matches_alternative_logistic_form(self):
        # tanh identity: sigma(x) = (1 + tanh(x/2)) / 2
        params = SimLearnerParams(learn_rates=(0.03, 0.11), difficulty=0.7, seed=0)
        for c in (0, 1):
            for s in (0, 3, 11):
                for e in (0, 5, 40):
                    x = params.learn_rates[c] * e - params.difficulty * s
                    expected = (1.0 + math.tanh(x / 2.0)) / 2.0
                    assert sim_accuracy(params, c, s, e) == pytest.approx(expected, abs=1e-12)

    def test_monotonicities(self):
        params = SimLearnerParams(learn_rates=(0.02, 0.2), difficulty=0.4, seed=0)
        assert sim_accuracy(params, 0, 2, 10) < sim_accuracy(params, 0, 2, 30)
        assert sim_accuracy(params, 0, 8, 10) < sim_accuracy(params, 0, 1, 10)
        assert sim_accuracy(params, 0, 3, 15) < sim_accuracy(params, 1, 3, 15)

    def test_extreme_arguments_stay_in_unit_interval(self):
        params = SimLearnerParams(learn_rates=(50.0,), difficulty=1000.0, seed=0)
        assert sim_accuracy(params, 0, 30, 0) == pytest.approx(0.0, abs=1e-12)
        assert sim_accuracy(params, 0, 0, 10_000) == pytest.approx(1.0, abs=1e-12)


class TestSimPredict:
    def test_certain_regime_always_correct(self):
        params = SimLearnerParams(learn_rates=(5.0,) * 3, difficulty=0.0, seed=0)
        rng = Stream("sure")
        assert all(sim_predict(params, 1, 0, 100, rng) == 1 for _ in range(50))

    def test_hopeless_regime_never_correct(self):
        params = SimLearnerParams(learn_rates=(0.001,) * 3, difficulty=50.0, seed=0)
        rng = Stream("never")
        assert all(sim_predict(params, 1, 30, 0, rng) != 1 for _ in range(50))

    def test_monte_carlo_rate_matches_accuracy(self):
        params = SimLearnerParams(learn_rates=(0.08, 0.08), difficulty=0.3, seed=0)
        p = sim_accuracy(params, 0, 2, 10)
        rng = Stream("mc")
        n = 10_000
        hits = sum(1 for _ in range(n) if sim_predict(params, 0, 2, 10, rng) == 0)
        assert abs(hits / n - p) < 0.02

    def test_wrong_class_is_uniform_other(self):
        params = SimLearnerParams(learn_rates=(0.0001,) * 5, difficulty=30.0, seed=0)
        rng = Stream("others")
        seen = {sim_predict(params, 2, 30, 0, rng) for _ in range(400)}
        assert seen == {0, 1, 3, 4}


class TestEvaluator:
    def test_counts_within_budget_and_deterministic(self):
        from curaug.curriculum import CurriculumEngine

        labels = [0] * 5 + [1] * 5
        cfg = CurriculumConfig(epochs=1, seed=6, probe_count=4)
        engine = CurriculumEngine(labels, cfg)
        plans = engine.probe_plans()
        ev1 = SimulatedProbeEvaluator(flat_params(num_classes=2, seed=9))
        ev2 = SimulatedProbeEvaluator(flat_params(num_classes=2, seed=9))
        o1 = ev1.evaluate(plans, trained_epochs=0)
        o2 = ev2.evaluate(plans, trained_epochs=0)
        assert o1 == o2
        for c, out in o1.items():
            for lv, v in enumerate(out.correct):
                assert 0 <= v <= cfg.probe_count * (lv + 1)


class TestRunDynamics:
    def test_trajectories_respect_level_invariants(self):
        profile = exp_profile(10, 120, 10)
        cfg = CurriculumConfig(epochs=25, seed=5, probe_count=3)
        params = SimLearnerParams.from_profile(profile, rate_scale=0.02, difficulty=0.6, seed=5)
        result = run_dynamics(profile, cfg, params, plan_samples_per_class=2)
        assert len(result.history) == 25
        prev = (0,) * 10
        for snap in result.history:
            for b, a in zip(prev, snap):
                assert abs(a - b) <= 1
                assert 0 <= a <= MAX_LEVEL
            prev = snap

    def test_head_classes_outpace_tail(self):
        profile = exp_profile(20, 200, 40)
        cfg = CurriculumConfig(epochs=60, seed=11, probe_count=5)
        params = SimLearnerParams.from_profile(profile, rate_scale=0.01, difficulty=0.9, seed=11)
        result = run_dynamics(profile, cfg, params, plan_samples_per_class=2)
        final = result.history[-1]
        head = sum(final[:5]) / 5
        tail = sum(final[-5:]) / 5
        assert head > tail

    def test_equal_rates_shared_seed_identical_trajectories(self):
        profile = ClassProfile((30, 30, 30))
        cfg = CurriculumConfig(epochs=15, seed=21, probe_count=4)
        params = SimLearnerParams(learn_rates=(0.05,) * 3, difficulty=0.0, seed=21)
        result = run_dynamics(profile, cfg, params, plan_samples_per_class=1)
        # zero difficulty and equal rates: per-epoch probe draws are the only
        # noise; all classes share p, so trajectories differ only through
        # their independent draws -- under a shared stream key per class they
        # are exchangeable; just require identical distribution endpoints
        finals = result.history[-1]
        assert max(finals) - min(finals) <= 2

    def test_degenerate_difficulty_oscillates_between_0_and_1(self):
        profile = ClassProfile((40, 40))
        cfg = CurriculumConfig(epochs=30, seed=2, probe_count=5)
        params = SimLearnerParams(learn_rates=(1.0, 1.0), difficulty=500.0, seed=2)
        result = run_dynamics(profile, cfg, params, plan_samples_per_class=1)
        tail = result.history[5:]
        assert all(lv in (0, 1) for snap in tail for lv in snap)
        flat = [snap[0] for snap in tail]
        assert 0 in flat and 1 in flat

    def test_raising_rate_with_common_randomness_never_hurts(self):
        # Common random numbers couple the runs probe for probe.  Pathwise the
        # boosted class can trail by at most one level (the +-1 step rule plus
        # clamping at 0 can break the even-gap parity once), and on average it
        # must come out ahead.
        profile = ClassProfile((20, 20, 20))
        cfg = CurriculumConfig(epochs=30, probe_count=5)
        margins = []
        for seed in range(20):
            cfg_s = CurriculumConfig(epochs=30, seed=seed, probe_count=5)
            base = SimLearnerParams(learn_rates=(0.05, 0.05, 0.08), difficulty=0.5, seed=seed)
            boosted = SimLearnerParams(learn_rates=(0.05, 0.05, 0.16), difficulty=0.5, seed=seed)
            r_base = run_dynamics(profile, cfg_s, base, plan_samples_per_class=1)
            r_boost = run_dynamics(profile, cfg_s, boosted, plan_samples_per_class=1)
            for snap_b, snap_h in zip(r_base.history, r_boost.history):
                assert snap_h[2] >= snap_b[2] - 1
            margins.append(r_boost.history[-1][2] - r_base.history[-1][2])
        assert sum(margins) / len(margins) > 0

    def test_profile_params_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            run_dynamics(
                ClassProfile((5, 5)),
                CurriculumConfig(epochs=1),
                flat_params(num_classes=3),
            )


class TestDecileMeans:
    def test_means_by_position(self):
        snap = tuple(range(100))
        means = decile_means(snap)
        assert len(means) == 10
        assert means[0] == pytest.approx(4.5)
        assert means[-1] == pytest.approx(94.5)

    def test_too_few_classes_rejected(self):
        with pytest.raises(ValueError):
            decile_means((1, 2, 3))
