"""Acceptance suite: every exit criterion at its stated tolerance.

Run `pytest tests/test_acceptance.py -v -s` to see one PASS line with timing
per criterion.
"""

import itertools
import time

import pytest

from curaug.cli import main as cli_main
from curaug.compose import apply_strength
from curaug.curriculum import CurriculumConfig, build_epoch_plan, materialize, run
from curaug.image import load_png, random_image, save_png
from curaug.levels import (
    MAX_LEVEL,
    ProbeOutcome,
    plan_probes,
    update_level,
)
from curaug.longtail import ClassProfile, exp_profile, log_affine_deviation
from curaug.ops import OpKind, apply_op, magnitude, op_catalog
from curaug.rng import Stream
from curaug.simlearner import SimLearnerParams, run_dynamics

from golden_spec import (
    golden_magnitude,
    golden_path,
    golden_seed_tokens,
    golden_source,
)
from test_levels import brute_force_update
from test_analysis import brute_force_alignment


class _Budget:
    def __init__(self, name: str, seconds: float):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"{self.name}: {elapsed:.2f}s exceeds {self.seconds}s budget"
            )
            print(f"PASS {self.name} ({elapsed:.2f}s)")
        else:
            print(f"FAIL {self.name} ({elapsed:.2f}s)")
        return False


RANGED = [spec for spec in op_catalog() if spec.weakest is not None]


def test_magnitude_rule():
    with _Budget("magnitude-rule", 1.0):
        assert magnitude(OpKind.SHEAR_X, 1) == 0.01
        assert len(RANGED) == 14
        for spec in RANGED:
            assert abs(magnitude(spec.kind, 0) - spec.weakest) <= 1e-12
            assert abs(magnitude(spec.kind, 30) - spec.strongest) <= 1e-12


def test_identity_law():
    with _Budget("identity-law", 1.0):
        for i in range(100):
            img = random_image(6 + i % 7, 5 + i % 5, Stream("identity", i))
            assert apply_strength(img, 0, Stream("noise", i)) == img


def test_update_rule_oracle_equivalence():
    with _Budget("update-oracle", 10.0):
        thresholds = [round(0.05 * i, 2) for i in range(21)]
        checked = 0
        for probe_count in (1, 5, 10):
            for threshold in thresholds:
                for level in range(7):
                    grids = []
                    for l in range(level + 1):
                        size = probe_count * (l + 1)
                        bar = threshold * size
                        cand = {0, size, int(bar), min(size, int(bar) + 1)}
                        grids.append(sorted(v for v in cand if 0 <= v <= size))
                    for counts in itertools.product(*grids):
                        got = update_level(
                            level, ProbeOutcome(0, tuple(counts)), threshold, probe_count
                        )
                        want = brute_force_update(level, list(counts), threshold, probe_count)
                        assert got == want, (level, counts, threshold, probe_count)
                        checked += 1
        assert checked > 100_000


def test_probe_budget_formula():
    with _Budget("probe-budget", 5.0):
        for level in range(MAX_LEVEL + 1):
            plan = plan_probes(range(3), level, 10, Stream("budget", level))
            expected = 10 * (level + 1) * (level + 2) // 2
            assert plan.total_probes == expected
            assert sum(len(e.refs) for e in plan.entries) == expected


def test_level_dynamics_bounds():
    with _Budget("dynamics-bounds", 60.0):
        rng = Stream("randomized-runs")
        for i in range(1000):
            classes = 2 + rng.randint(4)
            epochs = 5 + rng.randint(26)
            probe_count = 1 + rng.randint(4)
            threshold = [0.4, 0.5, 0.6, 0.7][rng.randint(4)]
            profile = ClassProfile(
                tuple(sorted((10 + rng.randint(90) for _ in range(classes)), reverse=True))
            )
            params = SimLearnerParams.from_profile(
                profile,
                rate_scale=0.005 + 0.05 * rng.random(),
                difficulty=rng.random() * 2.0,
                seed=i,
            )
            cfg = CurriculumConfig(
                epochs=epochs, seed=i, probe_count=probe_count, threshold=threshold
            )
            result = run_dynamics(profile, cfg, params, plan_samples_per_class=1)
            prev = (0,) * classes
            for snap in result.history:
                for b, a in zip(prev, snap):
                    assert 0 <= a <= 30
                    assert abs(a - b) <= 1
                prev = snap

        # a perfect predictor reaches L = E after E epochs, E <= 30, exactly
        class Perfect:
            def evaluate(self, plans, trained_epochs):
                return {
                    c: ProbeOutcome(c, tuple(len(e.refs) for e in p.entries))
                    for c, p in plans.items()
                }

        for epochs in (1, 7, 30):
            result = run(
                [0, 0, 1],
                CurriculumConfig(epochs=epochs, seed=epochs, probe_count=2),
                probe_evaluator=Perfect(),
            )
            assert result.table.levels == [epochs, epochs]
            for e, snap in enumerate(result.history, start=1):
                assert snap == (e, e)


def test_long_tailed_profile():
    with _Budget("exp-profile", 1.0):
        profile = exp_profile(100, 500, 100)
        assert profile.counts[0] == 500
        assert profile.counts[99] == 5
        assert all(a >= b for a, b in zip(profile.counts, profile.counts[1:]))
        assert log_affine_deviation(profile) <= 0.5 + 1e-9


def test_fig4_style_decile_separation():
    with _Budget("decile-dynamics", 120.0):
        profile = exp_profile(100, 500, 100)
        cfg_proto = dict(epochs=200, probe_count=10, threshold=0.6)
        wins = 0
        for seed in range(100):
            cfg = CurriculumConfig(seed=seed, **cfg_proto)
            params = SimLearnerParams.from_profile(
                profile, rate_scale=0.004, difficulty=0.8, seed=seed
            )
            result = run_dynamics(profile, cfg, params, plan_samples_per_class=2)
            final = result.history[-1]
            top = sum(final[:10]) / 10
            bottom = sum(final[-10:]) / 10
            if top > bottom:
                wins += 1
        assert wins >= 95, f"top decile won only {wins}/100 runs"


def test_augment_probability_gating():
    with _Budget("gate-probability", 20.0):
        plan = build_epoch_plan([0] * 100_000, [4], 0.5, Stream("gate"))
        assert abs(plan.augmented_fraction - 0.5) <= 0.01

        images = {i: random_image(8, 8, Stream("gate-img", i)) for i in range(50)}
        plan0 = build_epoch_plan([0] * 50, [4], 0.0, Stream("gate0"))
        for sid, img in materialize(plan0, images.__getitem__):
            assert img.tobytes() == images[sid].tobytes()


def test_parallel_cli_determinism(tmp_path):
    with _Budget("thread-determinism", 60.0):
        src = tmp_path / "corpus"
        src.mkdir()
        for i in range(500):
            save_png(random_image(16, 16, Stream("par", i)), src / f"{i:04d}.png")
        out1, out8 = tmp_path / "t1", tmp_path / "t8"
        rc1 = cli_main(
            ["augment", str(src), str(out1), "--strength", "6", "--seed", "9",
             "--threads", "1"]
        )
        rc8 = cli_main(
            ["augment", str(src), str(out8), "--strength", "6", "--seed", "9",
             "--threads", "8"]
        )
        assert rc1 == 0 and rc8 == 0
        files1 = sorted(p.name for p in out1.iterdir())
        files8 = sorted(p.name for p in out8.iterdir())
        assert files1 == files8 and len(files1) == 500
        for name in files1:
            assert (out1 / name).read_bytes() == (out8 / name).read_bytes()


def test_golden_image_suite():
    with _Budget("golden-suite", 10.0):
        source = golden_source()
        committed_source = load_png(golden_path(OpKind.FLIP).parent / "source.png")
        assert committed_source == source
        for spec in op_catalog():
            golden = load_png(golden_path(spec.kind))
            produced = apply_op(
                source,
                spec.kind,
                golden_magnitude(spec.kind),
                Stream(*golden_seed_tokens(spec.kind)),
            )
            assert produced == golden, f"{spec.kind.value} drifted from its golden"


def test_analysis_oracles():
    with _Budget("analysis-oracles", 10.0):
        from curaug.analysis import (
            accuracy_breakdown,
            feature_alignment,
            weight_norm_variance,
        )
        from curaug.longtail import CategoryMasks

        assert weight_norm_variance([[0.5, -0.5], [1.5, 1.5]]) == 1.0

        for trial in range(5):
            rng = Stream("align-acc", trial)
            vecs = (rng.randoms(60).reshape(12, 5) - 0.5).tolist()
            labels = [rng.randint(3) for _ in range(12)]
            got = feature_alignment(vecs, labels)
            want = brute_force_alignment(vecs, labels)
            assert set(got.values) == set(want)
            for c, v in want.items():
                assert abs(got.values[c] - v) <= 1e-12

        masks = CategoryMasks(frozenset({0}), frozenset({1}), frozenset({2}))
        rng = Stream("acc-oracle")
        labels = [rng.randint(3) for _ in range(500)]
        preds = [rng.randint(3) for _ in range(500)]
        got = accuracy_breakdown(preds, labels, masks)
        hits = [p == t for p, t in zip(preds, labels)]
        assert got["all"] == sum(hits) / 500
        for name, cls in (("many", 0), ("med", 1), ("few", 2)):
            idx = [i for i, t in enumerate(labels) if t == cls]
            assert got[name] == sum(hits[i] for i in idx) / len(idx)


def test_threshold_auto_tune_rule():
    with _Budget("threshold-auto-tune", 10.0):
        class Fixed:
            def __init__(self, correct):
                self.correct = correct

            def evaluate(self, plans, trained_epochs):
                return {
                    c: ProbeOutcome(
                        c, tuple(len(e.refs) if self.correct else 0 for e in p.entries)
                    )
                    for c, p in plans.items()
                }

        cfg = CurriculumConfig(
            epochs=22, seed=1, threshold=0.6, auto_tune_threshold=True
        )
        stuck = run([0, 1], cfg, probe_evaluator=Fixed(False))
        assert stuck.threshold_trace[19] == 0.5
        assert stuck.manifest["final_threshold"] == 0.5

        moving = run([0, 1], cfg, probe_evaluator=Fixed(True))
        assert all(t == 0.6 for t in moving.threshold_trace)
        assert moving.manifest["final_threshold"] == 0.6
