"""The epoch driver: probe, update levels, gate augmentation, hand off to training.

Within every epoch the order is fixed: classes are probed against the model
as it stood after the previous epoch, levels update from those outcomes, and
only then is the epoch's augmented view generated and given to the trainer.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Protocol, Sequence

import numpy as np

from .compose import apply_strength
from .image import RasterImage
from .levels import (
    MAX_LEVEL,
    LevelTable,
    ProbeOutcome,
    ProbePlan,
    auto_tune_threshold,
    count_correct,
    plan_probes,
    update_table,
)
from .rng import Stream


@dataclass(frozen=True)
class CurriculumConfig:
    augment_prob: float = 0.5
    threshold: float = 0.6
    probe_count: int = 10
    epochs: int = 0
    max_strength: int = MAX_LEVEL
    seed: int = 0
    auto_tune_threshold: bool = False

    def __post_init__(self):
        if not 0.0 <= self.augment_prob <= 1.0:
            raise ValueError("augment_prob must lie in [0, 1]")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.probe_count < 1:
            raise ValueError("probe_count must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 1 <= self.max_strength <= MAX_LEVEL:
            raise ValueError(f"max_strength must lie in [1, {MAX_LEVEL}]")


@dataclass(frozen=True)
class Directive:
    sample_id: int
    class_id: int
    augment: bool
    strength: int
    seed: int


@dataclass
class EpochPlan:
    """Per-sample augmentation directives for one epoch, stored columnar."""

    epoch: int
    sample_ids: np.ndarray
    class_ids: np.ndarray
    strengths: np.ndarray  # -1 marks pass-through originals
    seeds: np.ndarray

    def __len__(self) -> int:
        return len(self.sample_ids)

    def __iter__(self) -> Iterator[Directive]:
        for i in range(len(self.sample_ids)):
            s = int(self.strengths[i])
            yield Directive(
                sample_id=int(self.sample_ids[i]),
                class_id=int(self.class_ids[i]),
                augment=s >= 0,
                strength=max(s, 0),
                seed=int(self.seeds[i]),
            )

    @property
    def augmented_fraction(self) -> float:
        if len(self.sample_ids) == 0:
            return 0.0
        return float((self.strengths >= 0).mean())


def build_epoch_plan(
    labels: Sequence[int],
    levels: Sequence[int],
    augment_prob: float,
    rng: Stream,
    epoch: int = 0,
) -> EpochPlan:
    """Bernoulli(augment_prob) per sample; augmented samples carry their
    class's current level and a fresh seed.

    Draw order: one block of N gate uniforms, then one block of N seeds.
    """
    class_ids = np.asarray(labels, dtype=np.int64)
    if class_ids.ndim != 1:
        raise ValueError("labels must be a flat sequence")
    level_arr = np.asarray(levels, dtype=np.int64)
    if class_ids.size and (class_ids.min() < 0 or class_ids.max() >= level_arr.size):
        raise ValueError("label refers to a class with no level entry")
    n = class_ids.size
    gates = rng.randoms(n) < augment_prob
    seeds = rng.seed_bits_many(n)
    strengths = np.where(gates, level_arr[class_ids] if n else 0, -1).astype(np.int64)
    seeds = np.where(gates, seeds, 0)
    return EpochPlan(
        epoch=epoch,
        sample_ids=np.arange(n, dtype=np.int64),
        class_ids=class_ids,
        strengths=strengths,
        seeds=seeds,
    )


def materialize(
    plan: EpochPlan, get_image: Callable[[int], RasterImage]
) -> Iterator[tuple[int, RasterImage]]:
    """Stream (sample_id, image) pairs in plan order; lazy, re-runnable."""
    for d in plan:
        try:
            img = get_image(d.sample_id)
        except (KeyError, IndexError) as exc:
            raise KeyError(f"no image for sample_id {d.sample_id}") from exc
        if d.augment:
            img = apply_strength(img, d.strength, Stream(d.seed))
        yield d.sample_id, img


class ProbeEvaluator(Protocol):
    def evaluate(
        self, plans: Mapping[int, ProbePlan], trained_epochs: int
    ) -> dict[int, ProbeOutcome]: ...


class PredictorProbeEvaluator:
    """Evaluates probes by materializing each augmented image for a predictor."""

    def __init__(
        self,
        get_image: Callable[[int], RasterImage],
        predictor: Callable[[RasterImage], int],
    ):
        self.get_image = get_image
        self.predictor = predictor

    def evaluate(
        self, plans: Mapping[int, ProbePlan], trained_epochs: int
    ) -> dict[int, ProbeOutcome]:
        outcomes = {}
        for c, plan in plans.items():
            correct = tuple(
                count_correct(self.predictor, c, entry, self.get_image)
                for entry in plan.entries
            )
            outcomes[c] = ProbeOutcome(class_id=c, correct=correct)
        return outcomes


class CurriculumEngine:
    """Single source of truth for per-epoch state; the service wraps it 1:1.

    Stream layout under the config seed: probe plans draw from
    child("probes", epoch, class_id), epoch plans from child("plan", epoch).
    """

    def __init__(self, labels: Sequence[int], cfg: CurriculumConfig):
        self.labels = [int(y) for y in labels]
        if not self.labels:
            raise ValueError("need at least one sample")
        self.num_classes = max(self.labels) + 1
        by_class: dict[int, list[int]] = {c: [] for c in range(self.num_classes)}
        for i, y in enumerate(self.labels):
            if y < 0:
                raise ValueError("labels must be non-negative")
            by_class[y].append(i)
        for c, ids in by_class.items():
            if not ids:
                raise ValueError(f"class {c} has no samples; cannot probe it")
        self.samples_by_class = {c: tuple(ids) for c, ids in by_class.items()}
        self.cfg = cfg
        self.threshold = cfg.threshold
        self.table = LevelTable.zeros(self.num_classes)
        self.root = Stream(cfg.seed)

    @property
    def next_epoch(self) -> int:
        return self.table.epoch + 1

    def probe_plans(self) -> dict[int, ProbePlan]:
        epoch = self.next_epoch
        return {
            c: plan_probes(
                self.samples_by_class[c],
                self.table.levels[c],
                self.cfg.probe_count,
                self.root.child("probes", epoch, c),
                class_id=c,
            )
            for c in range(self.num_classes)
        }

    def apply_outcomes(self, outcomes: Mapping[int, ProbeOutcome]) -> tuple[int, ...]:
        update_table(
            self.table,
            outcomes,
            self.threshold,
            self.cfg.probe_count,
            max_level=self.cfg.max_strength,
        )
        if self.cfg.auto_tune_threshold and self.table.epoch == 20:
            self.threshold = auto_tune_threshold(
                self.table.history, self.threshold, self.table.epoch
            )
        return self.table.snapshot()

    def epoch_plan(self) -> EpochPlan:
        epoch = self.table.epoch
        return build_epoch_plan(
            self.labels,
            self.table.levels,
            self.cfg.augment_prob,
            self.root.child("plan", epoch),
            epoch=epoch,
        )


@dataclass
class RunResult:
    table: LevelTable
    threshold_trace: list[float] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    @property
    def history(self) -> list[tuple[int, ...]]:
        return self.table.history


def run(
    labels: Sequence[int],
    cfg: CurriculumConfig,
    *,
    get_image: Callable[[int], RasterImage] | None = None,
    probe_predictor: Callable[[RasterImage], int] | None = None,
    probe_evaluator: ProbeEvaluator | None = None,
    trainer: Callable[[int, Iterator[tuple[int, RasterImage]]], None] | None = None,
) -> RunResult:
    """Drive cfg.epochs full epochs: probe -> update -> plan -> train.

    Either probe_evaluator or (probe_predictor and get_image) must be given.
    """
    if probe_evaluator is None:
        if probe_predictor is None or get_image is None:
            raise ValueError(
                "need probe_evaluator, or probe_predictor together with get_image"
            )
        probe_evaluator = PredictorProbeEvaluator(get_image, probe_predictor)
    engine = CurriculumEngine(labels, cfg)
    timings = []
    trace = []
    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        plans = engine.probe_plans()
        try:
            outcomes = probe_evaluator.evaluate(plans, trained_epochs=epoch - 1)
        except Exception as exc:
            raise RuntimeError(f"probe evaluation failed at epoch {epoch}") from exc
        engine.apply_outcomes(outcomes)
        plan = engine.epoch_plan()
        if trainer is not None:
            if get_image is None:
                raise ValueError("trainer requires get_image")
            try:
                trainer(epoch, materialize(plan, get_image))
            except Exception as exc:
                raise RuntimeError(f"trainer failed at epoch {epoch}") from exc
        trace.append(engine.threshold)
        timings.append(
            {
                "epoch": epoch,
                "seconds": time.perf_counter() - started,
                "mean_level": sum(engine.table.levels) / engine.num_classes,
            }
        )
    manifest = {
        "config": {
            "augment_prob": cfg.augment_prob,
            "threshold": cfg.threshold,
            "probe_count": cfg.probe_count,
            "epochs": cfg.epochs,
            "max_strength": cfg.max_strength,
            "seed": cfg.seed,
            "auto_tune_threshold": cfg.auto_tune_threshold,
        },
        "num_classes": engine.num_classes,
        "num_samples": len(engine.labels),
        "final_threshold": engine.threshold,
        "epoch_timings": timings,
    }
    return RunResult(table=engine.table, threshold_trace=trace, manifest=manifest)
