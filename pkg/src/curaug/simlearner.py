"""A closed-form stand-in classifier for desk-scale curriculum experiments.

Correctness probability is logistic in (per-class learning rate x epochs
trained - difficulty x probe strength), so head classes with larger rates
climb the level curriculum faster, without any real model in the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .curriculum import CurriculumConfig, RunResult, run
from .levels import ProbeOutcome, ProbePlan
from .longtail import ClassProfile, expand_labels
from .rng import Stream


@dataclass(frozen=True)
class SimLearnerParams:
    learn_rates: tuple[float, ...]  # per-class, larger = learns faster
    difficulty: float  # probability decay per strength level
    seed: int = 0

    def __post_init__(self):
        if not self.learn_rates:
            raise ValueError("need at least one class rate")
        for k in self.learn_rates:
            if k <= 0:
                raise ValueError("learning rates must be positive")
        if self.difficulty < 0:
            raise ValueError("difficulty must be >= 0")

    @property
    def num_classes(self) -> int:
        return len(self.learn_rates)

    @classmethod
    def from_profile(
        cls,
        profile: ClassProfile,
        rate_scale: float = 0.004,
        difficulty: float = 0.8,
        seed: int = 0,
    ) -> "SimLearnerParams":
        # log frequency gives head classes the faster rate, tail the slower
        rates = tuple(rate_scale * math.log(1.0 + n) for n in profile.counts)
        return cls(learn_rates=rates, difficulty=difficulty, seed=seed)


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def sim_accuracy(params: SimLearnerParams, class_id: int, strength: int, epoch: int) -> float:
    """P(correct) = logistic(rate_c * epoch - difficulty * strength)."""
    if strength < 0 or epoch < 0:
        raise ValueError("strength and epoch must be >= 0")
    x = params.learn_rates[class_id] * epoch - params.difficulty * strength
    p = _logistic(x)
    return min(1.0, max(0.0, p))


def sim_predict(
    params: SimLearnerParams, class_id: int, strength: int, epoch: int, rng: Stream
) -> int:
    """The true class with probability sim_accuracy, else a uniform wrong class."""
    p = sim_accuracy(params, class_id, strength, epoch)
    if rng.random() < p:
        return class_id
    if params.num_classes == 1:
        return -1  # no wrong class exists; return an out-of-range marker
    other = rng.randint(params.num_classes - 1)
    return other if other < class_id else other + 1


class SimulatedProbeEvaluator:
    """Vectorized probe outcomes for the simulated learner.

    Per (epoch, class) the uniforms for level l occupy fixed positions
    probe_count*l*(l+1)/2 .. probe_count*(l+1)*(l+2)/2 of a keyed stream, so
    runs that differ only in learning rate share their randomness draw for
    draw (common random numbers).
    """

    def __init__(self, params: SimLearnerParams):
        self.params = params
        self._root = Stream(params.seed, "sim-probes")

    def evaluate(
        self, plans: Mapping[int, ProbePlan], trained_epochs: int
    ) -> dict[int, ProbeOutcome]:
        outcomes = {}
        for c, plan in plans.items():
            u = self._root.child(trained_epochs + 1, c).randoms(plan.total_probes)
            correct = []
            pos = 0
            for lv in range(plan.level + 1):
                size = plan.entry_size(lv)
                p = sim_accuracy(self.params, c, lv, trained_epochs)
                correct.append(int((u[pos : pos + size] < p).sum()))
                pos += size
            outcomes[c] = ProbeOutcome(class_id=c, correct=tuple(correct))
        return outcomes


def run_dynamics(
    profile: ClassProfile,
    cfg: CurriculumConfig,
    params: SimLearnerParams,
    plan_samples_per_class: int = 4,
) -> RunResult:
    """Drive the full epoch loop with the simulated learner; returns level history.

    The epoch plan runs over a capped per-class sample universe (the trainer
    is a no-op here, so plan size only affects cost, not level dynamics).
    """
    if params.num_classes != profile.num_classes:
        raise ValueError("params and profile disagree on the number of classes")
    labels = expand_labels(profile, per_class_cap=plan_samples_per_class)
    evaluator = SimulatedProbeEvaluator(params)
    return run(labels, cfg, probe_evaluator=evaluator)


def decile_means(history_snapshot, num_deciles: int = 10) -> list[float]:
    """Mean level per class-index decile (head decile first)."""
    n = len(history_snapshot)
    if n < num_deciles:
        raise ValueError("need at least one class per decile")
    out = []
    for d in range(num_deciles):
        lo = d * n // num_deciles
        hi = (d + 1) * n // num_deciles
        chunk = history_snapshot[lo:hi]
        out.append(sum(chunk) / len(chunk))
    return out
