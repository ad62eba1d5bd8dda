"""Per-class learning levels: probe planning, correctness counting, updates.

Each class carries an integer level L in [0, 30].  Once per epoch the class
is probed at every strength 0..L with probe_count*(l+1) augmented samples
per strength; the level steps +1 only if every strength clears the
acceptance threshold, else -1, clamped to the valid range.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .compose import apply_strength
from .image import RasterImage
from .ops import MAGNITUDE_LEVELS
from .rng import Stream

MAX_LEVEL = MAGNITUDE_LEVELS


@dataclass
class LevelTable:
    """Current per-class levels plus the per-epoch history of snapshots."""

    levels: list[int]
    epoch: int = 0
    history: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        for lv in self.levels:
            if not 0 <= lv <= MAX_LEVEL:
                raise ValueError(f"level {lv} outside [0, {MAX_LEVEL}]")

    @classmethod
    def zeros(cls, num_classes: int) -> "LevelTable":
        if num_classes < 1:
            raise ValueError("need at least one class")
        return cls(levels=[0] * num_classes)

    @property
    def num_classes(self) -> int:
        return len(self.levels)

    def snapshot(self) -> tuple[int, ...]:
        return tuple(self.levels)


@dataclass(frozen=True)
class ProbeEntry:
    """Probes for one strength level: sample refs and per-probe seeds."""

    level: int
    refs: tuple[int, ...]
    seeds: tuple[int, ...]


@dataclass
class ProbePlan:
    """Probe layout for one class: levels 0..level, probe_count*(l+1) each.

    Entries are materialized lazily from the dedicated stream (the heavy
    simulated-dynamics path only ever reads the sizes).
    """

    class_id: int
    level: int
    probe_count: int
    sample_ids: tuple[int, ...]
    stream: Stream

    def entry_size(self, level: int) -> int:
        return self.probe_count * (level + 1)

    @property
    def total_probes(self) -> int:
        n = self.level
        return self.probe_count * (n + 1) * (n + 2) // 2

    @cached_property
    def entries(self) -> tuple[ProbeEntry, ...]:
        # Per level, ascending: all refs first, then all seeds.
        out = []
        n = len(self.sample_ids)
        for lv in range(self.level + 1):
            size = self.entry_size(lv)
            refs = tuple(self.sample_ids[self.stream.randint(n)] for _ in range(size))
            seeds = tuple(self.stream.seed_bits() for _ in range(size))
            out.append(ProbeEntry(level=lv, refs=refs, seeds=seeds))
        return tuple(out)


@dataclass(frozen=True)
class ProbeOutcome:
    """Correct-prediction counts per probed level, index 0 = level 0."""

    class_id: int
    correct: tuple[int, ...]


def plan_probes(
    sample_ids: Sequence[int],
    level: int,
    probe_count: int,
    rng: Stream,
    class_id: int = -1,
) -> ProbePlan:
    """Plan probes for one class. rng must be dedicated to this plan."""
    if len(sample_ids) == 0:
        raise ValueError("cannot probe an empty class")
    if probe_count < 1:
        raise ValueError("probe_count must be >= 1")
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level {level} outside [0, {MAX_LEVEL}]")
    return ProbePlan(
        class_id=class_id,
        level=level,
        probe_count=probe_count,
        sample_ids=tuple(sample_ids),
        stream=rng,
    )


def count_correct(
    predictor: Callable[[RasterImage], int],
    class_id: int,
    entry: ProbeEntry,
    get_image: Callable[[int], RasterImage],
) -> int:
    """How many strength-l augmented probes the predictor labels as class_id."""
    hits = 0
    for ref, seed in zip(entry.refs, entry.seeds):
        probe = apply_strength(get_image(ref), entry.level, Stream(seed))
        if predictor(probe) == class_id:
            hits += 1
    return hits


def update_level(
    level: int,
    outcome: ProbeOutcome,
    threshold: float,
    probe_count: int,
    *,
    strict: bool = True,
    max_level: int = MAX_LEVEL,
) -> int:
    """Step the level +1 if every probed strength passed, else -1, clamped.

    strict=True is the operational rule (a level fails when its correct
    count is <= threshold*probe_count*(l+1)); strict=False passes on
    equality.  The two differ only when the count lands exactly on the
    threshold.
    """
    if len(outcome.correct) != level + 1:
        raise ValueError(
            f"outcome covers {len(outcome.correct)} levels, expected {level + 1}"
        )
    passed = True
    for lv, v in enumerate(outcome.correct):
        size = probe_count * (lv + 1)
        if not 0 <= v <= size:
            raise ValueError(f"correct count {v} outside [0, {size}] at level {lv}")
        bar = threshold * size
        failed = v <= bar if strict else v < bar
        if failed:
            passed = False
            break
    nxt = level + 1 if passed else level - 1
    return max(0, min(max_level, nxt))


def update_table(
    table: LevelTable,
    outcomes: Mapping[int, ProbeOutcome],
    threshold: float,
    probe_count: int,
    *,
    strict: bool = True,
    max_level: int = MAX_LEVEL,
) -> LevelTable:
    """Apply update_level to every class, append a snapshot, advance the epoch."""
    if set(outcomes.keys()) != set(range(table.num_classes)):
        raise ValueError("outcomes must cover every class exactly once")
    table.levels = [
        update_level(
            table.levels[c],
            outcomes[c],
            threshold,
            probe_count,
            strict=strict,
            max_level=max_level,
        )
        for c in range(table.num_classes)
    ]
    table.epoch += 1
    table.history.append(table.snapshot())
    return table


def auto_tune_threshold(
    history: Iterable[tuple[int, ...]], threshold: float, epoch: int
) -> float:
    """Drop the acceptance threshold by 0.1 if no class has ever left level 0.

    The rule is evaluated against the first 20 epochs; later epochs leave the
    threshold untouched.  Floor at 0.
    """
    if epoch > 20:
        return threshold
    for snapshot in history:
        if any(lv > 0 for lv in snapshot):
            return threshold
    return max(0.0, threshold - 0.1)


def history_rows(table: LevelTable) -> list[tuple[int, int, int]]:
    """(epoch, class_id, level) rows, one per class per recorded epoch."""
    rows = []
    for e, snapshot in enumerate(table.history, start=1):
        for c, lv in enumerate(snapshot):
            rows.append((e, c, lv))
    return rows


def write_history_csv(table: LevelTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "class_id", "level"])
        writer.writerows(history_rows(table))


def read_history_csv(path) -> list[tuple[int, int, int]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["epoch", "class_id", "level"]:
            raise ValueError(f"unexpected history header: {header}")
        return [(int(e), int(c), int(lv)) for e, c, lv in reader]
