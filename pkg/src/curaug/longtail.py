"""Long-tailed class profiles and the many/med/few evaluation split."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .rng import Stream

MANY_MIN_EXCLUSIVE = 100  # "many" = strictly more than 100 samples
FEW_MAX_EXCLUSIVE = 20  # "few" = strictly fewer than 20


@dataclass(frozen=True)
class ClassProfile:
    """Per-class sample counts, sorted non-increasing (head class first)."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) < 1:
            raise ValueError("profile needs at least one class")
        for n in self.counts:
            if n < 1:
                raise ValueError(f"class counts must be positive, got {n}")
        if any(a < b for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("counts must be non-increasing")

    @property
    def num_classes(self) -> int:
        return len(self.counts)

    @property
    def n_max(self) -> int:
        return self.counts[0]

    @property
    def n_min(self) -> int:
        return self.counts[-1]

    @property
    def imbalance_ratio(self) -> float:
        return self.n_max / self.n_min

    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class CategoryMasks:
    many: frozenset[int]
    med: frozenset[int]
    few: frozenset[int]


def exp_profile(num_classes: int, n_max: int, imbalance: float) -> ClassProfile:
    """Exponential decay: counts[k] = round(n_max * imbalance**(-k/(C-1))).

    Endpoints are forced exact: counts[0] = n_max, counts[C-1] = round(n_max/imbalance).
    """
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if imbalance < 1:
        raise ValueError("imbalance ratio must be >= 1")
    if n_max < imbalance:
        raise ValueError("n_max must be >= imbalance so the tail count stays >= 1")
    counts = []
    for k in range(num_classes):
        value = n_max * imbalance ** (-k / (num_classes - 1))
        counts.append(round(value))
    counts[0] = n_max
    counts[-1] = round(n_max / imbalance)
    if counts[-1] < 1:
        raise ValueError("parameters produce an empty tail class")
    return ClassProfile(tuple(counts))


def pareto_profile(
    num_classes: int, n_max: int, n_min: int, alpha: float = 0.6
) -> ClassProfile:
    """Power-law decay (k+1)**(-1/alpha), affinely rescaled to hit both endpoints."""
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if not n_max >= n_min >= 1:
        raise ValueError("need n_max >= n_min >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    shape = [(k + 1) ** (-1.0 / alpha) for k in range(num_classes)]
    span = shape[0] - shape[-1]
    if span <= 0:
        raise ValueError("degenerate power-law shape")
    scale = (n_max - n_min) / span
    offset = n_max - scale * shape[0]
    counts = [round(scale * t + offset) for t in shape]
    counts[0] = n_max
    counts[-1] = n_min
    # rounding can leave a one-off wiggle on a nearly flat stretch
    for k in range(1, num_classes):
        counts[k] = min(counts[k], counts[k - 1])
    counts[-1] = max(counts[-1], n_min)
    return ClassProfile(tuple(counts))


def subsample(labels, profile: ClassProfile, rng: Stream) -> list[int]:
    """Pick exactly counts[c] sample ids per class, uniformly without replacement.

    Returns kept sample ids in ascending order; deterministic under the stream.
    """
    by_class: dict[int, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(int(label), []).append(i)
    kept: list[int] = []
    for c in range(profile.num_classes):
        want = profile.counts[c]
        have = by_class.get(c, [])
        if len(have) < want:
            raise ValueError(
                f"class {c} has {len(have)} samples, profile wants {want}"
            )
        picks = rng.child("class", c).sample_without_replacement(len(have), want)
        kept.extend(have[j] for j in picks)
    kept.sort()
    return kept


def categorize(profile: ClassProfile) -> CategoryMasks:
    many, med, few = set(), set(), set()
    for c, n in enumerate(profile.counts):
        if n > MANY_MIN_EXCLUSIVE:
            many.add(c)
        elif n < FEW_MAX_EXCLUSIVE:
            few.add(c)
        else:
            med.add(c)
    return CategoryMasks(frozenset(many), frozenset(med), frozenset(few))


def log_affine_deviation(profile: ClassProfile) -> float:
    """Max |count - ideal| in count units against the exact log-linear decay."""
    counts = profile.counts
    c = profile.num_classes
    ratio = counts[0] / counts[-1]
    worst = 0.0
    for k, n in enumerate(counts):
        ideal = counts[0] * ratio ** (-k / (c - 1))
        worst = max(worst, abs(n - ideal))
    return worst


def write_profile_csv(profile: ClassProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_id", "count"])
        for c, n in enumerate(profile.counts):
            writer.writerow([c, n])


def read_profile_csv(path) -> ClassProfile:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["class_id", "count"]:
            raise ValueError(f"unexpected profile header: {header}")
        rows = [(int(c), int(n)) for c, n in reader]
    rows.sort()
    if [c for c, _ in rows] != list(range(len(rows))):
        raise ValueError("profile rows must cover class ids 0..C-1")
    return ClassProfile(tuple(n for _, n in rows))


def expand_labels(profile: ClassProfile, per_class_cap: int | None = None) -> list[int]:
    """A label vector realizing the profile (class c repeated counts[c] times)."""
    labels = []
    for c, n in enumerate(profile.counts):
        take = n if per_class_cap is None else min(n, per_class_cap)
        labels.extend([c] * take)
    return labels
