"""Sequential strength-s augmentation: draw s ops uniformly, compose at level s."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .image import RasterImage
from .ops import (
    MAGNITUDE_LEVELS,
    OpKind,
    apply_op,
    catalog_index,
    kind_at,
    magnitude,
    op_catalog,
)
from .rng import Stream


class ApplyOrder(Enum):
    AS_DRAWN = "as_drawn"
    SORTED_BY_INDEX = "sorted_by_index"


@dataclass(frozen=True)
class OpSequence:
    """The s operations drawn for one augmentation, in draw order."""

    strength: int
    ops: tuple[tuple[OpKind, float | None], ...]

    def __post_init__(self):
        if len(self.ops) != self.strength:
            raise ValueError("sequence length must equal its strength")

    def kinds(self) -> tuple[OpKind, ...]:
        return tuple(kind for kind, _ in self.ops)


def sample_sequence(s: int, rng: Stream, levels: int = MAGNITUDE_LEVELS) -> OpSequence:
    """Draw s operation kinds i.i.d. uniform over the catalog, with replacement."""
    if not 0 <= s <= levels:
        raise ValueError(f"strength {s} outside [0, {levels}]")
    catalog = op_catalog()
    drawn = []
    for _ in range(s):
        kind = catalog[rng.randint(len(catalog))].kind
        drawn.append((kind, magnitude(kind, s, levels)))
    return OpSequence(strength=s, ops=tuple(drawn))


def apply_strength(img: RasterImage, s: int, rng: Stream) -> RasterImage:
    """O(x; s): the composition of s uniformly drawn ops at magnitude level s.

    Draw order: the s kind indices first, then each op's internal draws in
    application order, all from the one stream, so a replay that re-derives
    the stream reproduces the output byte-exactly.
    """
    seq = sample_sequence(s, rng)
    return apply_strength_ordered(img, seq, ApplyOrder.AS_DRAWN, rng)


def apply_strength_ordered(
    img: RasterImage, seq: OpSequence, order: ApplyOrder, rng: Stream
) -> RasterImage:
    """Apply a drawn sequence as-is or in ascending catalog-index order."""
    ops = seq.ops
    if order is ApplyOrder.SORTED_BY_INDEX:
        ops = tuple(sorted(ops, key=lambda km: catalog_index(km[0])))
    out = img
    for kind, m in ops:
        out = apply_op(out, kind, m, rng)
    return out


def sequence_log_line(sample_id, seq: OpSequence) -> str:
    """Audit line: sample_id,s,k_1,...,k_s with 1-based catalog indices."""
    indices = [str(catalog_index(kind) + 1) for kind, _ in seq.ops]
    return ",".join([str(sample_id), str(seq.strength), *indices])


def parse_log_line(line: str, levels: int = MAGNITUDE_LEVELS) -> tuple[str, OpSequence]:
    parts = line.strip().split(",")
    if len(parts) < 2:
        raise ValueError(f"malformed sequence log line: {line!r}")
    sample_id = parts[0]
    s = int(parts[1])
    indices = [int(p) for p in parts[2:]]
    if len(indices) != s:
        raise ValueError(f"log line strength {s} but {len(indices)} ops: {line!r}")
    ops = []
    for idx in indices:
        kind = kind_at(idx - 1)
        ops.append((kind, magnitude(kind, s, levels)))
    return sample_id, OpSequence(strength=s, ops=tuple(ops))
