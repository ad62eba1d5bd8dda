"""The dual route: vectorized production ops vs the scalar reference path.

Byte equality here is what lets the committed goldens (frozen from the
scalar path) stand in for the production path in regressions.
"""

import pytest

from curaug.image import random_image
from curaug.ops import apply_op, magnitude, op_catalog
from curaug.rng import Stream

from scalar_reference import scalar_apply_op

SIZES = [(13, 9), (1, 1), (2, 5), (17, 17)]
STRENGTHS = [1, 8, 15, 23, 30]


@pytest.mark.parametrize("spec", op_catalog(), ids=lambda s: s.kind.value)
def test_production_equals_scalar_reference(spec):
    for i, (w, h) in enumerate(SIZES):
        img = random_image(w, h, Stream("parity", i))
        for s in STRENGTHS:
            m = magnitude(spec.kind, s)
            fast = apply_op(img, spec.kind, m, Stream("op", spec.kind.value, s))
            slow = scalar_apply_op(img, spec.kind, m, Stream("op", spec.kind.value, s))
            assert fast == slow, f"{spec.kind.value} diverged at s={s} size={w}x{h}"
