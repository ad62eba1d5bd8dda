#!/usr/bin/env python3
"""Freeze the golden-image suite from the scalar reference path.

Run once; the outputs under tests/goldens/ are committed and the regression
test holds the fast production path to them byte-exactly.
"""

import sys
from pathlib import Path

TESTS = Path(__file__).resolve().parent.parent / "tests"
sys.path.insert(0, str(TESTS))

from golden_spec import (  # noqa: E402
    GOLDEN_DIR,
    golden_magnitude,
    golden_path,
    golden_seed_tokens,
    golden_source,
)
from scalar_reference import scalar_apply_op  # noqa: E402

from curaug.image import save_png  # noqa: E402
from curaug.ops import op_catalog  # noqa: E402
from curaug.rng import Stream  # noqa: E402


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    source = golden_source()
    save_png(source, GOLDEN_DIR / "source.png")
    for spec in op_catalog():
        out = scalar_apply_op(
            source,
            spec.kind,
            golden_magnitude(spec.kind),
            Stream(*golden_seed_tokens(spec.kind)),
        )
        save_png(out, golden_path(spec.kind))
        print(f"froze {golden_path(spec.kind).name}")


if __name__ == "__main__":
    main()
