"""Worked integration example: a toy training loop against a live sidecar.

Ten classes of color-coded noisy images, a nearest-mean-color "classifier",
five epochs of probe / report / train-on-augmented-stream.  Run directly:

    python -m trainer_client.example
"""

from __future__ import annotations

import io
import math
import sys

from PIL import Image

from .session import connect_stdio, epoch_cycle

NUM_CLASSES = 10
PER_CLASS = 20
SIZE = 12
EPOCHS = 5

# well-separated base colors, one per class
PALETTE = [
    (230, 40, 40), (40, 230, 40), (40, 40, 230), (230, 230, 40), (230, 40, 230),
    (40, 230, 230), (240, 140, 20), (140, 20, 240), (20, 140, 90), (120, 120, 120),
]


def _make_image(class_id: int, index: int) -> bytes:
    base = PALETTE[class_id]
    img = Image.new("RGB", (SIZE, SIZE))
    px = img.load()
    for y in range(SIZE):
        for x in range(SIZE):
            wiggle = ((x * 31 + y * 17 + index * 7) % 23) - 11
            px[x, y] = tuple(max(0, min(255, c + wiggle)) for c in base)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def _mean_color(png: bytes) -> tuple[float, float, float]:
    img = Image.open(io.BytesIO(png)).convert("RGB")
    raw = img.tobytes()
    n = len(raw) // 3
    return tuple(sum(raw[c::3]) / n for c in range(3))


class NearestColorModel:
    """Classifies by nearest class mean color; 'training' recenters the means."""

    def __init__(self):
        self.means = [tuple(float(v) for v in color) for color in PALETTE]

    def predict(self, png: bytes) -> int:
        color = _mean_color(png)
        best, best_d = 0, math.inf
        for c, mean in enumerate(self.means):
            d = sum((a - b) ** 2 for a, b in zip(color, mean))
            if d < best_d:
                best, best_d = c, d
        return best

    def train(self, stream, labels) -> int:
        sums = [[0.0, 0.0, 0.0] for _ in range(NUM_CLASSES)]
        counts = [0] * NUM_CLASSES
        seen = 0
        for sample_id, png in stream:
            c = labels[sample_id]
            color = _mean_color(png)
            for i in range(3):
                sums[c][i] += color[i]
            counts[c] += 1
            seen += 1
        for c in range(NUM_CLASSES):
            if counts[c]:
                self.means[c] = tuple(s / counts[c] for s in sums[c])
        return seen


def run_example(server_command=None, epochs: int = EPOCHS, seed: int = 11) -> list[int]:
    """Drive the full cycle; returns the final per-class level snapshot."""
    if server_command is None:
        server_command = [sys.executable, "-m", "curaug", "serve", "--stdio"]
    labels = [c for c in range(NUM_CLASSES) for _ in range(PER_CLASS)]
    images = {i: _make_image(labels[i], i) for i in range(len(labels))}
    model = NearestColorModel()

    session = connect_stdio(
        server_command,
        labels,
        config={"seed": seed, "probe_count": 2, "threshold": 0.6, "augment_prob": 0.5},
    )
    try:
        for epoch in range(1, epochs + 1):
            levels, stream = epoch_cycle(session, model.predict, images.__getitem__)
            seen = model.train(stream, labels)
            print(f"epoch {epoch}: trained on {seen} images, levels {levels}")
    finally:
        session.close()
    return levels


if __name__ == "__main__":
    run_example()
