"""Diagnostics computed from trainer-supplied arrays: classifier balance,
within-class feature alignment, and category accuracy breakdowns."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .longtail import CategoryMasks


def weight_norm_variance(weights) -> float:
    """Population variance of per-class L1 row norms of a classifier matrix."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] < 2:
        raise ValueError("need a (classes >= 2, features) matrix")
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    norms = np.abs(w).sum(axis=1)
    return float(np.var(norms))


@dataclass
class AlignmentResult:
    values: dict[int, float]
    skipped: list[int] = field(default_factory=list)  # classes with < 2 samples


def feature_alignment(vectors, labels) -> AlignmentResult:
    """Per-class mean pairwise cosine similarity over unordered same-class pairs."""
    x = np.asarray(vectors, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("vectors must be (n, d) with one label per row")
    norms = np.linalg.norm(x, axis=1)
    if (norms == 0).any():
        raise ValueError("zero vectors have no cosine direction")
    unit = x / norms[:, None]
    result = AlignmentResult(values={})
    for c in np.unique(y):
        rows = unit[y == c]
        n = rows.shape[0]
        if n < 2:
            result.skipped.append(int(c))
            continue
        gram = rows @ rows.T
        total = float(gram.sum() - np.trace(gram))
        result.values[int(c)] = total / (n * (n - 1))
    return result


def alignment_gain(base: dict[int, float], treated: dict[int, float]) -> dict[int, float]:
    """Per-class treated - base alignment."""
    if set(base) != set(treated):
        raise ValueError("base and treated must cover the same classes")
    return {c: treated[c] - base[c] for c in sorted(base)}


def accuracy_breakdown(predictions, labels, masks: CategoryMasks) -> dict[str, float]:
    """Sample-averaged accuracy overall and within many/med/few classes.

    Categories with no samples are omitted from the result.
    """
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(labels, dtype=np.int64)
    if pred.shape != true.shape or pred.ndim != 1:
        raise ValueError("predictions and labels must be equal-length vectors")
    if pred.size == 0:
        raise ValueError("need at least one sample")
    hits = pred == true
    out = {"all": float(hits.mean())}
    for name, classes in (("many", masks.many), ("med", masks.med), ("few", masks.few)):
        member = np.isin(true, sorted(classes))
        if member.any():
            out[name] = float(hits[member].mean())
    return out


def read_weights_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return np.asarray(rows, dtype=np.float64)


def read_features_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Feature vectors plus labels from columns f0..f{d-1},label."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "label":
            raise ValueError("last column must be 'label'")
        feats, labels = [], []
        for row in reader:
            if not row:
                continue
            feats.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
    return np.asarray(feats, dtype=np.float64), np.asarray(labels, dtype=np.int64)
