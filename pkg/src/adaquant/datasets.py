"""Streaming CSV ingestion and synthetic quantized datasets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .noise import NoiseModel
from .quantizer import QuantizerSpec


class DatasetError(ValueError):
    """Malformed dataset; the message carries the 1-based file line number."""


@dataclass(frozen=True, eq=False)
class DatasetRow:
    features: np.ndarray
    label: int


def ingest_csv(path, d: int, m: int) -> Iterator[DatasetRow]:
    """Yield rows of a ``f1,...,fd,label`` CSV in file order.

    Rows are parsed lazily, one at a time, so memory use does not depend on
    the file length. Labels must lie in ``1..m+1``.
    """
    expected = [f"f{i}" for i in range(1, d + 1)] + ["label"]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: line 1: missing header")
        header = [h.strip() for h in header]
        if header != expected:
            raise DatasetError(f"{path}: line 1: expected header {','.join(expected)}, "
                               f"got {','.join(header)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 1:
                raise DatasetError(f"{path}: line {line}: expected {d + 1} columns, got {len(row)}")
            try:
                feats = np.array([float(c) for c in row[:d]])
            except ValueError:
                raise DatasetError(f"{path}: line {line}: non-numeric feature") from None
            if not np.all(np.isfinite(feats)):
                raise DatasetError(f"{path}: line {line}: non-finite feature")
            try:
                label = float(row[d])
            except ValueError:
                raise DatasetError(f"{path}: line {line}: non-numeric label") from None
            if not (math.isfinite(label) and label == int(label) and 1 <= label <= m + 1):
                raise DatasetError(f"{path}: line {line}: label {row[d].strip()} outside 1..{m + 1}")
            yield DatasetRow(feats, int(label))


def synthetic_quantized(theta, quantizer: QuantizerSpec, noise: NoiseModel, n: int, seed: int,
                        amplitude: float = 1.0, flip_fraction: float = 0.0):
    """Draw ``(X, y)`` from ``y = S(x' theta + eps)`` with uniform features.

    With ``flip_fraction > 0`` the labels of the rows whose latent value is
    farthest from any threshold (the most confident cases) are overwritten by
    the level farthest from the best prediction: an adversarial corruption
    rather than random label noise.
    """
    theta = np.asarray(theta, dtype=float)
    rng = np.random.default_rng(seed)
    X = rng.uniform(-amplitude, amplitude, (n, theta.size))
    s = X @ theta
    ts = np.asarray(quantizer.thresholds)
    y = np.searchsorted(ts, s + noise.sample(rng, n), side="left") + 1
    n_flip = int(round(flip_fraction * n))
    if n_flip:
        margin = np.min(np.abs(s[:, None] - ts[None, :]), axis=1)
        idx = np.argsort(-margin, kind="stable")[:n_flip]
        best = np.searchsorted(ts, s[idx], side="left") + 1
        y[idx] = np.where(best - 1 >= quantizer.levels - best, 1, quantizer.levels)
    return X, y


def write_csv(path, X, y) -> None:
    d = X.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(1, d + 1)] + ["label"])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
