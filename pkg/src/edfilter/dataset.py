"""Keyword-count classification data: construction, CSV I/O, synthesis, chunking, folds."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Input data violates the count-matrix contract."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows of non-negative keyword counts with one class label per row.

    Immutable after construction; the arrays are marked read-only.
    """

    feature_names: tuple
    counts: np.ndarray  # (n_rows, n_features) int64
    labels: np.ndarray  # (n_rows,) int64
    n_classes: int

    def __post_init__(self):
        names = tuple(self.feature_names)
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[1] != len(names):
            raise DataError("count matrix shape does not match feature names")
        if labels.ndim != 1 or labels.shape[0] != counts.shape[0]:
            raise DataError("label count does not match row count")
        if counts.size and counts.min() < 0:
            raise DataError("negative count in feature matrix")
        if self.n_classes < 2:
            raise DataError("at least two classes are required")
        if labels.size == 0:
            raise DataError("empty feature matrix")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise DataError("label outside [0, n_classes)")
        present = np.bincount(labels, minlength=self.n_classes)
        missing = np.flatnonzero(present == 0)
        if missing.size:
            raise DataError(f"class {missing[0]} has no rows (label gap)")
        counts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.counts.shape[0]

    @property
    def n_features(self) -> int:
        return self.counts.shape[1]

    def take_rows(self, row_indices) -> "FeatureMatrix":
        """Row-subset matrix; keeps feature names and n_classes."""
        idx = np.asarray(row_indices, dtype=np.int64)
        return FeatureMatrix(self.feature_names, self.counts[idx], self.labels[idx], self.n_classes)


@dataclass(frozen=True)
class KeywordMap:
    """Mapping feature name -> keywords whose counts are summed into that feature."""

    entries: dict

    def __post_init__(self):
        if not self.entries:
            raise DataError("empty keyword map")
        for name, keywords in self.entries.items():
            if not keywords:
                raise DataError(f"feature {name!r} has no keywords")
            if any(not isinstance(k, str) or not k for k in keywords):
                raise DataError(f"feature {name!r} has an empty keyword")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the synthetic count-data generator."""

    n_features: int
    n_informative: int
    n_rows: int
    n_classes: int
    noise_rate: float = 0.0
    max_count: int = 10
    seed: int = 0

    def __post_init__(self):
        if min(self.n_features, self.n_rows, self.max_count) < 1:
            raise DataError("n_features, n_rows, and max_count must be positive")
        if not 0 <= self.n_informative <= self.n_features:
            raise DataError("n_informative must be in [0, n_features]")
        if self.n_classes < 2:
            raise DataError("n_classes must be at least 2")
        if self.n_rows < self.n_classes:
            raise DataError("need at least one row per class")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise DataError("noise_rate must be in [0, 1]")

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "n_informative": self.n_informative,
            "n_rows": self.n_rows,
            "n_classes": self.n_classes,
            "noise_rate": self.noise_rate,
            "max_count": self.max_count,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified fold index per row."""

    fold_of_row: np.ndarray
    k: int

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row != fold)


def build_counts(user_posts, km: KeywordMap, labels) -> FeatureMatrix:
    """Aggregate keyword occurrences into one count row per user.

    ``user_posts`` is a list (per user) of posts, each post a token sequence.
    A cell (user, feature) is the total number of exact whole-token matches of
    the feature's keywords across all of that user's posts. Matching is
    case-insensitive; tokens are expected pre-lowercased.
    """
    if len(labels) != len(user_posts):
        raise DataError("label count does not match user count")
    names = tuple(km.entries)
    keyword_to_feature = {}
    for col, name in enumerate(names):
        for kw in km.entries[name]:
            keyword_to_feature.setdefault(kw.lower(), []).append(col)
    counts = np.zeros((len(user_posts), len(names)), dtype=np.int64)
    for u, posts in enumerate(user_posts):
        for post in posts:
            for token in post:
                for col in keyword_to_feature.get(token.lower(), ()):
                    counts[u, col] += 1
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise DataError("no users")
    return FeatureMatrix(names, counts, labels, int(labels.max()) + 1)


def load_csv(path) -> FeatureMatrix:
    """Load a count matrix from CSV: header of feature names plus final column "y"."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: missing header row") from None
        if len(header) < 2 or header[-1] != "y":
            raise DataError(f"{path}: header must end with label column 'y'")
        names = tuple(header[:-1])
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} columns, got {len(rec)}")
            try:
                values = [int(cell) for cell in rec]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer cell") from None
            if any(v < 0 for v in values[:-1]):
                raise DataError(f"{path}:{lineno}: negative count")
            if values[-1] < 0:
                raise DataError(f"{path}:{lineno}: negative class label")
            rows.append(values[:-1])
            labels.append(values[-1])
    if not rows:
        raise DataError(f"{path}: no data rows")
    labels = np.asarray(labels, dtype=np.int64)
    n_classes = int(labels.max()) + 1
    if n_classes < 2:
        raise DataError(f"{path}: single class in labels")
    present = np.bincount(labels, minlength=n_classes)
    missing = np.flatnonzero(present == 0)
    if missing.size:
        raise DataError(f"{path}: label gap, class {missing[0]} absent")
    return FeatureMatrix(names, np.asarray(rows, dtype=np.int64), labels, n_classes)


def save_csv(m: FeatureMatrix, path) -> None:
    """Write a matrix in the load_csv format (UTF-8, LF line endings)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(m.feature_names) + ["y"])
        for row, y in zip(m.counts, m.labels):
            writer.writerow([int(v) for v in row] + [int(y)])


# Class-conditional hit rates for planted signal vs background noise.
_P_SIGNAL = 0.55
_P_BACKGROUND = 0.08


def synth_generate(spec: SynthSpec) -> FeatureMatrix:
    """Deterministic synthetic count matrix.

    The first ``n_informative`` features are drawn from class-conditional
    binomials: feature i fires at a high rate for its mode class
    (i mod n_classes) and a low rate otherwise. With probability
    ``noise_rate`` a row draws its informative cells under a random class
    instead of its own. Remaining features are class-independent noise.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_rows
    # Guarantee every class appears.
    labels = np.concatenate([
        np.arange(spec.n_classes, dtype=np.int64),
        rng.integers(0, spec.n_classes, n - spec.n_classes),
    ])
    rng.shuffle(labels)

    effective = labels.copy()
    noisy = rng.random(n) < spec.noise_rate
    effective[noisy] = rng.integers(0, spec.n_classes, int(noisy.sum()))

    counts = np.zeros((n, spec.n_features), dtype=np.int64)
    for i in range(spec.n_informative):
        p = np.where(effective == i % spec.n_classes, _P_SIGNAL, _P_BACKGROUND)
        counts[:, i] = rng.binomial(spec.max_count, p)
    for i in range(spec.n_informative, spec.n_features):
        base = rng.uniform(0.05, 0.4)
        counts[:, i] = rng.binomial(spec.max_count, base)

    names = tuple(f"f{i + 1}" for i in range(spec.n_features))
    return FeatureMatrix(names, counts, labels, spec.n_classes)


def chunk(m: FeatureMatrix, chunk_size: int, seed: int) -> list:
    """Seeded shuffled partition into chunks of ``chunk_size`` rows.

    Chunks missing any class are discarded; the trailing remainder chunk is
    kept under the same rule.
    """
    if chunk_size < m.n_classes:
        raise DataError("chunk_size must be at least n_classes")
    if chunk_size > m.n_rows:
        raise DataError("chunk_size exceeds row count")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m.n_rows)
    chunks = []
    for start in range(0, m.n_rows, chunk_size):
        idx = perm[start:start + chunk_size]
        if np.unique(m.labels[idx]).size == m.n_classes:
            chunks.append(m.take_rows(idx))
    return chunks


def stratified_folds(m: FeatureMatrix, k: int, seed: int) -> FoldAssignment:
    """Deterministic stratified k-fold assignment; per-class fold sizes differ by <= 1."""
    if k < 2:
        raise DataError("k must be at least 2")
    rng = np.random.default_rng(seed)
    fold_of_row = np.empty(m.n_rows, dtype=np.int64)
    for c in range(m.n_classes):
        idx = np.flatnonzero(m.labels == c)
        if idx.size < k:
            raise DataError(f"class {c} has {idx.size} rows, fewer than k={k}")
        rng.shuffle(idx)
        fold_of_row[idx] = np.arange(idx.size) % k
    return FoldAssignment(fold_of_row, k)
