"""Multinomial Naive Bayes wrapper evaluator.

Produces the cross-validated pooled accuracy that scores feature subsets
during search. Fit/predict/accuracy are pure given the CV seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataError, FeatureMatrix, FoldAssignment, stratified_folds


@dataclass(frozen=True)
class CvConfig:
    k: int = 5
    seed: int = 0
    alpha: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class MnbModel:
    """Per-class log priors and per-feature log likelihoods over a feature subset."""

    log_priors: np.ndarray       # (n_classes,)
    log_likelihoods: np.ndarray  # (n_classes, len(subset))
    alpha: float
    subset: tuple


def mnb_fit(m: FeatureMatrix, subset, train_rows, alpha: float = 1.0) -> MnbModel:
    """Fit with Laplace smoothing.

    likelihood(c, i) = (alpha + sum of feature-i counts in class c)
                     / (alpha * |subset| + sum of all subset counts in class c)
    Every class must be present in the training rows.
    """
    subset = tuple(subset)
    if not subset:
        raise ValueError("empty feature subset")
    train_rows = np.asarray(train_rows, dtype=np.int64)
    if train_rows.size == 0:
        raise DataError("empty training set")
    y = m.labels[train_rows]
    class_counts = np.bincount(y, minlength=m.n_classes)
    if np.count_nonzero(class_counts) < 2:
        raise DataError("single-class training set")
    if (class_counts == 0).any():
        missing = int(np.flatnonzero(class_counts == 0)[0])
        raise DataError(f"class {missing} absent from training rows")
    sub = m.counts[np.ix_(train_rows, np.asarray(subset))]
    feat_sums = np.zeros((m.n_classes, len(subset)), dtype=np.float64)
    for c in range(m.n_classes):
        feat_sums[c] = sub[y == c].sum(axis=0)
    log_priors = np.log(class_counts / train_rows.size)
    denom = alpha * len(subset) + feat_sums.sum(axis=1, keepdims=True)
    log_likelihoods = np.log((alpha + feat_sums) / denom)
    return MnbModel(log_priors, log_likelihoods, alpha, subset)


def _log_posteriors(model: MnbModel, rows: np.ndarray) -> np.ndarray:
    sub = rows[:, np.asarray(model.subset)]
    return sub @ model.log_likelihoods.T + model.log_priors


def mnb_predict(model: MnbModel, row) -> int:
    """Argmax class; ties resolve to the lowest class id."""
    row = np.asarray(row, dtype=np.float64).reshape(1, -1)
    return int(np.argmax(_log_posteriors(model, row)[0]))


def predict_rows(model: MnbModel, rows) -> np.ndarray:
    """Vectorized mnb_predict over full-width rows."""
    rows = np.asarray(rows, dtype=np.float64)
    return np.argmax(_log_posteriors(model, rows), axis=1)


def accuracy(m: FeatureMatrix, subset, cv: CvConfig, folds: FoldAssignment | None = None) -> float:
    """Stratified k-fold pooled accuracy: total correct / total predictions.

    For single-label prediction every prediction is exactly one true or one
    false positive, so this equals the TP/(TP+FP) ratio summed over classes.
    """
    subset = tuple(subset)
    if not subset:
        raise ValueError("empty feature subset")
    if folds is None:
        folds = stratified_folds(m, cv.k, cv.seed)
    correct = 0
    for fold in range(folds.k):
        train_idx = folds.train_rows(fold)
        test_idx = folds.test_rows(fold)
        model = mnb_fit(m, subset, train_idx, cv.alpha)
        preds = predict_rows(model, m.counts[test_idx])
        correct += int((preds == m.labels[test_idx]).sum())
    return correct / m.n_rows
