"""Plug-in entropy, conditional entropy, and information gain over discretized counts.

All logarithms are base 2; quantities are in bits. Joint information gain for
a feature subset is estimated by encoding each row's tuple of discretized
codes as a single categorical value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureMatrix


@dataclass(frozen=True)
class DiscretizedColumn:
    values: np.ndarray  # categorical codes, all < n_bins
    n_bins: int


@dataclass(frozen=True)
class RankedFeatures:
    """Feature indices sorted by descending singleton information gain."""

    order: np.ndarray
    scores: np.ndarray  # IG in bits, aligned with order, non-increasing


def discretize(column, scheme: str = "sparse", bins: int = 3) -> DiscretizedColumn:
    """Map counts to categorical codes.

    ``sparse`` (default): 0 -> 0, 1 -> 1, >=2 -> 2, three bins.
    ``equal_width``: ``bins`` equal-width bins over the observed [min, max] range.
    """
    values = np.asarray(column, dtype=np.int64)
    if values.size and values.min() < 0:
        raise ValueError("counts must be non-negative")
    if scheme == "sparse":
        return DiscretizedColumn(np.minimum(values, 2), 3)
    if scheme == "equal_width":
        if bins < 1:
            raise ValueError("bins must be positive")
        lo, hi = values.min(), values.max()
        if hi == lo:
            return DiscretizedColumn(np.zeros_like(values), bins)
        width = (hi - lo) / bins
        codes = np.clip(((values - lo) / width).astype(np.int64), 0, bins - 1)
        return DiscretizedColumn(codes, bins)
    raise ValueError(f"unknown discretization scheme {scheme!r}")


def entropy(labels) -> float:
    """Empirical Shannon entropy in bits, with 0*log(0) = 0."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("empty label list")
    counts = np.bincount(labels)
    p = counts[counts > 0] / labels.size
    return float(-(p * np.log2(p)).sum())


def conditional_entropy(col: DiscretizedColumn, labels) -> float:
    """H(Y | F) from the empirical joint table of codes and labels, in bits."""
    labels = np.asarray(labels, dtype=np.int64)
    if col.values.shape[0] != labels.shape[0]:
        raise ValueError("column and labels have different lengths")
    n = labels.size
    joint = np.zeros((col.n_bins, int(labels.max()) + 1), dtype=np.int64)
    np.add.at(joint, (col.values, labels), 1)
    row_totals = joint.sum(axis=1)
    nz = row_totals > 0
    p_y_given_f = joint[nz] / row_totals[nz, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p_y_given_f > 0, p_y_given_f * np.log2(p_y_given_f), 0.0)
    h_rows = -terms.sum(axis=1)
    return float((row_totals[nz] / n * h_rows).sum())


def joint_encode(cols) -> DiscretizedColumn:
    """Encode each row's tuple of codes as one categorical code.

    Distinct observed tuples map to distinct codes; unobserved tuples get none,
    so n_bins is bounded by the row count.
    """
    cols = list(cols)
    if not cols:
        raise ValueError("joint_encode needs at least one column")
    if len(cols) == 1:
        return cols[0]
    stacked = np.stack([c.values for c in cols], axis=1)
    _, codes = np.unique(stacked, axis=0, return_inverse=True)
    return DiscretizedColumn(codes.astype(np.int64), int(codes.max()) + 1)


def info_gain(m: FeatureMatrix, subset, scheme: str = "sparse", bins: int = 3) -> float:
    """IG(Y; subset) = H(Y) - H(Y | joint-encoded subset columns), in bits."""
    subset = tuple(subset)
    if not subset:
        raise ValueError("empty feature subset")
    cols = [discretize(m.counts[:, i], scheme, bins) for i in subset]
    ig = entropy(m.labels) - conditional_entropy(joint_encode(cols), m.labels)
    if -1e-12 < ig < 0.0:
        ig = 0.0
    return ig


def rank_features(m: FeatureMatrix, scheme: str = "sparse", bins: int = 3) -> RankedFeatures:
    """Singleton IG per feature, sorted descending; ties broken by ascending index."""
    scores = np.array([info_gain(m, (i,), scheme, bins) for i in range(m.n_features)])
    order = np.lexsort((np.arange(m.n_features), -scores))
    return RankedFeatures(order, scores[order])
