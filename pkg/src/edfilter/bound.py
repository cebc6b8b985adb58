"""Information-theoretic accuracy upper bound and the matching consistency check.

The bound ties a subset's classification accuracy to its information gain via
a Fano-style inequality over the class alphabet of size n. Base-2 logs
throughout, matching the entropy estimators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 1e-9


@dataclass(frozen=True)
class BoundReport:
    raw_bound: float
    clamped_bound: float  # in [0, 1]
    n_classes: int
    ig_bits: float


def binary_entropy(theta: float) -> float:
    """H2(theta) in bits, with H2(0) = H2(1) = 0."""
    if theta <= 0.0 or theta >= 1.0:
        return 0.0
    return -theta * math.log2(theta) - (1.0 - theta) * math.log2(1.0 - theta)


def accuracy_upper_bound(ig_bits: float, n_classes: int) -> BoundReport:
    """Upper bound on accuracy given IG in bits:

        raw = (ig - log2(n) + 1) / log2(n - 1) + 1      (n >= 3)

    For n = 2 the denominator vanishes and the bound degenerates to 1.0
    (admissible, zero pruning power). The reported bound is clamped to [0, 1].
    """
    if n_classes < 2:
        raise ValueError("n_classes must be at least 2")
    if ig_bits < 0:
        raise ValueError("ig_bits must be non-negative")
    if n_classes == 2:
        raw = math.inf
    else:
        raw = (ig_bits - math.log2(n_classes) + 1.0) / math.log2(n_classes - 1) + 1.0
    clamped = min(1.0, max(0.0, raw))
    return BoundReport(raw, clamped, n_classes, ig_bits)


def fano_check(theta: float, ig_bits: float, n_classes: int) -> bool:
    """Whether (theta, ig) is consistent with Fano's inequality:

        log2(n) - H2(theta) - (1 - theta) * log2(n - 1) <= ig + EPS
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must be in [0, 1]")
    if n_classes < 2:
        raise ValueError("n_classes must be at least 2")
    lhs = math.log2(n_classes) - binary_entropy(theta) - (1.0 - theta) * math.log2(n_classes - 1)
    return lhs <= ig_bits + EPS
