"""Feature-selection engine for keyword-count classification data.

Combines an information-gain filter with a Naive Bayes wrapper and three
subset searches: exact branch-and-bound with an accuracy upper bound,
greedy add/remove local search, and a hybrid search capped by a learned
feature-cardinality predictor.
"""

__version__ = "0.1.0"
