"""Feature-subset searches: exact branch-and-bound, greedy add/remove, hybrid
cardinality-capped, plus the brute-force oracle and local-optimality checker.

Subsets are canonical strictly-ascending tuples of feature indices; the tuple
is the equality/hash key everywhere. All searches are deterministic given the
matrix, configuration seeds, and (for hybrid) the cardinality model.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field

from .bound import EPS, accuracy_upper_bound, fano_check
from .classifier import CvConfig, accuracy
from .dataset import FeatureMatrix, stratified_folds
from .info_theory import info_gain


def canonical(indices) -> tuple:
    """Sorted duplicate-free tuple of feature indices."""
    return tuple(sorted(set(int(i) for i in indices)))


@dataclass(frozen=True)
class SearchEntry:
    subset: tuple
    theta: float      # measured CV accuracy
    theta_bar: float  # clamped accuracy upper bound


@dataclass(frozen=True)
class SearchConfig:
    cv: CvConfig = field(default_factory=CvConfig)
    seed_size: int = 5
    prune: bool = True
    max_expansions: int | None = None
    # Debug: literal incumbent rule (threshold tracks the last popped accuracy
    # and the last popped subset is returned) instead of the running-best rule.
    literal_incumbent: bool = False


@dataclass(frozen=True)
class SelectionResult:
    indices: tuple
    theta: float
    evaluations: int
    prunes: int
    expansions: int
    runtime_ms: float
    algorithm: str
    budget_exhausted: bool = False

    def to_dict(self, feature_names=None) -> dict:
        d = {
            "algorithm": self.algorithm,
            "features": [feature_names[i] for i in self.indices] if feature_names else list(self.indices),
            "indices": list(self.indices),
            "theta": self.theta,
            "evaluations": self.evaluations,
            "prunes": self.prunes,
            "expansions": self.expansions,
            "runtime_ms": self.runtime_ms,
            "budget_exhausted": self.budget_exhausted,
        }
        return d


class SubsetEvaluator:
    """Memoized accuracy/IG/bound evaluator shared across searches on one matrix.

    Folds are computed once; theta and IG are cached per canonical subset.
    Every fresh evaluation is checked against the Fano consistency inequality
    and logged, so callers can report the empirical violation rate.
    """

    def __init__(self, m: FeatureMatrix, cv: CvConfig, scheme: str = "sparse", bins: int = 3):
        self.m = m
        self.cv = cv
        self.scheme = scheme
        self.bins = bins
        self.folds = stratified_folds(m, cv.k, cv.seed)
        self._theta: dict = {}
        self._ig: dict = {}
        self.fano_violations: list = []  # (subset, theta, ig) triples that fail the check
        self.fano_checked = 0

    def theta(self, subset: tuple) -> float:
        t = self._theta.get(subset)
        if t is None:
            t = accuracy(self.m, subset, self.cv, self.folds)
            self._theta[subset] = t
            ig = self.ig(subset)
            self.fano_checked += 1
            if not fano_check(t, ig, self.m.n_classes):
                self.fano_violations.append((subset, t, ig))
        return t

    def ig(self, subset: tuple) -> float:
        g = self._ig.get(subset)
        if g is None:
            g = info_gain(self.m, subset, self.scheme, self.bins)
            self._ig[subset] = g
        return g

    def theta_bar(self, subset: tuple) -> float:
        return accuracy_upper_bound(self.ig(subset), self.m.n_classes).clamped_bound

    def entry(self, subset: tuple) -> SearchEntry:
        return SearchEntry(subset, self.theta(subset), self.theta_bar(subset))

    @property
    def fano_violation_rate(self) -> float:
        if self.fano_checked == 0:
            return 0.0
        return len(self.fano_violations) / self.fano_checked


class _Incumbent:
    """Best entry so far: highest theta, ties to smaller cardinality then lexicographic."""

    def __init__(self):
        self.entry: SearchEntry | None = None

    def offer(self, e: SearchEntry) -> None:
        if self.entry is None:
            self.entry = e
            return
        best = self.entry
        if (-e.theta, len(e.subset), e.subset) < (-best.theta, len(best.subset), best.subset):
            self.entry = e

    def key(self):  # pragma: no cover - debug helper
        return self.entry.subset if self.entry else None


def _heap_item(e: SearchEntry):
    # Max-heap on theta_bar; ties: higher theta, smaller cardinality, lexicographic.
    return (-e.theta_bar, -e.theta, len(e.subset), e.subset)


def exact_search(m: FeatureMatrix, cfg: SearchConfig | None = None,
                 evaluator: SubsetEvaluator | None = None) -> SelectionResult:
    """Branch-and-bound over canonical prefix expansions.

    Singletons seed the heap; an entry expands with every feature of index
    greater than its maximum, so each subset is generated exactly once. With
    pruning on, a popped node is skipped when even its subtree's upper bound
    (computed from the subset joined with every still-addable index) falls
    below the incumbent accuracy; the heap then drains to termination.
    """
    cfg = cfg or SearchConfig()
    ev = evaluator or SubsetEvaluator(m, cfg.cv)
    start = time.perf_counter()
    seen: set = set()
    incumbent = _Incumbent()

    def evaluate(subset: tuple) -> SearchEntry:
        e = ev.entry(subset)
        seen.add(subset)
        incumbent.offer(e)
        return e

    heap = []
    for i in range(m.n_features):
        heapq.heappush(heap, _heap_item(evaluate((i,))))

    theta_min = 0.0
    expansions = prunes = 0
    budget_exhausted = False
    last_popped: SearchEntry | None = None
    while heap:
        if cfg.max_expansions is not None and expansions >= cfg.max_expansions:
            budget_exhausted = True
            break
        neg_bar, neg_theta, _, subset = heapq.heappop(heap)
        e = SearchEntry(subset, -neg_theta, -neg_bar)
        tail = tuple(range(subset[-1] + 1, m.n_features))
        if cfg.prune:
            if cfg.literal_incumbent:
                if e.theta_bar < theta_min - EPS:
                    prunes = len(heap) + 1
                    break
            else:
                # A node's own bound does not cover its descendants (IG grows
                # with supersets), so the prune test must bound the whole
                # subtree: the bound of the subset joined with every still
                # addable index dominates every descendant's bound.
                if tail:
                    subtree_ig = ev.ig(subset + tail)
                    subtree_bar = accuracy_upper_bound(subtree_ig, m.n_classes).clamped_bound
                else:
                    subtree_bar = e.theta_bar
                if subtree_bar < incumbent.entry.theta - EPS:
                    prunes += 1
                    continue
        last_popped = e
        expansions += 1
        for f in tail:
            heapq.heappush(heap, _heap_item(evaluate(subset + (f,))))
        if cfg.literal_incumbent:
            theta_min = e.theta

    if cfg.literal_incumbent and last_popped is not None:
        best = last_popped
    else:
        best = incumbent.entry
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return SelectionResult(best.subset, best.theta, len(seen), prunes, expansions,
                           runtime_ms, "exact", budget_exhausted)


def _greedy_core(m: FeatureMatrix, cfg: SearchConfig, ev: SubsetEvaluator,
                 cap: int | None, algorithm: str) -> SelectionResult:
    start = time.perf_counter()
    seen: set = set()
    incumbent = _Incumbent()

    def evaluate(subset: tuple) -> SearchEntry:
        e = ev.entry(subset)
        seen.add(subset)
        return e

    # Seed: top-s features by singleton accuracy, ties to lower index.
    singles = [evaluate((i,)) for i in range(m.n_features)]
    ranked = sorted(range(m.n_features), key=lambda i: (-singles[i].theta, i))
    seed = ranked[:max(1, min(cfg.seed_size, m.n_features))]

    heap = []
    visited: set = set()
    for i in seed:
        e = singles[i]
        incumbent.offer(e)
        visited.add(e.subset)
        heapq.heappush(heap, _heap_item(e))

    theta_min = 0.0
    expansions = prunes = 0
    budget_exhausted = False
    while heap:
        if cfg.max_expansions is not None and expansions >= cfg.max_expansions:
            budget_exhausted = True
            break
        neg_bar, neg_theta, _, subset = heapq.heappop(heap)
        e = SearchEntry(subset, -neg_theta, -neg_bar)
        if cfg.prune and e.theta_bar < theta_min - EPS:
            prunes = len(heap) + 1
            break
        expansions += 1
        moves = []
        if cap is None or len(subset) < cap:
            members = set(subset)
            moves.extend(tuple(sorted(subset + (f,))) for f in range(m.n_features) if f not in members)
        if len(subset) >= 2:
            moves.extend(tuple(x for x in subset if x != f) for f in subset)
        for child in moves:
            if child in visited:
                continue
            ce = evaluate(child)
            if ce.theta > e.theta:
                incumbent.offer(ce)
                visited.add(child)
                heapq.heappush(heap, _heap_item(ce))
        theta_min = max(theta_min, e.theta)

    best = incumbent.entry
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return SelectionResult(best.subset, best.theta, len(seen), prunes, expansions,
                           runtime_ms, algorithm, budget_exhausted)


def greedy_search(m: FeatureMatrix, cfg: SearchConfig | None = None,
                  evaluator: SubsetEvaluator | None = None) -> SelectionResult:
    """Greedy best-first local search over single add/remove moves.

    A move is taken only when it strictly improves accuracy; visited canonical
    subsets are never re-pushed, and shrink moves never empty a subset.
    """
    cfg = cfg or SearchConfig()
    ev = evaluator or SubsetEvaluator(m, cfg.cv)
    return _greedy_core(m, cfg, ev, None, "greedy")


def hybrid_search(m: FeatureMatrix, model, cfg: SearchConfig | None = None,
                  evaluator: SubsetEvaluator | None = None) -> SelectionResult:
    """Greedy search with grow moves disabled at the predicted cardinality cap."""
    from .cardinality import predict_cardinality  # local import to avoid a cycle

    cfg = cfg or SearchConfig()
    ev = evaluator or SubsetEvaluator(m, cfg.cv)
    cap = predict_cardinality(model, m)
    return _greedy_core(m, cfg, ev, cap, "hybrid")


def brute_force_oracle(m: FeatureMatrix, max_features: int = 12,
                       cv: CvConfig | None = None,
                       evaluator: SubsetEvaluator | None = None) -> SelectionResult:
    """Exhaustive accuracy maximization over all non-empty subsets (test oracle).

    Enumeration order (cardinality then lexicographic, first strict winner
    kept) realizes the tie rules: smaller cardinality, then lexicographic.
    """
    if m.n_features > max_features:
        raise ValueError(f"{m.n_features} features exceeds the oracle cap of {max_features}")
    cv = cv or (evaluator.cv if evaluator else CvConfig())
    ev = evaluator or SubsetEvaluator(m, cv)
    start = time.perf_counter()
    best = None
    count = 0
    for r in range(1, m.n_features + 1):
        for subset in itertools.combinations(range(m.n_features), r):
            t = ev.theta(subset)
            count += 1
            if best is None or t > best[1]:
                best = (subset, t)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return SelectionResult(best[0], best[1], count, 0, 0, runtime_ms, "oracle")


def is_local_optimum(m: FeatureMatrix, subset, cv: CvConfig | None = None,
                     max_cardinality: int | None = None,
                     evaluator: SubsetEvaluator | None = None) -> bool:
    """True iff no single add (within the cardinality cap, if any) and no single
    remove to a non-empty subset strictly increases accuracy."""
    subset = canonical(subset)
    if not subset:
        raise ValueError("empty feature subset")
    cv = cv or (evaluator.cv if evaluator else CvConfig())
    ev = evaluator or SubsetEvaluator(m, cv)
    base = ev.theta(subset)
    members = set(subset)
    if max_cardinality is None or len(subset) < max_cardinality:
        for f in range(m.n_features):
            if f not in members and ev.theta(tuple(sorted(subset + (f,)))) > base:
                return False
    if len(subset) >= 2:
        for f in subset:
            if ev.theta(tuple(x for x in subset if x != f)) > base:
                return False
    return True
