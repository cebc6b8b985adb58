import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edfilter.dataset import (DataError, FeatureMatrix, KeywordMap, SynthSpec, chunk,
                              build_counts, load_csv, save_csv, stratified_folds,
                              synth_generate)
from edfilter.info_theory import info_gain, rank_features

from conftest import TABLE1_ROWS


class TestBuildCounts:
    def test_sums_keyword_occurrences(self):
        km = KeywordMap({"body-image": ["body", "weight"]})
        posts = [
            [["body", "body", "weight"]],
            [["food"]],
        ]
        m = build_counts(posts, km, [0, 1])
        assert m.counts[0, 0] == 3
        assert m.counts[1, 0] == 0

    def test_intro_example_row(self):
        keywords = ["body", "weight", "food", "meal", "exercise", "thinspo", "suicide", "depressed"]
        km = KeywordMap({k: [k] for k in keywords})
        t1 = [["body", "body", "weight"]]
        t2 = [["food"] * 5 + ["meal"] * 3]
        m = build_counts([t1, t2], km, [0, 1])
        assert list(m.counts[0]) == [2, 1, 0, 0, 0, 0, 0, 0]
        assert list(m.counts[1]) == [0, 0, 5, 3, 0, 0, 0, 0]

    def test_no_occurrences_gives_zero_row(self):
        km = KeywordMap({"a": ["alpha"], "b": ["beta"]})
        m = build_counts([[["gamma"]], [["alpha"]]], km, [0, 1])
        assert not m.counts[0].any()

    def test_post_order_invariance(self):
        km = KeywordMap({"a": ["alpha"], "b": ["beta"]})
        posts_a = [[["alpha"], ["beta", "alpha"]], [["beta"]]]
        posts_b = [[["beta", "alpha"], ["alpha"]], [["beta"]]]
        a = build_counts(posts_a, km, [0, 1])
        b = build_counts(posts_b, km, [0, 1])
        assert np.array_equal(a.counts, b.counts)

    def test_empty_keyword_map_rejected(self):
        with pytest.raises(DataError):
            KeywordMap({})

    def test_label_count_mismatch(self):
        km = KeywordMap({"a": ["alpha"]})
        with pytest.raises(DataError):
            build_counts([[["alpha"]]], km, [0, 1])


class TestCsv:
    def test_table1_load(self, table1_csv):
        m = load_csv(table1_csv)
        assert m.n_rows == 4
        assert m.n_features == 15
        assert m.n_classes == 4
        assert list(m.counts[2]) == TABLE1_ROWS[2][0]
        assert m.labels[2] == 2

    def test_single_class_rejected(self, tmp_path):
        p = tmp_path / "one.csv"
        p.write_text("f1,y\n1,0\n")
        with pytest.raises(DataError, match="single class"):
            load_csv(p)

    def test_negative_count_rejected(self, tmp_path):
        p = tmp_path / "neg.csv"
        p.write_text("f1,y\n-3,0\n1,1\n")
        with pytest.raises(DataError, match="negative count"):
            load_csv(p)

    def test_non_integer_cell_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("f1,y\nx,0\n1,1\n")
        with pytest.raises(DataError, match="non-integer"):
            load_csv(p)

    def test_missing_header_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(DataError, match="missing header"):
            load_csv(p)

    def test_label_gap_rejected(self, tmp_path):
        p = tmp_path / "gap.csv"
        p.write_text("f1,y\n1,0\n2,2\n")
        with pytest.raises(DataError, match="label gap"):
            load_csv(p)

    def test_round_trip_identity(self, tmp_path, synth7):
        path = tmp_path / "rt.csv"
        save_csv(synth7, path)
        back = load_csv(path)
        assert back.feature_names == synth7.feature_names
        assert np.array_equal(back.counts, synth7.counts)
        assert np.array_equal(back.labels, synth7.labels)
        assert back.n_classes == synth7.n_classes


class TestSynth:
    def test_deterministic(self):
        spec = SynthSpec(8, 3, 100, 3, 0.2, 10, 42)
        a, b = synth_generate(spec), synth_generate(spec)
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.labels, b.labels)

    def test_counts_bounded(self):
        m = synth_generate(SynthSpec(6, 3, 200, 4, 0.0, 5, 1))
        assert m.counts.max() <= 5

    def test_uninformative_features_have_near_zero_ig(self):
        m = synth_generate(SynthSpec(8, 0, 800, 4, 0.0, 10, 3))
        for i in range(m.n_features):
            assert info_gain(m, (i,)) < 0.05

    def test_informative_feature_tops_ranking_across_seeds(self):
        for seed in range(10):
            m = synth_generate(SynthSpec(6, 3, 600, 4, 0.0, 10, seed))
            top = int(rank_features(m).order[0])
            assert top < 3

    def test_invalid_specs_rejected(self):
        with pytest.raises(DataError):
            SynthSpec(4, 5, 100, 4)
        with pytest.raises(DataError):
            SynthSpec(4, 2, 100, 1)
        with pytest.raises(DataError):
            SynthSpec(4, 2, 2, 4)
        with pytest.raises(DataError):
            SynthSpec(4, 2, 100, 4, noise_rate=1.5)


class TestChunk:
    def test_exact_division(self):
        m = synth_generate(SynthSpec(4, 2, 1000, 4, 0.0, 10, 5))
        chunks = chunk(m, 200, 9)
        assert len(chunks) == 5
        assert all(c.n_rows == 200 for c in chunks)

    def test_remainder_rule(self):
        m = synth_generate(SynthSpec(4, 2, 1010, 4, 0.0, 10, 5))
        chunks = chunk(m, 200, 9)
        assert 5 <= len(chunks) <= 6
        for c in chunks:
            assert c.n_rows in (200, 10)
            assert np.unique(c.labels).size == m.n_classes

    def test_deterministic(self):
        m = synth_generate(SynthSpec(4, 2, 500, 4, 0.0, 10, 5))
        a = chunk(m, 100, 3)
        b = chunk(m, 100, 3)
        assert len(a) == len(b)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.counts, cb.counts)

    def test_oversized_chunk_rejected(self):
        m = synth_generate(SynthSpec(4, 2, 100, 4, 0.0, 10, 5))
        with pytest.raises(DataError):
            chunk(m, 101, 0)


class TestStratifiedFolds:
    def test_balanced_classes(self):
        m = synth_generate(SynthSpec(3, 1, 100, 4, 0.0, 10, 2))
        # Rebalance labels exactly 25 per class.
        labels = np.repeat(np.arange(4), 25)
        m = FeatureMatrix(m.feature_names, m.counts, labels, 4)
        folds = stratified_folds(m, 5, 0)
        for fold in range(5):
            idx = folds.test_rows(fold)
            counts = np.bincount(m.labels[idx], minlength=4)
            assert list(counts) == [5, 5, 5, 5]

    def test_two_folds_on_eight_rows(self):
        labels = np.repeat(np.arange(4), 2)
        counts = np.zeros((8, 2), dtype=np.int64)
        m = FeatureMatrix(("a", "b"), counts, labels, 4)
        folds = stratified_folds(m, 2, 1)
        for fold in range(2):
            per_class = np.bincount(m.labels[folds.test_rows(fold)], minlength=4)
            assert list(per_class) == [1, 1, 1, 1]

    def test_deterministic(self):
        m = synth_generate(SynthSpec(3, 1, 120, 4, 0.0, 10, 8))
        a = stratified_folds(m, 5, 17)
        b = stratified_folds(m, 5, 17)
        assert np.array_equal(a.fold_of_row, b.fold_of_row)

    def test_small_class_rejected(self):
        labels = np.array([0, 0, 0, 1])
        m = FeatureMatrix(("a",), np.zeros((4, 1), dtype=np.int64), labels, 2)
        with pytest.raises(DataError):
            stratified_folds(m, 2, 0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 1000))
    def test_fold_balance_property(self, k, seed):
        m = synth_generate(SynthSpec(3, 1, 40 * k, 4, 0.0, 10, seed))
        folds = stratified_folds(m, k, seed)
        for c in range(m.n_classes):
            per_fold = [int(((m.labels == c) & (folds.fold_of_row == f)).sum())
                        for f in range(k)]
            assert max(per_fold) - min(per_fold) <= 1
