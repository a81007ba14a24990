import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_population
from oracles import (
    oracle_class_freq,
    oracle_expected_fraction,
    oracle_sym,
    oracle_vote_fraction,
)

from xplx.model import ExampleReport, LabelVector, PredictionStore
from xplx.perplexity import population_metrics
from xplx.votes import (
    analyze_examples,
    class_confusion,
    class_perplexities,
    expected_vote_fraction,
    top_labels,
    vote_fraction,
)


def one_hot_store(argmaxes, num_classes):
    """Store of N classifiers x 1 example voting exactly as given."""
    n = len(argmaxes)
    raw = np.zeros((n, 1, num_classes), dtype=np.float32)
    for i, j in enumerate(argmaxes):
        raw[i, 0, j] = 1.0
    return PredictionStore(raw)


class TestVoteFraction:
    def test_counts_over_five(self):
        store = one_hot_store([2, 2, 1, 2, 0], 3)
        np.testing.assert_array_equal(vote_fraction(store, 0), [0.2, 0.2, 0.6])

    def test_single_classifier_one_hot(self):
        store = one_hot_store([1], 3)
        np.testing.assert_array_equal(vote_fraction(store, 0), [0.0, 1.0, 0.0])

    def test_unanimous(self):
        store = one_hot_store([2, 2, 2], 3)
        assert vote_fraction(store, 0)[2] == 1.0


class TestExpectedVoteFraction:
    def test_mean_of_rows(self):
        raw = np.array([[[0.7, 0.3]], [[0.1, 0.9]]], dtype=np.float32)
        store = PredictionStore(raw)
        np.testing.assert_allclose(
            expected_vote_fraction(store, 0), [0.4, 0.6], rtol=0, atol=1e-7
        )

    def test_identical_rows_pass_through(self):
        raw = np.array([[[0.25, 0.75]], [[0.25, 0.75]]], dtype=np.float32)
        store = PredictionStore(raw)
        np.testing.assert_allclose(
            expected_vote_fraction(store, 0), [0.25, 0.75], rtol=0, atol=1e-12
        )

    def test_uniform_rows_stay_uniform(self):
        raw = np.full((3, 1, 4), 0.25, dtype=np.float32)
        store = PredictionStore(raw)
        np.testing.assert_allclose(
            expected_vote_fraction(store, 0), 0.25, rtol=0, atol=1e-12
        )


class TestTopLabels:
    def test_tie_breaks_toward_smaller_index(self):
        assert top_labels([0.2, 0.2, 0.6], k=2) == [(2, 0.6), (0, 0.2)]

    def test_zeros_omitted(self):
        assert top_labels([0.0, 1.0, 0.0], k=3) == [(1, 1.0)]

    def test_uniform_tie(self):
        third = 1.0 / 3.0
        assert top_labels([third, third, third], k=1) == [(0, third)]

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            top_labels([1.0], k=0)


def report(e, cp, xp, votes=None):
    votes = votes or {0: 1.0}
    return ExampleReport(
        example_index=e,
        c_perplexity=cp,
        x_perplexity=xp,
        vote_fractions=votes,
        expected_fractions=votes,
        top_voted_labels=[],
        top_expected_labels=[],
    )


class TestClassPerplexities:
    def test_arithmetic_mean(self):
        labels = LabelVector.from_values([0, 0, 1], num_classes=2)
        reports = [report(0, 1.0, 0.0), report(1, 3.0, 0.5), report(2, 2.0, 1.0)]
        out = class_perplexities(reports, labels)
        assert out[0].class_c_perplexity == 2.0
        assert out[0].class_x_perplexity == 0.25
        assert out[0].example_count == 2

    def test_identical_examples_equal_class_value(self):
        labels = LabelVector.from_values([1, 1], num_classes=2)
        reports = [report(0, 1.7, 0.25), report(1, 1.7, 0.25)]
        out = class_perplexities(reports, labels)
        assert out[1].class_c_perplexity == 1.7
        assert out[1].class_x_perplexity == 0.25

    def test_empty_class_reports_null(self):
        labels = LabelVector.from_values([0, 0], num_classes=3)
        reports = [report(0, 1.0, 0.0), report(1, 1.0, 0.0)]
        out = class_perplexities(reports, labels)
        assert math.isnan(out[2].class_c_perplexity)
        assert math.isnan(out[2].class_x_perplexity)
        assert out[2].example_count == 0
        assert out[2].top_voted_confusion == []

    def test_top_confusion_excludes_self(self):
        raw = np.zeros((2, 2, 2), dtype=np.float32)
        raw[:, :, 0] = 1.0  # everyone votes class 0 on both examples
        store = PredictionStore(raw)
        labels = LabelVector.from_values([0, 1], num_classes=2)
        table = class_confusion(store, labels, "voted")
        reports = analyze_examples(store, labels)
        out = class_perplexities(reports, labels, voted_confusion=table)
        assert out[0].top_voted_confusion == []  # only itself voted
        assert out[1].top_voted_confusion == [(0, 1.0)]


class TestClassConfusion:
    def test_row_mean_worked_example(self):
        # class 0 examples: one split vote, one unanimous for class 0
        raw = np.zeros((2, 2, 2), dtype=np.float32)
        raw[0, 0, 0] = 1.0  # classifier 0, example 0 votes 0
        raw[1, 0, 1] = 1.0  # classifier 1, example 0 votes 1
        raw[:, 1, 0] = 1.0  # both vote 0 on example 1
        store = PredictionStore(raw)
        labels = LabelVector.from_values([0, 0], num_classes=2)
        table = class_confusion(store, labels, "voted")
        np.testing.assert_array_equal(table.freq[0], [0.75, 0.25])

    def test_sym_is_pairwise_mean(self):
        # freq[0][1] = 0.5, freq[1][0] = 0.0 by construction
        raw = np.zeros((2, 2, 2), dtype=np.float32)
        raw[0, 0, 0] = 1.0
        raw[1, 0, 1] = 1.0
        raw[:, 1, 1] = 1.0
        store = PredictionStore(raw)
        labels = LabelVector.from_values([0, 1], num_classes=2)
        table = class_confusion(store, labels, "voted")
        assert table.freq[0, 1] == 0.5
        assert table.freq[1, 0] == 0.0
        assert table.sym[0, 1] == 0.25
        assert table.sym[1, 0] == 0.25

    def test_asymmetry_exists_in_general(self):
        raw = np.zeros((2, 2, 2), dtype=np.float32)
        raw[0, 0, 0] = 1.0
        raw[1, 0, 1] = 1.0
        raw[:, 1, 1] = 1.0
        store = PredictionStore(raw)
        labels = LabelVector.from_values([0, 1], num_classes=2)
        table = class_confusion(store, labels, "voted")
        assert table.freq[0, 1] != table.freq[1, 0]

    def test_perfect_population_gives_identity(self):
        rng = np.random.default_rng(11)
        m, e = 4, 12
        labels_arr = rng.integers(0, m, size=e)
        raw = np.zeros((3, e, m), dtype=np.float32)
        raw[:, np.arange(e), labels_arr] = 1.0
        store = PredictionStore(raw)
        labels = LabelVector.from_values(labels_arr, num_classes=m)
        table = class_confusion(store, labels, "voted")
        present = np.unique(labels_arr)
        for c in present:
            expected = np.zeros(m)
            expected[c] = 1.0
            np.testing.assert_array_equal(table.freq[c], expected)

    def test_empty_class_row_is_nan(self):
        store = one_hot_store([0, 0], 3)
        labels = LabelVector.from_values([0], num_classes=3)
        table = class_confusion(store, labels, "voted")
        assert np.isnan(table.freq[1]).all()
        assert np.isnan(table.sym[1, 2])

    def test_mode_checked(self):
        store = one_hot_store([0], 2)
        labels = LabelVector.from_values([0], num_classes=2)
        with pytest.raises(ValueError):
            class_confusion(store, labels, "both")

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), mode=st.sampled_from(["voted", "expected"]))
    def test_rows_sum_and_sym_exact(self, seed, mode):
        store, labels = random_population(seed)
        table = class_confusion(store, labels, mode)
        present = np.unique(labels.values)
        np.testing.assert_allclose(
            table.freq[present].sum(axis=1), 1.0, rtol=0, atol=1e-9
        )
        mask = ~np.isnan(table.sym)
        assert np.array_equal(table.sym[mask], table.sym.T[mask])

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_oracles(self, seed):
        store, labels = random_population(seed)
        n, e, m = store.dims
        rows_by_example = [
            [store.block(i)[ex].tolist() for i in range(n)] for ex in range(e)
        ]
        label_list = [labels[ex] for ex in range(e)]

        for mode, per_example in (
            ("voted", [oracle_vote_fraction(r, m) for r in rows_by_example]),
            ("expected", [oracle_expected_fraction(r, m) for r in rows_by_example]),
        ):
            table = class_confusion(store, labels, mode)
            freq_o = oracle_class_freq(per_example, label_list, m)
            sym_o = oracle_sym(freq_o, m)
            for c in range(m):
                if freq_o[c] is None:
                    assert np.isnan(table.freq[c]).all()
                    continue
                np.testing.assert_allclose(
                    table.freq[c], freq_o[c], rtol=1e-9, atol=1e-12
                )
                for j in range(m):
                    if sym_o[c][j] is not None:
                        assert table.sym[c, j] == pytest.approx(
                            sym_o[c][j], rel=1e-9, abs=1e-12
                        )


class TestAnalyzeExamples:
    def test_reports_match_row_level_functions(self):
        store, labels = random_population(99, num_classifiers=4, num_examples=6, num_classes=3)
        reports = analyze_examples(store, labels)
        assert [r.example_index for r in reports] == list(range(6))
        for e, rep in enumerate(reports):
            vf = vote_fraction(store, e)
            fe = expected_vote_fraction(store, e)
            for j, v in rep.vote_fractions.items():
                assert v == pytest.approx(vf[j], rel=1e-12)
            assert sum(rep.vote_fractions.values()) == pytest.approx(1.0, abs=1e-9)
            assert sum(rep.expected_fractions.values()) == pytest.approx(1.0, abs=1e-9)
            assert rep.top_voted_labels == top_labels(vf)
            np.testing.assert_allclose(
                [v for _, v in rep.top_expected_labels],
                [v for _, v in top_labels(fe)],
                rtol=1e-12,
            )

    def test_accepts_precomputed_metrics(self):
        store, labels = random_population(7, num_classifiers=3, num_examples=4, num_classes=3)
        metrics = population_metrics(store, labels)
        a = analyze_examples(store, labels, metrics=metrics)
        b = analyze_examples(store, labels)
        assert a == b
