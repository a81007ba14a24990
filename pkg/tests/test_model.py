import numpy as np
import pytest
from hypothesis import given, strategies as st

from xplx.errors import (
    LabelOutOfRange,
    ManifestSchemaError,
    NegativeProbability,
    NonFinite,
    SumOutOfTolerance,
)
from xplx.model import (
    ClassifierEntry,
    LabelVector,
    PopulationManifest,
    PredictionStore,
    validate_row,
)


def entry(cid="c0", **kw):
    kw.setdefault("architecture", "net")
    kw.setdefault("train_fraction", 1.0)
    kw.setdefault("epoch_stage", "converged")
    kw.setdefault("payload_path", f"{cid}.prd")
    return ClassifierEntry(id=cid, **kw)


class TestValidateRow:
    def test_already_normalized_passthrough(self):
        out = validate_row([0.5, 0.5])
        np.testing.assert_array_equal(out, [0.5, 0.5])

    def test_renormalizes_within_tolerance(self):
        out = validate_row([0.5005, 0.5])
        # expected: divide by 1.0005
        np.testing.assert_allclose(out, [0.5005 / 1.0005, 0.5 / 1.0005], rtol=0, atol=1e-15)

    def test_negative_entry_rejected(self):
        with pytest.raises(NegativeProbability):
            validate_row([0.5, -0.1, 0.6])

    def test_nan_rejected(self):
        with pytest.raises(NonFinite):
            validate_row([0.5, float("nan")])

    def test_inf_rejected(self):
        with pytest.raises(NonFinite):
            validate_row([0.5, float("inf")])

    def test_sum_out_of_tolerance_rejected(self):
        with pytest.raises(SumOutOfTolerance):
            validate_row([0.6, 0.5])

    def test_boundary_sum_accepted(self):
        # |sum - 1| == 1e-3 exactly is still acceptable
        out = validate_row([0.5, 0.501])
        assert abs(out.sum() - 1.0) < 1e-12

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=12)
        .filter(lambda xs: sum(xs) > 1e-6)
    )
    def test_accepted_rows_sum_to_one(self, xs):
        scaled = np.asarray(xs) / sum(xs)
        out = validate_row(scaled)
        assert abs(out.sum() - 1.0) <= 1e-12


class TestManifest:
    def test_round_numbers_accepted(self):
        m = PopulationManifest(
            num_classes=3,
            num_examples=4,
            classifiers=(entry("a", train_fraction=0.25), entry("b", train_fraction="synthetic")),
        )
        assert len(m) == 2

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ManifestSchemaError, match="duplicate"):
            PopulationManifest(num_classes=2, num_examples=1, classifiers=(entry("a"), entry("a")))

    def test_empty_population_rejected(self):
        with pytest.raises(ManifestSchemaError):
            PopulationManifest(num_classes=2, num_examples=1, classifiers=())

    def test_bad_train_fraction_rejected(self):
        with pytest.raises(ManifestSchemaError, match="train_fraction"):
            entry("a", train_fraction=0.3)

    def test_bad_epoch_stage_rejected(self):
        with pytest.raises(ManifestSchemaError, match="epoch_stage"):
            entry("a", epoch_stage="late")

    def test_strength_range_checked(self):
        entry("a", strength=0.5)
        with pytest.raises(ManifestSchemaError, match="strength"):
            entry("a", strength=0.0)
        with pytest.raises(ManifestSchemaError, match="strength"):
            entry("a", strength=1.5)

    def test_nonpositive_dims_rejected(self):
        with pytest.raises(ManifestSchemaError):
            PopulationManifest(num_classes=0, num_examples=1, classifiers=(entry("a"),))
        with pytest.raises(ManifestSchemaError):
            PopulationManifest(num_classes=2, num_examples=0, classifiers=(entry("a"),))


class TestPredictionStore:
    def test_blocks_are_normalized(self):
        raw = np.array([[[0.5, 0.5], [0.9, 0.1]]], dtype=np.float32)
        store = PredictionStore(raw)
        b = store.block(0)
        assert b.dtype == np.float64
        np.testing.assert_allclose(b.sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_raw_kept_verbatim(self):
        raw = np.array([[[0.5005, 0.5]]], dtype=np.float32)
        store = PredictionStore(raw)
        assert store.raw.tobytes() == raw.tobytes()

    def test_validation_reports_block_context(self):
        raw = np.ones((2, 2, 2), dtype=np.float32) * 0.5
        raw[1, 1, 0] = 0.9
        with pytest.raises(SumOutOfTolerance, match="classifier index 1"):
            PredictionStore(raw)

    def test_example_slice_matches_blocks(self):
        rng = np.random.default_rng(5)
        raw = rng.dirichlet(np.ones(4), size=(3, 5)).astype(np.float32)
        store = PredictionStore(raw)
        ex = store.example(2)
        for i in range(3):
            np.testing.assert_array_equal(ex[i], store.block(i)[2])

    def test_select_preserves_bits_and_order(self):
        rng = np.random.default_rng(6)
        raw = rng.dirichlet(np.ones(3), size=(4, 2)).astype(np.float32)
        store = PredictionStore(raw)
        sub = store.select([2, 0])
        assert sub.dims == (2, 2, 3)
        assert sub.raw[0].tobytes() == raw[2].tobytes()
        assert sub.raw[1].tobytes() == raw[0].tobytes()

    def test_raw_is_read_only(self):
        store = PredictionStore(np.full((1, 1, 2), 0.5, dtype=np.float32))
        with pytest.raises(ValueError):
            store.raw[0, 0, 0] = 1.0


class TestLabelVector:
    def test_range_checked(self):
        lv = LabelVector.from_values([0, 2, 1], num_classes=3)
        assert len(lv) == 3
        assert lv[1] == 2

    def test_out_of_range_rejected(self):
        with pytest.raises(LabelOutOfRange, match="position 1"):
            LabelVector.from_values([0, 5], num_classes=3)
        with pytest.raises(LabelOutOfRange):
            LabelVector.from_values([-1], num_classes=3)
