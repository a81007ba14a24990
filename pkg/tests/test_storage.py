import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xplx import storage
from xplx.errors import (
    DimensionMismatch,
    EmptyPopulation,
    HeaderMismatch,
    IncompleteGrid,
    IoError,
    LabelOutOfRange,
    LineCountMismatch,
    ManifestSchemaError,
    ParseError,
    PayloadTruncated,
    SumOutOfTolerance,
)
from xplx.model import ClassifierEntry, LabelVector, PopulationManifest, PredictionStore


def make_manifest(tmp_path, num_classes, blocks, ids=None):
    """Write payloads + manifest for the given float32 blocks; return manifest path."""
    ids = ids or [f"c{i}" for i in range(len(blocks))]
    entries = []
    for cid, block in zip(ids, blocks):
        storage.write_payload(tmp_path / f"{cid}.prd", block)
        entries.append(
            {
                "id": cid,
                "architecture": "net",
                "train_fraction": 1.0,
                "epoch_stage": "converged",
                "payload": f"{cid}.prd",
            }
        )
    doc = {
        "num_classes": num_classes,
        "num_examples": int(blocks[0].shape[0]),
        "classifiers": entries,
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc))
    return path


class TestPayloadFormat:
    def test_header_layout_is_frozen(self, tmp_path):
        p = tmp_path / "a.prd"
        storage.write_payload(p, np.zeros((3, 2), dtype=np.float32))
        blob = p.read_bytes()
        assert blob[:8] == b"XPLXPRD1"
        assert struct.unpack("<Q", blob[8:16])[0] == 3
        assert struct.unpack("<Q", blob[16:24])[0] == 2
        assert len(blob) == 24 + 4 * 3 * 2

    def test_values_example_major_little_endian(self, tmp_path):
        p = tmp_path / "a.prd"
        block = np.array([[0.25, 0.75], [1.0, 0.0]], dtype=np.float32)
        storage.write_payload(p, block)
        body = p.read_bytes()[24:]
        assert body == block.astype("<f4").tobytes(order="C")

    def test_round_trip_bits(self, tmp_path):
        rng = np.random.default_rng(0)
        block = rng.random((5, 4)).astype(np.float32)
        p = tmp_path / "a.prd"
        storage.write_payload(p, block)
        back = storage.read_payload(p)
        assert back.tobytes() == block.tobytes()

    @settings(max_examples=25, deadline=None)
    @given(e=st.integers(1, 7), m=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    def test_round_trip_bits_random(self, tmp_path_factory, e, m, seed):
        rng = np.random.default_rng(seed)
        block = rng.random((e, m)).astype(np.float32)
        p = tmp_path_factory.mktemp("rt") / "a.prd"
        storage.write_payload(p, block)
        assert storage.read_payload(p).tobytes() == block.tobytes()

    def test_truncated_rejected(self, tmp_path):
        p = tmp_path / "a.prd"
        storage.write_payload(p, np.full((2, 2), 0.25, dtype=np.float32))
        p.write_bytes(p.read_bytes()[:-3])
        with pytest.raises(PayloadTruncated):
            storage.read_payload(p)

    def test_oversized_rejected(self, tmp_path):
        p = tmp_path / "a.prd"
        storage.write_payload(p, np.full((2, 2), 0.25, dtype=np.float32))
        p.write_bytes(p.read_bytes() + b"\x00")
        with pytest.raises(PayloadTruncated):
            storage.read_payload(p)

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "a.prd"
        storage.write_payload(p, np.full((1, 2), 0.5, dtype=np.float32))
        blob = bytearray(p.read_bytes())
        blob[0] = ord("Y")
        p.write_bytes(bytes(blob))
        with pytest.raises(HeaderMismatch):
            storage.read_payload(p)


class TestLoadPopulation:
    def test_happy_path(self, tmp_path):
        rng = np.random.default_rng(1)
        blocks = [rng.dirichlet(np.ones(2), size=3).astype(np.float32) for _ in range(2)]
        manifest, store = storage.load_population(make_manifest(tmp_path, 2, blocks))
        assert store.dims == (2, 3, 2)
        assert [c.id for c in manifest.classifiers] == ["c0", "c1"]
        assert store.raw[1].tobytes() == blocks[1].tobytes()

    def test_threaded_load_matches_serial(self, tmp_path):
        rng = np.random.default_rng(2)
        blocks = [rng.dirichlet(np.ones(3), size=4).astype(np.float32) for _ in range(5)]
        path = make_manifest(tmp_path, 3, blocks)
        _, serial = storage.load_population(path)
        _, threaded = storage.load_population(path, threads=4)
        assert serial.raw.tobytes() == threaded.raw.tobytes()

    def test_header_dims_beat_manifest(self, tmp_path):
        blocks = [np.full((3, 2), 0.5, dtype=np.float32)]
        path = make_manifest(tmp_path, 2, blocks)
        doc = json.loads(path.read_text())
        doc["num_classes"] = 3
        path.write_text(json.dumps(doc))
        with pytest.raises(DimensionMismatch, match="c0"):
            storage.load_population(path)

    def test_row_errors_name_classifier(self, tmp_path):
        bad = np.full((2, 2), 0.6, dtype=np.float32)
        path = make_manifest(tmp_path, 2, [bad], ids=["oddball"])
        with pytest.raises(SumOutOfTolerance, match="oddball"):
            storage.load_population(path)

    def test_missing_payload(self, tmp_path):
        blocks = [np.full((1, 2), 0.5, dtype=np.float32)]
        path = make_manifest(tmp_path, 2, blocks)
        (tmp_path / "c0.prd").unlink()
        with pytest.raises(IoError):
            storage.load_population(path)

    def test_manifest_round_trip(self, tmp_path):
        entries = (
            ClassifierEntry("a", "resnet", 0.5, "early-2", "a.prd"),
            ClassifierEntry("b", "dirichlet-synth", "synthetic", "converged", "b.prd", strength=0.7),
        )
        manifest = PopulationManifest(num_classes=4, num_examples=2, classifiers=entries)
        p = tmp_path / "m.json"
        storage.write_manifest(manifest, p)
        back = storage.parse_manifest(p.read_text())
        assert back == manifest


class TestManifestSchema:
    def test_missing_key(self):
        with pytest.raises(ManifestSchemaError, match="num_classes"):
            storage.parse_manifest('{"num_examples": 1, "classifiers": []}')

    def test_wrong_type(self):
        with pytest.raises(ManifestSchemaError, match="wrong type"):
            storage.parse_manifest('{"num_classes": "3", "num_examples": 1, "classifiers": []}')

    def test_invalid_json(self):
        with pytest.raises(ManifestSchemaError, match="invalid JSON"):
            storage.parse_manifest("{nope")

    def test_entry_must_be_object(self):
        with pytest.raises(ManifestSchemaError, match="classifiers\\[0\\]"):
            storage.parse_manifest('{"num_classes": 2, "num_examples": 1, "classifiers": [5]}')


class TestLabels:
    def test_happy_path(self, tmp_path):
        p = tmp_path / "labels.txt"
        p.write_text("0\n2\n1\n")
        labels = storage.load_labels(p, num_examples=3, num_classes=3)
        assert list(labels.values) == [0, 2, 1]

    def test_out_of_range_names_line(self, tmp_path):
        p = tmp_path / "labels.txt"
        p.write_text("0\n5\n")
        with pytest.raises(LabelOutOfRange, match="line 2"):
            storage.load_labels(p, num_examples=2, num_classes=3)

    def test_line_count_mismatch(self, tmp_path):
        p = tmp_path / "labels.txt"
        p.write_text("0\n1\n")
        with pytest.raises(LineCountMismatch):
            storage.load_labels(p, num_examples=3, num_classes=3)

    def test_parse_error_names_line(self, tmp_path):
        p = tmp_path / "labels.txt"
        p.write_text("0\nx\n")
        with pytest.raises(ParseError, match="line 2"):
            storage.load_labels(p, num_examples=2, num_classes=3)

    def test_round_trip(self, tmp_path):
        labels = LabelVector.from_values([3, 0, 1, 3], num_classes=4)
        p = tmp_path / "labels.txt"
        storage.write_labels(labels, p)
        back = storage.load_labels(p, num_examples=4, num_classes=4)
        np.testing.assert_array_equal(back.values, labels.values)


class TestCsvPopulation:
    def test_happy_path(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text(
            "classifier,example,p0,p1\n"
            "m0,0,0.25,0.75\n"
            "m0,1,1.0,0.0\n"
        )
        manifest, store = storage.load_csv_population(p)
        assert store.dims == (1, 2, 2)
        assert manifest.classifiers[0].id == "m0"
        np.testing.assert_allclose(store.block(0)[0], [0.25, 0.75])

    def test_order_by_first_appearance(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text(
            "classifier,example,p0,p1\n"
            "z,0,0.5,0.5\n"
            "a,0,0.5,0.5\n"
        )
        manifest, _ = storage.load_csv_population(p)
        assert [c.id for c in manifest.classifiers] == ["z", "a"]

    def test_missing_cell(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text(
            "classifier,example,p0,p1\n"
            "m0,0,0.5,0.5\n"
            "m1,0,0.5,0.5\n"
            "m0,1,0.5,0.5\n"
        )
        with pytest.raises(IncompleteGrid, match="m1"):
            storage.load_csv_population(p)

    def test_duplicate_cell(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text(
            "classifier,example,p0,p1\n"
            "m0,0,0.5,0.5\n"
            "m0,0,0.5,0.5\n"
        )
        with pytest.raises(IncompleteGrid, match="duplicate"):
            storage.load_csv_population(p)

    def test_header_mismatch(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text("model,example,p0,p1\nm0,0,0.5,0.5\n")
        with pytest.raises(HeaderMismatch):
            storage.load_csv_population(p)

    def test_wrong_field_count(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text(
            "classifier,example,p0,p1\n"
            "m0,0,0.2,0.3,0.5\n"
        )
        with pytest.raises(ParseError, match="line 2"):
            storage.load_csv_population(p)

    def test_no_rows(self, tmp_path):
        p = tmp_path / "pop.csv"
        p.write_text("classifier,example,p0,p1\n")
        with pytest.raises(EmptyPopulation):
            storage.load_csv_population(p)

    def test_csv_matches_binary_bits(self, tmp_path):
        # text written with enough digits reproduces the same float32s
        rng = np.random.default_rng(9)
        block = rng.dirichlet(np.ones(3), size=4).astype(np.float32)
        lines = ["classifier,example,p0,p1,p2"]
        for e in range(4):
            lines.append("m0,%d,%r,%r,%r" % (e, *[float(v) for v in block[e]]))
        p = tmp_path / "pop.csv"
        p.write_text("\n".join(lines) + "\n")
        _, store = storage.load_csv_population(p)
        assert store.raw[0].tobytes() == block.tobytes()


class TestWriteReport:
    FIELDS = ["example", "c_perplexity", "x_perplexity", "top_voted_labels"]

    def test_csv_rendering(self, tmp_path):
        p = tmp_path / "r.csv"
        rows = [
            {
                "example": 0,
                "c_perplexity": 1.4142135623730951,
                "x_perplexity": 0.5,
                "top_voted_labels": [(2, 0.6), (0, 0.2)],
            }
        ]
        storage.write_report(rows, self.FIELDS, "csv", p)
        lines = p.read_text().splitlines()
        assert lines[0] == "example,c_perplexity,x_perplexity,top_voted_labels"
        assert lines[1] == "0,1.414214,0.500000,2:0.600000|0:0.200000"

    def test_empty_csv_is_header_only(self, tmp_path):
        p = tmp_path / "r.csv"
        storage.write_report([], self.FIELDS, "csv", p)
        assert p.read_text().splitlines() == [",".join(self.FIELDS)]

    def test_empty_json_is_empty_array(self, tmp_path):
        p = tmp_path / "r.json"
        storage.write_report([], self.FIELDS, "json", p)
        assert json.loads(p.read_text()) == []

    def test_json_mirrors_fields(self, tmp_path):
        p = tmp_path / "r.json"
        rows = [{"example": 1, "c_perplexity": float("nan"), "x_perplexity": 0.25,
                 "top_voted_labels": [(0, 1.0)]}]
        storage.write_report(rows, self.FIELDS, "json", p)
        doc = json.loads(p.read_text())
        assert doc == [
            {
                "example": 1,
                "c_perplexity": None,
                "x_perplexity": 0.25,
                "top_voted_labels": [[0, 1.0]],
            }
        ]

    def test_nan_renders_empty_in_csv(self, tmp_path):
        p = tmp_path / "r.csv"
        storage.write_report(
            [{"example": 0, "c_perplexity": float("nan"), "x_perplexity": None,
              "top_voted_labels": []}],
            self.FIELDS,
            "csv",
            p,
        )
        assert p.read_text().splitlines()[1] == "0,,,"


class TestCorruptionLog:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "log.csv"
        log = [(4, 1, 2), (9, 0, 3)]
        storage.write_corruption_log(log, p)
        assert storage.load_corruption_log(p) == log
