"""On-disk formats: binary payloads, manifest JSON, labels, CSV import, reports.

Payload layout (little-endian throughout):

    bytes 0..7    magic b"XPLXPRD1"
    bytes 8..15   num_examples, unsigned 64-bit
    bytes 16..23  num_classes, unsigned 64-bit
    bytes 24..    E*M IEEE-754 binary32 values, example-major

so a well-formed file is exactly 24 + 4*E*M bytes. Values are stored
as float32; everything downstream of ingestion runs in float64.
"""

from __future__ import annotations

import csv
import json
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import (
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
)
from .model import (
    ClassifierEntry,
    LabelVector,
    PopulationManifest,
    PredictionStore,
    _validate_block,
)

PAYLOAD_MAGIC = b"XPLXPRD1"
_HEADER = struct.Struct("<8sQQ")
HEADER_SIZE = _HEADER.size  # 24


def write_payload(path, values) -> None:
    """Write one classifier's (E, M) prediction block.

    float64 input is quantized to float32; float32 input is written
    bit-for-bit.
    """
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("payload values must be a 2-d (examples, classes) array")
    header = _HEADER.pack(PAYLOAD_MAGIC, arr.shape[0], arr.shape[1])
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes(order="C"))
    except OSError as exc:
        raise IoError(f"writing payload {path}: {exc}") from exc


def read_payload(path) -> np.ndarray:
    """Read a payload file back as a read-only float32 (E, M) array."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"reading payload {path}: {exc}") from exc
    if len(blob) < HEADER_SIZE:
        raise PayloadTruncated(
            f"{path}: {len(blob)} bytes is shorter than the {HEADER_SIZE}-byte header"
        )
    magic, num_examples, num_classes = _HEADER.unpack_from(blob)
    if magic != PAYLOAD_MAGIC:
        raise HeaderMismatch(f"{path}: bad magic {magic!r}")
    expected = HEADER_SIZE + 4 * num_examples * num_classes
    if len(blob) != expected:
        raise PayloadTruncated(
            f"{path}: header declares {num_examples}x{num_classes} "
            f"({expected} bytes), file has {len(blob)} bytes"
        )
    flat = np.frombuffer(blob, dtype="<f4", offset=HEADER_SIZE)
    return flat.reshape(num_examples, num_classes)


def _require(obj, key, kinds, where):
    if key not in obj:
        raise ManifestSchemaError(f"{where}: missing key {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise ManifestSchemaError(f"{where}: key {key!r} has wrong type")
    return value


def parse_manifest(text: str, where: str = "manifest") -> PopulationManifest:
    """Parse and schema-check manifest JSON."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError(f"{where}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestSchemaError(f"{where}: top level must be an object")
    num_classes = _require(doc, "num_classes", int, where)
    num_examples = _require(doc, "num_examples", int, where)
    raw_entries = _require(doc, "classifiers", list, where)
    entries = []
    for k, item in enumerate(raw_entries):
        ctx = f"{where}: classifiers[{k}]"
        if not isinstance(item, dict):
            raise ManifestSchemaError(f"{ctx}: must be an object")
        strength = item.get("strength")
        if strength is not None and (
            isinstance(strength, bool) or not isinstance(strength, (int, float))
        ):
            raise ManifestSchemaError(f"{ctx}: key 'strength' has wrong type")
        entries.append(
            ClassifierEntry(
                id=_require(item, "id", str, ctx),
                architecture=_require(item, "architecture", str, ctx),
                train_fraction=_require(item, "train_fraction", (int, float, str), ctx),
                epoch_stage=_require(item, "epoch_stage", str, ctx),
                payload_path=_require(item, "payload", str, ctx),
                strength=None if strength is None else float(strength),
            )
        )
    return PopulationManifest(
        num_classes=num_classes, num_examples=num_examples, classifiers=tuple(entries)
    )


def write_manifest(manifest: PopulationManifest, path) -> None:
    doc = {
        "num_classes": manifest.num_classes,
        "num_examples": manifest.num_examples,
        "classifiers": [],
    }
    for c in manifest.classifiers:
        item = {
            "id": c.id,
            "architecture": c.architecture,
            "train_fraction": c.train_fraction,
            "epoch_stage": c.epoch_stage,
            "payload": c.payload_path,
        }
        if c.strength is not None:
            item["strength"] = c.strength
        doc["classifiers"].append(item)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"writing manifest {path}: {exc}") from exc


def load_population(manifest_path, threads: int | None = None):
    """Load a manifest and all payloads it references.

    Returns (PopulationManifest, PredictionStore). Payload files may be
    read concurrently; blocks are assembled in manifest order so the
    result does not depend on scheduling.
    """
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"reading manifest {manifest_path}: {exc}") from exc
    manifest = parse_manifest(text, where=str(manifest_path))
    base = os.path.dirname(os.path.abspath(manifest_path))

    def read_one(entry: ClassifierEntry) -> np.ndarray:
        block = read_payload(os.path.join(base, entry.payload_path))
        if block.shape != (manifest.num_examples, manifest.num_classes):
            raise DimensionMismatch(
                f"classifier {entry.id!r}: payload is {block.shape[0]}x{block.shape[1]}, "
                f"manifest declares {manifest.num_examples}x{manifest.num_classes}"
            )
        _validate_block(block, context=f"classifier {entry.id!r}")
        return block

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(read_one, manifest.classifiers))
    else:
        blocks = [read_one(entry) for entry in manifest.classifiers]
    raw = np.stack(blocks)
    return manifest, PredictionStore(raw, validate=False)


def load_labels(path, num_examples: int, num_classes: int) -> LabelVector:
    """Read a labels file: one decimal class index per line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"reading labels {path}: {exc}") from exc
    if len(lines) != num_examples:
        raise LineCountMismatch(
            f"{path}: expected {num_examples} lines, found {len(lines)}"
        )
    values = np.empty(num_examples, dtype=np.int64)
    for i, line in enumerate(lines):
        try:
            values[i] = int(line.strip())
        except ValueError as exc:
            raise ParseError(f"{path}: line {i + 1}: not an integer: {line!r}") from exc
        if not (0 <= values[i] < num_classes):
            raise LabelOutOfRange(
                f"{path}: line {i + 1}: label {values[i]} outside [0, {num_classes})"
            )
    return LabelVector.from_values(values, num_classes=num_classes)


def write_labels(labels: LabelVector, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for v in labels.values:
                fh.write(f"{int(v)}\n")
    except OSError as exc:
        raise IoError(f"writing labels {path}: {exc}") from exc


def load_class_names(path, num_classes: int) -> list[str]:
    """Read display names for classes: one non-empty name per line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"reading class names {path}: {exc}") from exc
    if len(lines) != num_classes:
        raise LineCountMismatch(
            f"{path}: expected {num_classes} lines, found {len(lines)}"
        )
    names = []
    for i, line in enumerate(lines):
        name = line.strip()
        if not name:
            raise ParseError(f"{path}: line {i + 1}: empty class name")
        names.append(name)
    return names


def load_csv_population(path):
    """Load a small population from CSV.

    Expected header: classifier,example,p0,...,p{M-1}; one row per
    (classifier, example) cell; the grid must be complete. Classifier
    order follows first appearance. Returns the same pair as
    load_population; values go through the float32 quantization the
    binary format would apply, so both ingestion paths agree.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise HeaderMismatch(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise IoError(f"reading csv {path}: {exc}") from exc

    if len(header) < 3 or header[0] != "classifier" or header[1] != "example":
        raise HeaderMismatch(
            f"{path}: header must start 'classifier,example,p0,...', got {header[:3]}"
        )
    num_classes = len(header) - 2
    for j in range(num_classes):
        if header[2 + j] != f"p{j}":
            raise HeaderMismatch(
                f"{path}: probability column {2 + j} named {header[2 + j]!r}, expected 'p{j}'"
            )

    order: dict[str, dict[int, list[float]]] = {}
    for k, row in enumerate(rows):
        line_no = k + 2
        if len(row) != num_classes + 2:
            raise ParseError(
                f"{path}: line {line_no}: expected {num_classes + 2} fields, got {len(row)}"
            )
        cid = row[0]
        try:
            example = int(row[1])
        except ValueError as exc:
            raise ParseError(f"{path}: line {line_no}: bad example index {row[1]!r}") from exc
        if example < 0:
            raise ParseError(f"{path}: line {line_no}: negative example index")
        try:
            probs = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise ParseError(f"{path}: line {line_no}: bad probability value") from exc
        cells = order.setdefault(cid, {})
        if example in cells:
            raise IncompleteGrid(
                f"{path}: duplicate cell (classifier {cid!r}, example {example})"
            )
        cells[example] = probs

    if not order:
        raise EmptyPopulation(f"{path}: no data rows")
    all_examples = set()
    for cells in order.values():
        all_examples.update(cells)
    num_examples = max(all_examples) + 1
    expected = set(range(num_examples))
    for cid, cells in order.items():
        missing = expected - set(cells)
        if missing:
            raise IncompleteGrid(
                f"{path}: classifier {cid!r} missing example {min(missing)}"
            )

    raw = np.empty((len(order), num_examples, num_classes), dtype=np.float32)
    entries = []
    for i, (cid, cells) in enumerate(order.items()):
        block = np.array([cells[e] for e in range(num_examples)], dtype=np.float64)
        raw[i] = block.astype(np.float32)
        _validate_block(raw[i], context=f"classifier {cid!r}")
        entries.append(
            ClassifierEntry(
                id=cid,
                architecture="csv-import",
                train_fraction="synthetic",
                epoch_stage="converged",
                payload_path=f"{cid}.prd",
            )
        )
    manifest = PopulationManifest(
        num_classes=num_classes, num_examples=num_examples, classifiers=tuple(entries)
    )
    return manifest, PredictionStore(raw, validate=False)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return "|".join(f"{int(c)}:{v:.6f}" for c, v in value)
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else f"{value:.6f}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _json_cell(value):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [[int(c), round(float(v), 6)] for c, v in value]
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else round(float(value), 6)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return str(value)


def write_report(rows, fieldnames, fmt: str, path) -> None:
    """Write tabular results as CSV or JSON.

    CSV columns follow fieldnames order; reals are rendered with six
    decimal places; (class, value) pair lists as "c:v|c:v"; missing
    values as empty cells. JSON mirrors the same field names and
    rounding, with null for missing.
    """
    rows = list(rows)
    try:
        if fmt == "csv":
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(fieldnames)
                for row in rows:
                    writer.writerow([_csv_cell(row.get(f)) for f in fieldnames])
        elif fmt == "json":
            doc = [{f: _json_cell(row.get(f)) for f in fieldnames} for row in rows]
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise IoError(f"writing report {path}: {exc}") from exc


def write_corruption_log(log, path) -> None:
    """Write flipped-label records as CSV (example, original, corrupted)."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["example", "original_label", "corrupted_label"])
            for example, original, corrupted in log:
                writer.writerow([int(example), int(original), int(corrupted)])
    except OSError as exc:
        raise IoError(f"writing corruption log {path}: {exc}") from exc


def load_corruption_log(path):
    """Read a corruption log back as a list of int triples."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["example", "original_label", "corrupted_label"]:
                raise HeaderMismatch(f"{path}: unexpected corruption log header {header}")
            return [(int(r[0]), int(r[1]), int(r[2])) for r in reader]
    except OSError as exc:
        raise IoError(f"reading corruption log {path}: {exc}") from exc
