"""Tour of the on-disk formats: payloads, manifests, labels, CSV, reports.

Everything downstream tooling needs to interoperate without importing
this library.
"""

import json
import struct
import tempfile
from pathlib import Path

import numpy as np

from xplx.model import ClassifierEntry, LabelVector, PopulationManifest
from xplx.storage import (
    load_csv_population,
    load_population,
    read_payload,
    write_labels,
    write_manifest,
    write_payload,
    write_report,
)

tmp = Path(tempfile.mkdtemp())

# --- binary payload ---------------------------------------------------
# magic, example count, class count, then float32 rows, all little
# endian, example-major. One file per classifier.
rows = np.array([[0.7, 0.2, 0.1],
                 [0.1, 0.8, 0.1]], dtype=np.float32)
write_payload(tmp / "clf.prd", rows)

blob = (tmp / "clf.prd").read_bytes()
magic, e, m = blob[:8], *struct.unpack("<QQ", blob[8:24])
print(f"payload magic={magic!r} examples={e} classes={m} size={len(blob)}")
assert len(blob) == 24 + 4 * e * m
# first float: example 0, class 0
assert struct.unpack("<f", blob[24:28])[0] == np.float32(0.7)

back = read_payload(tmp / "clf.prd")
assert back.tobytes() == rows.tobytes()

# --- manifest + labels ------------------------------------------------
entry = ClassifierEntry(id="clf", architecture="resnet18",
                        train_fraction=0.5, epoch_stage="converged",
                        payload_path="clf.prd")
manifest = PopulationManifest(num_classes=3, num_examples=2,
                              classifiers=(entry,))
write_manifest(manifest, tmp / "manifest.json")
print()
print("manifest.json:")
print((tmp / "manifest.json").read_text())

labels = LabelVector.from_values([0, 1], num_classes=3)
write_labels(labels, tmp / "labels.txt")         # one integer per line

manifest2, store = load_population(tmp / "manifest.json")
assert store.raw.tobytes() == rows.tobytes()

# --- CSV population ---------------------------------------------------
# the flat interchange format: one row per (classifier, example)
csv_text = (
    "classifier,example,p0,p1,p2\n"
    "clf,0,0.7,0.2,0.1\n"
    "clf,1,0.1,0.8,0.1\n"
)
(tmp / "pop.csv").write_text(csv_text)
_, store_csv = load_csv_population(tmp / "pop.csv")
assert store_csv.raw.tobytes() == rows.tobytes()
print("csv population matches binary payload bit for bit")

# --- row reports ------------------------------------------------------
# write_report renders the same rows as csv or json; floats at six
# decimal places, (class, value) pair lists as "class:value|..." in
# csv and nested arrays in json, missing values empty/null.
report_rows = [
    {"index": 0, "x_perplexity": 0.0, "top_voted": [(0, 1.0)]},
    {"index": 1, "x_perplexity": float("nan"), "top_voted": None},
]
fields = ["index", "x_perplexity", "top_voted"]
write_report(report_rows, fields, "csv", tmp / "r.csv")
write_report(report_rows, fields, "json", tmp / "r.json")
print()
print("r.csv:")
print((tmp / "r.csv").read_text())
print("r.json:")
print((tmp / "r.json").read_text())
assert json.loads((tmp / "r.json").read_text())[1]["x_perplexity"] is None
