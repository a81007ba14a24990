"""Command-line pipeline over stored classifier populations.

Data goes to files under --out; diagnostics go to stderr. Every
subcommand is deterministic given its inputs and flags, including
--threads: worker count never changes output bytes.

Exit codes: 0 success, 2 bad input or configuration, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from .audit import (
    DEFAULT_TAU_C,
    DEFAULT_TAU_S,
    DEFAULT_TAU_X,
    flag_class_pairs,
    flag_examples,
)
from .errors import ConfigInvalid, DegenerateSample, XplxError
from .perplexity import population_metrics
from .population import (
    SubsetFilter,
    SynthConfig,
    compare_populations,
    subset,
    synthesize_population,
)
from .stats import HistogramSpec, box_stats, gaussian_kde, histogram
from .storage import (
    load_class_names,
    load_csv_population,
    load_labels,
    load_population,
    write_corruption_log,
    write_labels,
    write_manifest,
    write_payload,
    write_report,
)
from .votes import DEFAULT_TOP_K, analyze_examples, class_confusion, class_perplexities

_SUBSET_KEYS = ("train_fraction", "architecture", "epoch_stage", "id")
_NAME_RE = re.compile(r"[A-Za-z0-9_.-]+\Z")


def _resolve_threads(requested: int | None) -> int:
    if requested is not None:
        if requested < 1:
            raise ConfigInvalid("--threads must be at least 1")
        return requested
    env = os.environ.get("XPLX_THREADS")
    if env:
        try:
            parsed = int(env)
        except ValueError as exc:
            raise ConfigInvalid(f"XPLX_THREADS is not an integer: {env!r}") from exc
        if parsed < 1:
            raise ConfigInvalid("XPLX_THREADS must be at least 1")
        return parsed
    return os.cpu_count() or 1


def _load_inputs(args):
    threads = _resolve_threads(args.threads)
    if str(args.manifest).endswith(".csv"):
        manifest, store = load_csv_population(args.manifest)
    else:
        manifest, store = load_population(args.manifest, threads=threads)
    labels = load_labels(args.labels, store.num_examples, store.num_classes)
    names = None
    if args.class_names:
        names = load_class_names(args.class_names, store.num_classes)
    return manifest, store, labels, names, threads


def _out_path(args, filename: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, filename)


def _report_name(stem: str, fmt: str) -> str:
    return f"{stem}.{fmt}"


def cmd_analyze(args) -> int:
    _, store, labels, _, threads = _load_inputs(args)
    reports = analyze_examples(store, labels, k=args.top_k, threads=threads)
    rows = [
        {
            "index": r.example_index,
            "c_perplexity": r.c_perplexity,
            "x_perplexity": r.x_perplexity,
            "top_voted": r.top_voted_labels,
            "top_expected": r.top_expected_labels,
        }
        for r in reports
    ]
    fields = ["index", "c_perplexity", "x_perplexity", "top_voted", "top_expected"]
    write_report(rows, fields, args.format,
                 _out_path(args, _report_name("examples", args.format)))

    def describe(values):
        box = box_stats(values)
        return {
            "mean": float(np.mean(values)),
            "min": box.min, "q1": box.q1, "median": box.median,
            "q3": box.q3, "max": box.max,
        }

    cp = np.array([r.c_perplexity for r in reports])
    xp = np.array([r.x_perplexity for r in reports])
    summary = {
        "examples": store.num_examples,
        "classifiers": store.num_classifiers,
        "classes": store.num_classes,
        "c_perplexity": describe(cp),
        "x_perplexity": describe(xp),
    }
    with open(_out_path(args, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"analyzed {store.num_examples} examples over "
          f"{store.num_classifiers} classifiers", file=sys.stderr)
    return 0


def _confusion_rows(table, names):
    m = table.freq.shape[0]
    fields = ["class"] + (["name"] if names else []) + [str(j) for j in range(m)]
    rows = []
    for c in range(m):
        row = {"class": c}
        if names:
            row["name"] = names[c]
        for j in range(m):
            row[str(j)] = table.freq[c, j]
        rows.append(row)
    return rows, fields


def cmd_classes(args) -> int:
    _, store, labels, names, threads = _load_inputs(args)
    metrics = population_metrics(store, labels, threads=threads)
    voted = class_confusion(store, labels, "voted", metrics=metrics)
    expected = class_confusion(store, labels, "expected", metrics=metrics)
    reports = analyze_examples(store, labels, k=args.top_k,
                               threads=threads, metrics=metrics)
    classes = class_perplexities(reports, labels, voted_confusion=voted,
                                 expected_confusion=expected, k=args.top_k)

    for r in classes:
        if r.example_count == 0:
            print(f"warning: class {r.class_index} has no examples", file=sys.stderr)

    def sort_key(r):
        value = r.class_c_perplexity if args.sort == "cp" else r.class_x_perplexity
        return (math.isnan(value), -value if not math.isnan(value) else 0.0,
                r.class_index)

    rows = []
    for r in sorted(classes, key=sort_key):
        row = {"class": r.class_index}
        if names:
            row["name"] = names[r.class_index]
        row.update({
            "c_perplexity": r.class_c_perplexity,
            "x_perplexity": r.class_x_perplexity,
            "example_count": r.example_count,
            "top_voted_confusion": r.top_voted_confusion,
            "top_expected_confusion": r.top_expected_confusion,
        })
        rows.append(row)
    fields = ["class"] + (["name"] if names else []) + [
        "c_perplexity", "x_perplexity", "example_count",
        "top_voted_confusion", "top_expected_confusion",
    ]
    write_report(rows, fields, args.format,
                 _out_path(args, _report_name("classes", args.format)))

    for mode, table in (("voted", voted), ("expected", expected)):
        mat_rows, mat_fields = _confusion_rows(table, names)
        write_report(mat_rows, mat_fields, "csv",
                     _out_path(args, f"confusion_{mode}.csv"))
    return 0


def cmd_flag(args) -> int:
    _, store, labels, names, threads = _load_inputs(args)
    metrics = population_metrics(store, labels, threads=threads)
    reports = analyze_examples(store, labels, threads=threads, metrics=metrics)
    voted = class_confusion(store, labels, "voted", metrics=metrics)
    findings = flag_examples(reports, labels, tau_x=args.tau_x, tau_c=args.tau_c)
    example_count = len(findings)
    findings += flag_class_pairs(voted, tau_s=args.tau_s)

    def named(index):
        return names[index] if names is not None and index is not None else None

    rows = []
    for f in findings:
        row = {
            "kind": f.kind,
            "example": f.example,
            "label": f.label,
            "x_perplexity": f.x_perplexity,
            "c_perplexity": f.c_perplexity,
            "suggested_label": f.suggested_label,
            "top_voted": list(f.top_voted) if f.top_voted is not None else None,
            "top_expected": list(f.top_expected) if f.top_expected is not None else None,
            "class_a": f.class_a,
            "class_b": f.class_b,
            "symmetric_confusion": f.symmetric_confusion,
        }
        if names:
            row["label_name"] = named(f.label)
            row["suggested_label_name"] = named(f.suggested_label)
            row["class_a_name"] = named(f.class_a)
            row["class_b_name"] = named(f.class_b)
        rows.append(row)
    fields = ["kind", "example", "label", "x_perplexity", "c_perplexity",
              "suggested_label", "top_voted", "top_expected",
              "class_a", "class_b", "symmetric_confusion"]
    if names:
        fields += ["label_name", "suggested_label_name",
                   "class_a_name", "class_b_name"]
    write_report(rows, fields, args.format,
                 _out_path(args, _report_name("findings", args.format)))
    print(f"{example_count} example findings, "
          f"{len(findings) - example_count} class-pair findings", file=sys.stderr)
    return 0


def parse_subset_spec(text: str):
    """Parse 'name=<name>:key=v1|v2,...' into (name, SubsetFilter).

    Valid keys: train_fraction, architecture, epoch_stage, id. A spec
    with no filter segments matches the whole population.
    """
    usage = "usage: name=<name>:train_fraction=0.25|0.5:architecture=..."
    segments = text.split(":")
    if not segments[0].startswith("name=") or len(segments[0]) <= 5:
        raise ConfigInvalid(f"subset spec {text!r} must start with name=<name>; {usage}")
    name = segments[0][5:]
    if not _NAME_RE.match(name):
        raise ConfigInvalid(
            f"subset name {name!r} must use only letters, digits, '.', '-', '_'")
    collected: dict[str, set] = {}
    for segment in segments[1:]:
        key, eq, value = segment.partition("=")
        if not eq or not value:
            raise ConfigInvalid(f"subset spec segment {segment!r} is not key=value; {usage}")
        if key not in _SUBSET_KEYS:
            raise ConfigInvalid(
                f"unknown filter key {key!r}; valid keys: {', '.join(_SUBSET_KEYS)}")
        parts = value.split("|")
        if key == "train_fraction":
            parsed = set()
            for p in parts:
                if p == "synthetic":
                    parsed.add("synthetic")
                else:
                    try:
                        parsed.add(float(p))
                    except ValueError as exc:
                        raise ConfigInvalid(
                            f"train_fraction value {p!r} is not a number or 'synthetic'"
                        ) from exc
        else:
            parsed = set(parts)
        collected.setdefault(key, set()).update(parsed)
    filt = SubsetFilter(
        train_fractions=collected.get("train_fraction"),
        architectures=collected.get("architecture"),
        epoch_stages=collected.get("epoch_stage"),
        explicit_ids=collected.get("id"),
    )
    return name, filt


def _write_hist(args, filename, spec, result):
    edges = spec.edges()
    rows = [
        {"bin_lo": float(edges[i]), "bin_hi": float(edges[i + 1]), "count": int(c)}
        for i, c in enumerate(result.counts)
    ]
    write_report(rows, ["bin_lo", "bin_hi", "count"], "csv", _out_path(args, filename))


def _write_kde(args, filename, kde):
    if kde is None:
        write_report([], ["grid", "density"], "csv", _out_path(args, filename))
        return
    grid, density = kde
    rows = [{"grid": float(g), "density": float(d)} for g, d in zip(grid, density)]
    write_report(rows, ["grid", "density"], "csv", _out_path(args, filename))


def cmd_compare(args) -> int:
    manifest, store, labels, _, threads = _load_inputs(args)
    specs = [parse_subset_spec(s) for s in args.subsets]
    named_stores = []
    for name, filt in specs:
        try:
            _, sub = subset(manifest, store, filt)
        except XplxError as exc:
            raise type(exc)(f"subset {name!r}: {exc}") from exc
        named_stores.append((name, sub))
    comp = compare_populations(named_stores, labels, bins=args.bins, threads=threads)

    summary_rows = []
    for s in comp.subsets:
        xp, cp = s.x_perplexity, s.c_perplexity
        summary_rows.append({
            "name": s.name,
            "classifiers": s.num_classifiers,
            "xp_mean": float(np.mean(xp)), "xp_stddev": s.xp_stddev,
            "xp_iqr": s.xp_iqr, "xp_min": s.xp_box.min, "xp_q1": s.xp_box.q1,
            "xp_median": s.xp_box.median, "xp_q3": s.xp_box.q3, "xp_max": s.xp_box.max,
            "cp_mean": float(np.mean(cp)), "cp_stddev": s.cp_stddev,
            "cp_iqr": s.cp_iqr, "cp_min": s.cp_box.min, "cp_q1": s.cp_box.q1,
            "cp_median": s.cp_box.median, "cp_q3": s.cp_box.q3, "cp_max": s.cp_box.max,
        })
        metric_rows = [
            {"index": e, "c_perplexity": float(cp[e]), "x_perplexity": float(xp[e])}
            for e in range(len(cp))
        ]
        write_report(metric_rows, ["index", "c_perplexity", "x_perplexity"],
                     args.format,
                     _out_path(args, _report_name(f"{s.name}_metrics", args.format)))
        _write_hist(args, f"{s.name}_xp_hist.csv", s.xp_hist_spec, s.xp_histogram)
        _write_hist(args, f"{s.name}_cp_hist.csv", s.cp_hist_spec, s.cp_histogram)
        if s.xp_kde is None or s.cp_kde is None:
            print(f"warning: subset {s.name!r}: constant metric, kde skipped",
                  file=sys.stderr)
        _write_kde(args, f"{s.name}_xp_kde.csv", s.xp_kde)
        _write_kde(args, f"{s.name}_cp_kde.csv", s.cp_kde)

    fields = ["name", "classifiers",
              "xp_mean", "xp_stddev", "xp_iqr", "xp_min", "xp_q1", "xp_median",
              "xp_q3", "xp_max",
              "cp_mean", "cp_stddev", "cp_iqr", "cp_min", "cp_q1", "cp_median",
              "cp_q3", "cp_max"]
    write_report(summary_rows, fields, args.format,
                 _out_path(args, _report_name("subsets", args.format)))

    corr_rows = []
    for (name_a, name_b), per_metric in comp.correlations.items():
        for metric_key, short in (("x_perplexity", "xp"), ("c_perplexity", "cp")):
            report = per_metric[metric_key]
            if report is None:
                print(f"warning: {name_a} vs {name_b}: {short} correlation "
                      "undefined (constant metric)", file=sys.stderr)
            corr_rows.append({
                "subset_a": name_a,
                "subset_b": name_b,
                "metric": short,
                "pearson": None if report is None else report.pearson,
                "spearman": None if report is None else report.spearman,
                "kendall_tau_a": None if report is None else report.kendall_tau_a,
                "kendall_tau_b": None if report is None else report.kendall_tau_b,
            })
    write_report(corr_rows,
                 ["subset_a", "subset_b", "metric", "pearson", "spearman",
                  "kendall_tau_a", "kendall_tau_b"],
                 "csv", _out_path(args, "correlations.csv"))
    return 0


def parse_tiers(text: str):
    tiers = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 4:
            raise ConfigInvalid(f"tier {part!r}: expected label:count:lo:hi")
        label, count_s, lo_s, hi_s = bits
        try:
            tiers.append((label, int(count_s), float(lo_s), float(hi_s)))
        except ValueError as exc:
            raise ConfigInvalid(f"tier {part!r}: {exc}") from exc
    return tuple(tiers)


def cmd_synth(args) -> int:
    seed = args.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little")
    kwargs = dict(
        num_classes=args.classes,
        num_examples=args.examples,
        base_concentration=args.base_concentration,
        sharpness=args.sharpness,
        difficulty_shape=args.difficulty_shape,
        mislabel_fraction=args.mislabel_fraction,
        seed=seed,
    )
    if args.tiers is not None:
        kwargs["tiers"] = parse_tiers(args.tiers)
    config = SynthConfig(**kwargs)
    manifest, store, labels, log = synthesize_population(config)
    os.makedirs(args.out, exist_ok=True)
    for i, entry in enumerate(manifest.classifiers):
        write_payload(os.path.join(args.out, entry.payload_path), store.raw[i])
    write_manifest(manifest, os.path.join(args.out, "manifest.json"))
    write_labels(labels, os.path.join(args.out, "labels.txt"))
    write_corruption_log(log, os.path.join(args.out, "corruption_log.csv"))
    print(f"seed: {seed}", file=sys.stderr)
    print(f"wrote {len(manifest)} classifiers, {manifest.num_examples} examples, "
          f"{len(log)} corrupted labels", file=sys.stderr)
    return 0


def cmd_hist(args) -> int:
    _, store, labels, _, threads = _load_inputs(args)
    metrics = population_metrics(store, labels, threads=threads)
    if args.metric == "xp":
        values = metrics.x_perplexity
        spec = HistogramSpec(lo=0.0, hi=1.0, bin_count=args.bins)
    else:
        values = metrics.c_perplexity
        top = float(values.max())
        spec = HistogramSpec(lo=1.0, hi=top if top > 1.0 else 2.0,
                             bin_count=args.bins)
    _write_hist(args, "histogram.csv", spec, histogram(values, spec))
    try:
        kde = gaussian_kde(values)
    except DegenerateSample as exc:
        print(f"warning: kde skipped: {exc}", file=sys.stderr)
        kde = None
    _write_kde(args, "kde.csv", kde)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xplx",
        description="Per-example and per-class difficulty metrics from a "
                    "population of classifiers' probability outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    io_common = argparse.ArgumentParser(add_help=False)
    io_common.add_argument("--manifest", required=True,
                           help="population manifest (.json) or grid CSV (.csv)")
    io_common.add_argument("--labels", required=True,
                           help="ground-truth labels, one integer per line")

    out_common = argparse.ArgumentParser(add_help=False)
    out_common.add_argument("--out", default=".",
                            help="output directory, created if absent")
    out_common.add_argument("--format", choices=("csv", "json"), default="csv",
                            help="row-report format (contract-named CSVs stay CSV)")
    out_common.add_argument("--threads", type=int, default=None,
                            help="worker cap; defaults to XPLX_THREADS, then CPU count")
    out_common.add_argument("--class-names", default=None,
                            help="optional class-name file, one name per line")

    p = sub.add_parser("analyze", parents=[io_common, out_common],
                       help="per-example metrics: examples report + summary.json")
    p.add_argument("--top-k", type=int, default=DEFAULT_TOP_K,
                   help="labels kept in the top voted/expected lists")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classes", parents=[io_common, out_common],
                       help="per-class report plus confusion tables")
    p.add_argument("--sort", choices=("cp", "xp"), default="cp",
                   help="sort classes by mean c-perplexity or x-perplexity")
    p.add_argument("--top-k", type=int, default=DEFAULT_TOP_K)
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("flag", parents=[io_common, out_common],
                       help="audit findings: suspect examples and class pairs")
    p.add_argument("--tau-x", type=float, default=DEFAULT_TAU_X,
                   help="x-perplexity threshold for example findings")
    p.add_argument("--tau-c", type=float, default=DEFAULT_TAU_C,
                   help="c-perplexity cutoff separating the two example kinds")
    p.add_argument("--tau-s", type=float, default=DEFAULT_TAU_S,
                   help="symmetric-confusion threshold for class pairs")
    p.set_defaults(func=cmd_flag)

    p = sub.add_parser("compare", parents=[io_common, out_common],
                       help="metric distributions and correlations across subsets")
    p.add_argument("subsets", nargs="+",
                   help="subset specs like name=strong:train_fraction=1.0")
    p.add_argument("--bins", type=int, default=20)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", parents=[out_common],
                       help="generate a synthetic population on disk")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--examples", type=int, required=True)
    p.add_argument("--tiers", default=None,
                   help="label:count:lo:hi[,...]; default four-tier ladder")
    p.add_argument("--base-concentration", type=float, default=0.5)
    p.add_argument("--sharpness", type=float, default=20.0)
    p.add_argument("--difficulty-shape", type=float, default=3.0)
    p.add_argument("--mislabel-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None,
                   help="generator seed; random (and printed) when omitted")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hist", parents=[io_common, out_common],
                       help="histogram and kde data for one metric")
    p.add_argument("--metric", choices=("xp", "cp"), required=True)
    p.add_argument("--bins", type=int, default=20)
    p.set_defaults(func=cmd_hist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except XplxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
