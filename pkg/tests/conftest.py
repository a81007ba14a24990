import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from xplx.model import LabelVector, PredictionStore


def random_population(seed, num_classifiers=None, num_examples=None, num_classes=None):
    """Seeded random store + labels for property tests."""
    rng = np.random.default_rng(seed)
    n = num_classifiers or int(rng.integers(1, 11))
    e = num_examples or int(rng.integers(1, 51))
    m = num_classes or int(rng.integers(2, 9))
    raw = rng.dirichlet(np.full(m, 0.6), size=(n, e)).astype(np.float32)
    labels = LabelVector.from_values(rng.integers(0, m, size=e), num_classes=m)
    return PredictionStore(raw), labels


# -- acceptance reporting -------------------------------------------------
# Collect pass/fail per acceptance test and print one line each at the
# end of the run, where capture cannot swallow it.

_acceptance_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance_results.items()):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")
