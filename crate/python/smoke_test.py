"""Smoke test for the ringbench extension module.

Build the module first, e.g. `maturin develop -m crates/py/Cargo.toml`, or
`cargo build -p ringbench-py --release` and put `libringbench.so` on the
path as `ringbench.so`. Pass `--lib path/to/libringbench.so` to load a
freshly built library directly.
"""

import argparse
import csv
import importlib.machinery
import importlib.util
import json
import os
import sys
import tempfile


def import_ringbench(lib):
    if lib is None:
        import ringbench

        return ringbench
    loader = importlib.machinery.ExtensionFileLoader("ringbench", lib)
    spec = importlib.util.spec_from_file_location("ringbench", lib, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--lib", help="path to a built libringbench shared object")
    args = parser.parse_args()
    rb = import_ringbench(args.lib)

    g = rb.generate(scale="small", seed=42)
    print(g)
    assert g.node_count("user") == 2000
    assert len(g.columns("user")) == 10
    labels = g.labels("user")
    assert abs(sum(labels) / len(labels) - g.fraud_rate) < 1e-12
    assert g.isolation_breaches() == 0
    assert g.leakage() == (0, 0)

    h = {row[0]: row[1] for row in g.homophily()["rows"]}
    assert h["uses_device"]["homophily"] == 1.0

    report, scores = g.baseline("tabular")
    print("tabular auc", round(report["auc_roc"], 4))
    assert 0.5 < report["auc_roc"] < 1.0
    assert len(scores) == 2000

    oracle = [(u, 0.9 if y else 0.1) for u, y in enumerate(labels)]
    assert g.evaluate(oracle)["auc_roc"] == 1.0

    assert rb.auc_roc([0.9, 0.1, 0.5], [True, False, True]) == 1.0
    lo, hi = rb.wilson_interval(1, 6)
    assert 0.0 < lo < hi < 1.0
    assert rb.ring_recovered([0.9, 0.9, 0.9, 0.9, 0.2])

    try:
        rb.generate(scale="mega")
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("unknown preset accepted")

    with tempfile.TemporaryDirectory() as d:
        digest = g.export(d)
        manifest = json.load(open(os.path.join(d, "manifest.json")))
        assert manifest["digest"] == digest
        with open(os.path.join(d, "nodes_user.csv")) as f:
            rows = list(csv.reader(f))
        assert len(rows) == 2001
        back = rb.load(d)
        assert back.manifest["digest"] == digest
        assert back.labels("user") == labels
        assert back.partitions() == g.partitions()

    dropped = g.drop_feature("distinct_device_count")
    assert len(dropped.columns("user")) == 9
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
