"""Regression against frozen CLI outputs in tests/golden.

CSV files are compared byte for byte (values carry 6 significant digits);
JSON documents are compared value by value with a 1e-9 relative tolerance.
Regenerate with ``coopmac reproduce figN --out tests/golden`` and
``coopmac region configs/pentagon.json --out tests/golden``.
"""

import json
import math
import os

import pytest

from coopmac.cli import main

HERE = os.path.dirname(__file__)
GOLDEN = os.path.join(HERE, "golden")


def assert_close(a, b, path="$"):
    if isinstance(a, dict):
        assert isinstance(b, dict) and a.keys() == b.keys(), path
        for k in a:
            assert_close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            assert_close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12), f"{path}: {a} != {b}"
    else:
        assert a == b, f"{path}: {a!r} != {b!r}"


def compare(out_dir, names):
    for name in names:
        got = os.path.join(out_dir, name)
        want = os.path.join(GOLDEN, name)
        if name.endswith(".csv"):
            assert open(got, "rb").read() == open(want, "rb").read(), name
        else:
            assert_close(json.load(open(got)), json.load(open(want)))


@pytest.mark.parametrize("figure", ["fig3", "fig4", "fig5"])
def test_reproduce_golden(figure, tmp_path):
    assert main(["reproduce", figure, "--out", str(tmp_path)]) == 0
    compare(tmp_path, [f"{figure}_boundary.csv", f"{figure}_summary.json"])


def test_pentagon_golden(tmp_path):
    cfg = os.path.join(HERE, os.pardir, "configs", "pentagon.json")
    assert main(["region", cfg, "--out", str(tmp_path)]) == 0
    compare(tmp_path, ["region_bounds.csv", "region_vertices.csv"])
