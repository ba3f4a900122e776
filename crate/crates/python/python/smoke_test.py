"""Smoke test for the interlace_py extension module.

Build first with `cargo build --release -p interlace-python`; the script loads
target/release/libinterlace_py.so unless INTERLACE_PY_LIB points elsewhere.
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[3]


def load():
    candidates = [os.environ.get("INTERLACE_PY_LIB")] + [
        str(ROOT / "target" / profile / name)
        for profile in ("release", "debug")
        for name in ("libinterlace_py.so", "libinterlace_py.dylib", "interlace_py.dll")
    ]
    for path in filter(None, candidates):
        if os.path.exists(path):
            loader = importlib.machinery.ExtensionFileLoader("interlace_py", path)
            spec = importlib.util.spec_from_file_location("interlace_py", path, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("interlace_py library not found; run `cargo build --release -p interlace-python`")


def main():
    ip = load()

    assert math.isclose(ip.expected_online(1024, 0.82), 184.32)
    assert ip.estimate_search_path_bound(184) == 8
    assert abs(ip.candidate_probability(10_000) - 0.25) < 0.01
    report = ip.analyze(1024, 0.82, 40, 8.0)
    assert report["searchPathBound"] == 8
    print("analytics ok, backup size estimate", report["estimatedBackupSize"])

    p = ip.Predictor("dbg2")
    for bit in [True, False] * 20:
        sop = p.update(bit)
    assert 0.0 <= sop <= 1.0 and abs(p.current() - 0.5) < 0.05
    w = ip.Predictor("swdbg")
    for i in range(100):
        w.update(i % 4 != 0)
    assert w.right_state_size() >= 2
    print("predictors ok:", p.kind, round(p.current(), 3), w.kind, round(w.current(), 3))

    nodes = ip.generate(64, 3)
    assert len(nodes) == 64 and len(nodes[0]["nameId"]) == 6

    sim = ip.Simulation('capacity = 128\nchurn-kind = "uniform"\nuniform-q = 0.0\nsearch-cap = 0')
    sim.run_slot(0)
    ids = sim.online_ids()
    assert len(ids) == 128
    out = sim.run_search(sim.online_nodes()[0], ids[77])
    assert out["success"] and out["resolveInvocations"] == 0
    print("search ok:", out["hops"], "hops,", round(out["latencyMs"], 1), "ms")

    metrics = ip.simulate("capacity = 128\nslots = 8\ntopologies = 2\nsearch-cap = 50")
    assert metrics["topologies"] == 2 and len(metrics["slots"]) == 8
    assert 0.0 <= metrics["avgSuccessRatio"] <= 1.0
    rows = ip.run_experiments("capacity = 64\nslots = 4\ntopologies = 1\nbackup-size = [10, 20]")
    assert [r["backupSize"] for r in rows] == [10, 20]
    print("simulation ok: success ratio", round(metrics["avgSuccessRatio"], 4))

    try:
        ip.Simulation("capacity = 100")
    except ValueError as e:
        assert "power of two" in str(e)
    else:
        raise AssertionError("bad capacity accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
