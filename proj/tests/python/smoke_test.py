"""Smoke test of the python bindings: a short run in each mode, a tiny
campaign, the analytic landmarks, and the JSON report front end."""

import json
import sys

import hmrsim_py as hs


def test_run_modes():
    cycles = {}
    for mode in ("independent", "dmr", "tmr"):
        r = hs.run_matmul(mode, rapid=True, dim=12)
        assert r["completed"], mode
        assert r["correct"], mode
        assert r["errors_detected"] == 0, mode
        cycles[mode] = r["cycles"]
    assert cycles["independent"] < cycles["dmr"] < cycles["tmr"]


def test_campaign():
    r = hs.run_campaign("tmr", rapid=True, runs=25, seed=7)
    assert r["sdc"] == 0
    assert r["hang"] == 0
    assert r["masked"] + r["detected_recovered"] == 25
    again = hs.run_campaign("tmr", rapid=True, runs=25, seed=7)
    assert again["report_hash"] == r["report_hash"]


def test_analytics():
    p = hs.matmul_model()
    assert abs(hs.gops(p, hs.ExecModel.DCLS_SW, 0.0) / 1e6 - 617) <= 1
    assert abs(hs.gops(p, hs.ExecModel.TCLS_SW, 0.0) / 1e6 - 414) <= 1
    assert 2.4e7 <= hs.crossover_rate(p) <= 3.6e7
    c = hs.cfft_model()
    assert abs(hs.gops(c, hs.ExecModel.TCLS_SW, 0.0) / 1e6 - 385) <= 1


def test_report():
    cfg = {
        "kind": "run",
        "cluster": {"mode": "dmr", "rapid_recovery": True},
        "workload": {"name": "matmul", "dim": 8},
    }
    rep = json.loads(hs.report(json.dumps(cfg)))
    assert rep["completed"] and rep["result_correct"]
    assert rep["kind"] == "run"
    rep2 = json.loads(hs.report(json.dumps(cfg)))
    assert rep == rep2


def main():
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok {name}")
    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
