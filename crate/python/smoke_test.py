"""Smoke test for the pyonlinelp extension.

Build and run:
    cargo build --release -p pyonlinelp
    cp target/release/libpyonlinelp.so python/pyonlinelp.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pyonlinelp as ol

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")


def main():
    one = ol.Instance([1.0], [[1.0]], [0.5])
    lp = ol.solve_relaxation(one)
    assert lp["status"] == "optimal"
    assert abs(lp["objective"] - 0.5) < 1e-12 and abs(lp["duals"][0] - 1.0) < 1e-12

    inst = ol.generate("uniform", 2000, 4, seed=3)
    assert (inst.n, inst.m) == (2000, 4)
    soa = ol.run_soa(inst, "sqrt_n", history=True)
    assert len(soa.decisions) == 2000 and len(soa.dual_norm_history) == 2001
    res = ol.evaluate_trial(inst, soa)
    assert abs(res["regret"] - (res["offline_lp_opt"] - soa.objective)) < 1e-9

    sfa = ol.run_sfa(inst)
    assert inst.violation(sfa.decisions) == 0.0

    fixed = ol.repair(inst, soa, seed=1)
    assert fixed.accepted <= soa.accepted

    small = ol.generate("gaussian", 10, 2, seed=5)
    best, x = ol.solve_binary_exact(small)
    assert best <= ol.solve_relaxation(small)["objective"] + 1e-7

    multi = ol.run_multi_soa([[r] for r in inst.rewards],
                             [[inst.column(j)] for j in range(inst.n)],
                             inst.capacity, seed=0)
    assert multi.decisions == soa.decisions

    probs = ol.read_mknap(os.path.join(ROOT, "data", "mknap_sample.txt"))
    first, opt = probs[0]
    assert opt == 3800.0 and ol.solve_binary_exact(first)[0] == 3800.0

    try:
        ol.Instance([1.0], [[1.0]], [-1.0])
    except ol.OnlineLpError:
        pass
    else:
        raise AssertionError("negative capacity accepted")

    print("pyonlinelp smoke test passed; SOA competitiveness %.4f" % res["competitiveness"])


if __name__ == "__main__":
    main()
