"""Smoke test for the commcost_py extension.

Build first:  cargo build --release -p commcost-py
Then run:     python3 python/smoke_test.py
"""

import importlib.util
import math
import pathlib
import sys


def load():
    try:
        import commcost_py

        return commcost_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libcommcost_py.so"
        if lib.exists():
            spec = importlib.util.spec_from_file_location("commcost_py", lib)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("commcost_py not built; run cargo build --release -p commcost-py")


def main():
    cc = load()

    assert cc.parse_strategy("M3-S-P1-C2-P2", 5) == "M3-S-P1-C2-P2"
    try:
        cc.parse_strategy("M4-S", 5)
    except ValueError as e:
        print("rejected M4-S for N=5:", e)
    else:
        raise AssertionError("size mismatch accepted")

    assert math.isclose(cc.retention(0.9), 0.925)
    assert cc.estimate_yield(1000, [700, 490])[0] == 0.7 * 0.7
    value, err = cc.estimate_fidelity(900, 1000)
    assert value == 0.9 and abs(err - 0.00949) < 1e-5

    rows = cc.simulate(5, iterated=["B2-S-Pb-Pb-C4", "M5-S-P1-P2"], p=0.9, p_local=0.99, ensemble=2000, runs=2, seed=1)
    data = [r for r in rows if r["steps"] is not None and not r["strategy"].startswith("fmax:")]
    assert len(data) == 6, [r["strategy"] for r in rows]
    for r in data:
        assert 0.0 <= r["fidelity"] <= 1.0
        assert r["channel_uses"] == 4 * 4000
    print("simulate:", ", ".join(f'{r["strategy"]} F={r["fidelity"]:.3f}' for r in data))

    crossings = cc.crossovers([5, 10, 20], 0.9, 0.95)
    assert all(x is not None for _, x in crossings)
    print("toy crossovers:", crossings)

    records = cc.analytic([5], 0.9, 0.95, steps=2)
    assert any(r["strategy"] == "crossover:B2/M5" for r in records)

    passed, z = cc.compare(3, 0.9, 0.95, steps=2, ensemble=5000, runs=2)
    print(f"compare N=3: passed={passed} max|z|={z:.2f}")
    assert passed
    print("ok")


if __name__ == "__main__":
    main()
