"""Quick end-to-end check of the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/subkernel-py
"""

import json
import math
import sys
from pathlib import Path

import pysubkernel as sk


def close(a, b, rel):
    return abs(a / b - 1.0) < rel


def main():
    cauchy = sk.Subordinator(0.5)

    # subordinate free BM with beta = 1/2 is the Cauchy process
    t, r = 0.3, 0.8
    q = sk.heat_kernel("free", cauchy, t, 0.0, r)
    assert close(q, t / (math.pi * (t * t + r * r)), 1e-8), q

    est, err = sk.heat_kernel_mc("free", cauchy, t, 0.0, r, n_samples=200_000, seed=3)
    assert abs(est - q) < 4 * err, (est, q, err)

    j = sk.jump_kernel("free", cauchy, 0.0, 2.0)
    assert close(j, 1.0 / (math.pi * 4.0), 1e-6), j

    half = sk.Setting("halfline", cauchy)
    value, regime = half.heat(1e-2, 0.5, 0.505)
    assert value > 0 and regime == "on-diagonal", (value, regime)

    g = sk.green_function("interval", sk.Subordinator(0.3), 0.2, 0.6, length=1.0)
    env, _ = sk.Setting("interval", sk.Subordinator(0.3), length=1.0).green(0.2, 0.6, "integral")
    assert 0.02 < g / env < 50, (g, env)

    assert math.isinf(sk.green_function("free", sk.Subordinator(0.7), 0.0, 0.1))

    try:
        sk.Subordinator(1.2)
    except ValueError as e:
        assert "beta" in str(e)
    else:
        raise AssertionError("beta outside (0,1) accepted")

    fixtures = Path(__file__).resolve().parents[1] / "crates" / "subkernel" / "fixtures"
    report = json.loads(sk.run_report(json.dumps({"criteria": [1, 2]}), str(fixtures)))
    assert all(c["passed"] for c in report["criteria"])

    print("theorem ids:", ", ".join(sk.theorem_ids()))
    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
