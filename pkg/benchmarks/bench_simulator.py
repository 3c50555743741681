#!/usr/bin/env python3
"""Compare the numba-compiled and pure-Python simulator kernels.

Run:  python benchmarks/bench_simulator.py [horizon]

The backend is chosen by FLUIDTAIL_BACKEND at import time, so each backend
runs in its own subprocess; this driver launches both and prints events/s.
"""

import json
import os
import subprocess
import sys
import time

_WORKER = """
import json, os, sys, time
from fluidtail.model import ModelParams
from fluidtail.simulate import SimConfig, simulate
from fluidtail import _sim_core

horizon = float(sys.argv[1])
params = ModelParams(c=2, lam=1.0, mu=1.5, r=1.0)
cfg = SimConfig(params=params, horizon=horizon, warmup=10.0, seed=42, sample_stride=1.0)
simulate(cfg, fit=False)  # warm the JIT before timing
t0 = time.perf_counter()
est = simulate(cfg, fit=False)
elapsed = time.perf_counter() - t0
print(json.dumps({
    "backend": "numba" if _sim_core.USE_NUMBA else "numpy",
    "events": est.n_events,
    "seconds": elapsed,
    "checksum": float(est.samples_level.sum()),
}))
"""


def run(backend: str, horizon: float) -> dict:
    env = dict(os.environ, FLUIDTAIL_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(horizon)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    horizon = float(sys.argv[1]) if len(sys.argv) > 1 else 2e5
    results = [run("numba", horizon), run("numpy", horizon)]
    for res in results:
        rate = res["events"] / res["seconds"]
        print(f"{res['backend']:>6s}: {res['events']:>10d} events in "
              f"{res['seconds']:8.3f}s  ({rate:.3g} events/s)")
    if results[0]["checksum"] != results[1]["checksum"]:
        print("WARNING: backends disagree on the sample stream")
        return 1
    speedup = results[1]["seconds"] / results[0]["seconds"]
    print(f"numba speedup: {speedup:.1f}x (identical sample streams)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
