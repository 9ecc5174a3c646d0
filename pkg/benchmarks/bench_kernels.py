"""Compare the numba kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--T 15] [--repeat 3]

The backend is fixed at import time, so each one runs in its own
interpreter with ``ADAPTIVE_CONSENSUS_NO_JIT`` set accordingly. Reported
times exclude compilation (one warm-up run first).
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from adaptive_consensus import backend_name, kernels
from adaptive_consensus.scenario import paper_scenario
from adaptive_consensus.sim import SimConfig, pack_params, run

T, repeat = float(sys.argv[1]), int(sys.argv[2])
sc = paper_scenario("b", controlled=True, sim=SimConfig(h=1e-3, T=T, stride=10))
run(sc.with_sim(T=0.01, stride=1))

p = pack_params(sc)
y = np.linspace(-1.0, 1.0, 3 * p.n + p.src.size)
out = np.empty_like(y)
n_eval = 20000
t0 = time.perf_counter()
for i in range(n_eval):
    kernels._rhs(kernels.CLOSED_LOOP, 0.1 * i, y, p, out)
rhs_us = (time.perf_counter() - t0) / n_eval * 1e6

times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    traj = run(sc)
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": backend_name(), "rhs_us": rhs_us, "run_s": min(times),
                  "x_final": traj.x[-1].tolist()}))
"""


def measure(no_jit, T, repeat):
    env = dict(os.environ, ADAPTIVE_CONSENSUS_NO_JIT="1" if no_jit else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, str(T), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--T", type=float, default=15.0, help="simulated horizon (h = 1e-3)")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    results = [measure(False, args.T, args.repeat), measure(True, args.T, args.repeat)]
    print(f"{'backend':8} {'rhs eval (us)':>14} {'run (s)':>10}")
    for r in results:
        print(f"{r['backend']:8} {r['rhs_us']:14.2f} {r['run_s']:10.4f}")
    fast, slow = results
    drift = max(abs(a - b) for a, b in zip(fast["x_final"], slow["x_final"]))
    print(f"speedup: rhs x{slow['rhs_us'] / fast['rhs_us']:.1f}, run x{slow['run_s'] / fast['run_s']:.1f}; "
          f"max |x_final difference| {drift:.1e}")


if __name__ == "__main__":
    main()
