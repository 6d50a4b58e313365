"""Benchmark: compiled kernels vs the pure-Python reference.

Times the three hot kernels in-process (both implementations are importable
side by side) and a full batch session end to end in subprocesses, once per
backend, using WATTWISE_PURE to force the fallback.

Run:  python benchmarks/bench_kernels.py
"""

import math
import os
import subprocess
import sys
import time

from wattwise import kernels
from wattwise.kernels import _ref


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


SESSION_SNIPPET = """
import time
from wattwise.sim import load_bundled_scenario, uniform_persona, Session, schedule_kb
import wattwise.kernels as k
spec = load_bundled_scenario("office-week")
kb = schedule_kb(spec)
persona = uniform_persona("b", {"plain": 0.6, "persuasive": 0.6, "explainable": 0.6},
                          p_ignore=0.165)
t0 = time.perf_counter()
for seed in range(8):
    Session(spec, kb, "explainable", seed, persona=persona).run()
print(f"{k.BACKEND}\t{time.perf_counter() - t0:.3f}")
"""


def main():
    n = 7 * 1440  # one week of minutes
    week_args = (n, 0, 60, 15.0, 33.0, 15.0, 30000.0, 6.0, 20.0)
    occupied = [i % 3 != 0 for i in range(n)]
    targets = [20.0 + math.sin(i / 200.0) * 8.0 for i in range(n)]
    coeff = math.exp(-60.0 / 3600.0)

    rows = []
    pairs = [("weather_series (1 week @1min)",
              lambda impl: impl.weather_series(*week_args)),
             ("motion_series (1 week @1min)",
              lambda impl: impl.motion_series(occupied, 0.05, 123456789, 0)),
             ("relax_through (1 week @1min)",
              lambda impl: impl.relax_through(30.0, targets, 0, n, coeff))]
    for name, call in pairs:
        t_ref = timeit(call, _ref)
        if kernels.BACKEND == "cython":
            t_core = timeit(call, kernels._impl)
            rows.append((name, t_ref, t_core))
        else:
            rows.append((name, t_ref, None))

    print(f"selected backend: {kernels.BACKEND}\n")
    print(f"{'kernel':<34} {'pure-python':>12} {'cython':>12} {'speedup':>9}")
    for name, t_ref, t_core in rows:
        if t_core is None:
            print(f"{name:<34} {t_ref * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
        else:
            print(f"{name:<34} {t_ref * 1e3:>10.2f}ms {t_core * 1e3:>10.2f}ms "
                  f"{t_ref / t_core:>8.1f}x")

    print("\nfull batch run, 8 office-week sessions:")
    for env_extra in ({}, {"WATTWISE_PURE": "1"}):
        env = {**os.environ, **env_extra}
        out = subprocess.run([sys.executable, "-c", SESSION_SNIPPET], env=env,
                             capture_output=True, text=True, check=True).stdout.strip()
        backend, seconds = out.split("\t")
        print(f"  {backend:<24} {seconds}s")


if __name__ == "__main__":
    main()
