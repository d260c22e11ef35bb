"""Monte Carlo kernel timing: numba against the numpy fallback.

Usage: python3 benchmarks/bench_mc.py [paths] [steps]

Both backends run the same paths and must agree; the script prints the time
per path step of each and the speed-up. SRBM_THREADS limits the numba threads.
"""
import os
import sys
import time

import numpy as np

from srbm_green import montecarlo as mc
from srbm_green.model import ModelParams

paths = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
steps = int(sys.argv[2]) if len(sys.argv) > 2 else 2000
p = ModelParams(x1=1.0, x2=1.0)
cfg = mc.SimConfig(dt=1e-3, t_max=steps * 1e-3, paths=paths, seed=42)
kw = dict(theta=[(-0.5, -0.5)], theta_face1=[-1.5], theta_face2=[-1.5])


def timed(flag):
    os.environ["SRBM_NUMBA"] = flag
    if flag == "1":
        # compile outside the timing
        mc.run_paths(p, mc.SimConfig(dt=1e-3, t_max=0.01, paths=64), **kw)
    t = time.perf_counter()
    run = mc.run_paths(p, cfg, **kw)
    return time.perf_counter() - t, run


t_nb, a = timed("1")
t_np, b = timed("0")
n = paths * cfg.steps
assert np.allclose(a.interior, b.interior, rtol=1e-12) and np.allclose(a.face1, b.face1, rtol=1e-12)
print(f"paths={paths} steps={cfg.steps}")
print(f"numba: {t_nb:.3f} s  ({1e9 * t_nb / n:.1f} ns/path-step)")
print(f"numpy: {t_np:.3f} s  ({1e9 * t_np / n:.1f} ns/path-step)")
print(f"speed-up: {t_np / t_nb:.1f}x")



def timed_1d(flag):
    os.environ["SRBM_NUMBA"] = flag
    mc.simulate_1d(1.0, 1.0, 0.0, mc.SimConfig(dt=1e-3, t_max=0.01, paths=64))
    t = time.perf_counter()
    mc.simulate_1d(1.0, 1.0, 0.0, cfg, theta=(-1.0,), hist=(0.0, 3.0, 40))
    return time.perf_counter() - t


u_nb, u_np = timed_1d("1"), timed_1d("0")
print(f"1-D numba: {u_nb:.3f} s  numpy: {u_np:.3f} s  speed-up: {u_np / u_nb:.1f}x")
