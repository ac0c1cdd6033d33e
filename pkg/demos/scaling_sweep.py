"""
Larger networks
===============

Seeded runs for N = 10 and 20 from random phases, and N = 50 from a
near-target start. Each line is one seed; the wall time includes one
Riccati solve of size N-1 per step.
"""
import time

from kuramoto_sdre import get_builtin, run_closed_loop
from kuramoto_sdre.scenarios import default_sweep_seeds

for name in ("paper-scale-10", "paper-scale-20", "paper-scale-50"):
    base = get_builtin(name)
    for seed in default_sweep_seeds(base)[:3]:
        sc = base.resolve(seed)
        t0 = time.perf_counter()
        _, summary = run_closed_loop(sc.params, sc.x_des, sc.weights, sc.theta0, sc.sim)
        wall = time.perf_counter() - t0
        print(f"{name:15s} seed {seed}:  |e(T)|_inf = {summary.final_e_inf_norm:.3e}"
              f"   fallback = {summary.any_fallback}   {wall:.2f} s")
