"""
State weight vs control effort
==============================

Same dispersed target, two state weights. A small Q keeps the transient
inputs much smaller but is still far from the target at T = 2. The
steady-state input does not depend on the weights.
"""
import numpy as np

from kuramoto_sdre import get_builtin, run_closed_loop, steady_state_u

np.set_printoptions(precision=3, suppress=True)

for name in ("paper-dispersion", "paper-lowq"):
    sc = get_builtin(name).resolve()
    traj, summary = run_closed_loop(sc.params, sc.x_des, sc.weights, sc.theta0, sc.sim)
    print(f"{name:17s} Q = {sc.weights.q[0, 0]:g} I")
    print("   peak |u|_inf ", round(summary.peak_u_inf_norm, 2))
    print("   |e(T)|_inf   ", f"{summary.final_e_inf_norm:.3e}")
    print("   final u      ", summary.final_u)

sc = get_builtin("paper-dispersion").resolve()
print("steady-state u  ", steady_state_u(sc.params, sc.x_des))
