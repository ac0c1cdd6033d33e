"""
Solving the algebraic Riccati equation
======================================

The doubling solver on a double integrator, where the answer is known in
closed form, then on a random system checked against scipy.
"""
import numpy as np
import scipy.linalg as sla

from kuramoto_sdre import CareProblem, solve_care
from kuramoto_sdre.riccati import care_residual, controllability_rank

# double integrator, Q = I, R = 1: P = [[sqrt3, 1], [1, sqrt3]]
a = np.array([[0.0, 1.0], [0.0, 0.0]])
b = np.array([[0.0], [1.0]])
prob = CareProblem(a, b, np.eye(2), np.eye(1))
sol = solve_care(prob)
print("P =\n", sol.p)
print("closed form\n", np.array([[np.sqrt(3), 1], [1, np.sqrt(3)]]))
print("iterations", sol.iterations, " residual", f"{sol.residual_norm:.2e}")
print("controllability rank", controllability_rank(a, b))

rng = np.random.default_rng(7)
n, m = 6, 2
a, b = rng.normal(size=(n, n)), rng.normal(size=(n, m))
prob = CareProblem(a, b, np.eye(n), np.eye(m))
p = solve_care(prob).p
ref = sla.solve_continuous_are(a, b, np.eye(n), np.eye(m))
print("random 6x6: |P - P_scipy| / |P| =", f"{np.linalg.norm(p - ref) / np.linalg.norm(ref):.2e}")
print("residual", f"{care_residual(prob, p):.2e}")
closed = a - b @ prob.gain(p)
print("closed-loop eigenvalues", np.round(np.linalg.eigvals(closed), 3))
