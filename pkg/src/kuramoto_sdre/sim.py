"""Fixed-step closed-loop simulation of the controlled network."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .controller import ControlDecision, SdreController, SdreWeights
from .kuramoto import NetworkParams, full_dynamics, phase_differences
from .linalg import FloatArray, as_vector

__all__ = [
    "SimConfig",
    "TrajectoryRecord",
    "Trajectory",
    "RunSummary",
    "rk4_step",
    "run_closed_loop",
    "steady_state_u",
]


@dataclass(frozen=True)
class SimConfig:
    """Horizon and step size in seconds.

    ``record_every`` thins the stored trajectory; ``control_update_every``
    holds each control decision for that many integration steps.
    """

    t_final: float = 2.0
    dt: float = 0.01
    record_every: int = 1
    control_update_every: int = 1
    check_controllability: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= self.dt:
            raise ValueError(f"t_final ({self.t_final}) must be >= dt ({self.dt})")
        for name in ("record_every", "control_update_every"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {val}")
            object.__setattr__(self, name, int(val))

    @property
    def steps(self) -> int:
        # tolerate t_final/dt landing just under an integer
        return int(math.floor(self.t_final / self.dt + 1e-9))


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    theta: FloatArray
    x: FloatArray
    e: FloatArray
    u: FloatArray
    care_residual: float
    fallback_used: bool


@dataclass
class Trajectory:
    """Recorded samples stacked along axis 0."""

    t: FloatArray
    theta: FloatArray
    x: FloatArray
    e: FloatArray
    u: FloatArray
    care_residual: FloatArray
    fallback: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> TrajectoryRecord:
        return TrajectoryRecord(
            t=float(self.t[i]), theta=self.theta[i], x=self.x[i], e=self.e[i], u=self.u[i],
            care_residual=float(self.care_residual[i]), fallback_used=bool(self.fallback[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))


@dataclass(frozen=True)
class RunSummary:
    final_e_inf_norm: float
    final_u: FloatArray
    peak_u_inf_norm: float
    steps: int
    any_fallback: bool


def rk4_step(params: NetworkParams, theta: ArrayLike, u: ArrayLike, dt: float) -> FloatArray:
    """One classical RK4 step with ``u`` held constant over the step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    theta = as_vector(theta, "theta", params.n)
    u = as_vector(u, "u", params.n)
    k1 = full_dynamics(params, theta, u)
    k2 = full_dynamics(params, theta + 0.5 * dt * k1, u)
    k3 = full_dynamics(params, theta + 0.5 * dt * k2, u)
    k4 = full_dynamics(params, theta + dt * k3, u)
    return theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def run_closed_loop(
    params: NetworkParams,
    x_des: ArrayLike,
    weights: SdreWeights,
    theta0: ArrayLike,
    sim: SimConfig,
) -> tuple[Trajectory, RunSummary]:
    """Integrate the network under SDRE control from ``theta0``.

    Each step computes ``e`` from the current phases, asks the controller
    for ``u`` (every ``control_update_every`` steps), records, then takes an
    RK4 step. After the last step one more record is taken at ``t_final``
    so the trajectory includes the end state; its ``u`` is the control the
    loop would apply next.
    """
    ctrl = SdreController(params, x_des, weights, sim.check_controllability)
    theta = as_vector(theta0, "theta0", params.n).copy()
    steps = sim.steps

    ts, thetas, xs, es, us, res, fb = [], [], [], [], [], [], []
    decision: ControlDecision | None = None
    for k in range(steps + 1):
        x = phase_differences(theta)
        e = x - ctrl.x_des
        if decision is None or k % sim.control_update_every == 0 or k == steps:
            decision = ctrl.step(e)
        if k % sim.record_every == 0 or k == steps:
            ts.append(k * sim.dt)
            thetas.append(theta)
            xs.append(x)
            es.append(e)
            us.append(decision.u)
            res.append(decision.care_residual)
            fb.append(decision.fallback_used)
        if k < steps:
            theta = rk4_step(params, theta, decision.u, sim.dt)

    traj = Trajectory(
        t=np.asarray(ts), theta=np.asarray(thetas), x=np.asarray(xs), e=np.asarray(es),
        u=np.asarray(us), care_residual=np.asarray(res), fallback=np.asarray(fb, dtype=bool),
    )
    summary = RunSummary(
        final_e_inf_norm=float(np.abs(traj.e[-1]).max()),
        final_u=traj.u[-1].copy(),
        peak_u_inf_norm=float(np.abs(traj.u).max()),
        steps=steps,
        any_fallback=bool(traj.fallback.any()),
    )
    return traj, summary


def steady_state_u(params: NetworkParams, x_des: ArrayLike) -> FloatArray:
    """Input that holds the network at ``e = 0``: ``1 - B(0)^+ (f(0) + c)``.

    Independent of the weights; used as the reference for long-run ``u``.
    """
    n = params.n
    ctrl = SdreController(params, x_des, SdreWeights(np.eye(n - 1), np.eye(n)))
    return ctrl.steady_state_u()
