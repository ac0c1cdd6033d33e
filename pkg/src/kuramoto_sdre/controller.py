"""SDRE phase-locking controller.

The drift is factorized as ``f(e) ~ f(0) + A(e) e`` with ``A`` the Jacobian
at the current error. The constant part ``f(0) + c`` is cancelled by a
pseudoinverse feedforward and the remaining linear-like system is handled
by a Riccati feedback solved afresh at every state:

    v_bias = -B(e)^+ (f(0) + c)
    v_sdre = -R^-1 B(e)' P(e) e
    u      = 1 + v_bias + v_sdre

Note the Jacobian is taken at the current ``e`` while the intercept stays at
``f(0)``. That pairing is kept deliberately; for large errors it leaves a
mismatch against the true drift.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from .kuramoto import (
    NetworkParams,
    control_matrix_b,
    drift_f,
    freq_diff_c,
    jacobian_a,
)
from .linalg import FloatArray, as_vector, pinv
from .riccati import (
    BadWeights,
    CareError,
    CareProblem,
    NotStabilizable,
    controllability_rank,
    solve_care,
)

__all__ = [
    "CareFailed",
    "SdreWeights",
    "ControlDecision",
    "bias_target",
    "bias_control",
    "sdre_feedback",
    "control_step",
    "SdreController",
]

log = logging.getLogger(__name__)

NO_AUTHORITY_NORM = 1e-12


class CareFailed(CareError):
    """The pointwise Riccati equation could not be solved at this state."""


@dataclass(frozen=True)
class SdreWeights:
    """State weight ``q`` ((n-1) x (n-1), PSD) and input weight ``r`` (n x n, PD)."""

    q: FloatArray
    r: FloatArray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=np.float64)
        r = np.asarray(self.r, dtype=np.float64)
        if q.ndim != 2 or r.ndim != 2 or r.shape[0] != q.shape[0] + 1:
            raise BadWeights(f"weights need q (n-1)x(n-1) and r n x n, got {q.shape} and {r.shape}")
        # reuse the CARE checks on a dummy system of the right size
        CareProblem(np.zeros_like(q), np.zeros((q.shape[0], r.shape[0])), q, r)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def scaled_identity(cls, n: int, q_scale: float, r_scale: float) -> SdreWeights:
        """``Q = q_scale * I_{n-1}``, ``R = r_scale * I_n`` for an n-oscillator network."""
        return cls(q_scale * np.eye(n - 1), r_scale * np.eye(n))


@dataclass(frozen=True)
class ControlDecision:
    v_bias: FloatArray
    v_sdre: FloatArray
    u: FloatArray
    gain: FloatArray
    care_residual: float
    fallback_used: bool = False
    no_authority: bool = False
    controllability_rank: int | None = field(default=None)

    @property
    def negative_inputs(self) -> bool:
        """True if any coupling multiplier is negative (allowed, but worth flagging)."""
        return bool(np.any(self.u < 0))


def bias_target(params: NetworkParams, x_des: ArrayLike) -> FloatArray:
    """``f(0) + c``: the constant drift the feedforward has to cancel."""
    x_des = as_vector(x_des, "x_des", params.n - 1)
    return drift_f(params, x_des, np.zeros(params.n - 1)) + freq_diff_c(params)


def bias_control(
    params: NetworkParams,
    x_des: ArrayLike,
    e: ArrayLike,
    target: FloatArray | None = None,
) -> FloatArray:
    """Minimum-norm feedforward ``-B(e)^+ (f(0) + c)``.

    ``target`` may carry a precomputed :func:`bias_target`.
    """
    if target is None:
        target = bias_target(params, x_des)
    b = control_matrix_b(params, x_des, e)
    return -pinv(b) @ target


def sdre_feedback(
    params: NetworkParams,
    x_des: ArrayLike,
    weights: SdreWeights,
    e: ArrayLike,
) -> tuple[FloatArray, FloatArray, float]:
    """Riccati feedback at the current error.

    Returns ``(v_sdre, gain, residual)`` where ``gain = R^-1 B' P`` is
    ``n x (n-1)`` and ``v_sdre = -gain @ e``.

    Raises:
        CareFailed: the CARE at this state has no acceptable solution.
    """
    e = as_vector(e, "e", params.n - 1)
    a = jacobian_a(params, x_des, e)
    b = control_matrix_b(params, x_des, e)
    prob = CareProblem(a, b, weights.q, weights.r)
    try:
        sol = solve_care(prob)
    except NotStabilizable as exc:
        raise CareFailed(str(exc)) from exc
    gain = prob.gain(sol.p)
    return -gain @ e, gain, sol.residual_norm


def control_step(
    params: NetworkParams,
    x_des: ArrayLike,
    weights: SdreWeights,
    e: ArrayLike,
    target: FloatArray | None = None,
    check_controllability: bool = False,
) -> ControlDecision:
    """Full input ``u = 1 + v_bias + v_sdre`` at error ``e``.

    Degenerate states never raise. When ``||B(e)||_F < 1e-12`` the inputs
    have no authority and ``u = 1`` is returned with both flags set. When the
    CARE fails the feedback part is dropped (``v_sdre = 0``) and
    ``fallback_used`` is set.
    """
    n = params.n
    e = as_vector(e, "e", n - 1)
    b = control_matrix_b(params, x_des, e)
    zeros_n = np.zeros(n)
    if np.linalg.norm(b) < NO_AUTHORITY_NORM:
        log.warning("input matrix vanished (||B||_F < %g); holding u = 1", NO_AUTHORITY_NORM)
        return ControlDecision(
            v_bias=zeros_n, v_sdre=zeros_n.copy(), u=np.ones(n),
            gain=np.zeros((n, n - 1)), care_residual=float("nan"),
            fallback_used=True, no_authority=True,
        )

    if target is None:
        target = bias_target(params, x_des)
    v_bias = -pinv(b) @ target

    rank = None
    if check_controllability:
        rank = controllability_rank(jacobian_a(params, x_des, e), b)
        log.debug("controllability rank %d of %d", rank, n - 1)

    try:
        v_sdre, gain, residual = sdre_feedback(params, x_des, weights, e)
        fallback = False
    except CareFailed as exc:
        log.warning("CARE failed, using bias-only control: %s", exc)
        v_sdre, gain, residual, fallback = zeros_n.copy(), np.zeros((n, n - 1)), float("nan"), True

    u = 1.0 + v_bias + v_sdre
    return ControlDecision(
        v_bias=v_bias, v_sdre=v_sdre, u=u, gain=gain, care_residual=residual,
        fallback_used=fallback, controllability_rank=rank,
    )


class SdreController:
    """Controller bound to one network, target and weight set.

    Computes ``f(0) + c`` once; every :meth:`step` rebuilds ``B``, ``A`` and
    the Riccati solution at the supplied error.
    """

    def __init__(
        self,
        params: NetworkParams,
        x_des: ArrayLike,
        weights: SdreWeights,
        check_controllability: bool = False,
    ):
        self.params = params
        self.x_des = as_vector(x_des, "x_des", params.n - 1)
        self.weights = weights
        self.check_controllability = check_controllability
        self.target = bias_target(params, self.x_des)

    def step(self, e: ArrayLike) -> ControlDecision:
        return control_step(
            self.params, self.x_des, self.weights, e,
            target=self.target, check_controllability=self.check_controllability,
        )

    def steady_state_u(self) -> FloatArray:
        """``1 - B(0)^+ (f(0) + c)``, the input that holds ``e = 0``."""
        return 1.0 + bias_control(self.params, self.x_des, np.zeros(self.params.n - 1), self.target)
