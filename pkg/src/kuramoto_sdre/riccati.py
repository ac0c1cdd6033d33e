"""Continuous-time algebraic Riccati equation and controllability checks.

Solves ``A'P + PA - P B R^-1 B' P + Q = 0`` for the stabilizing ``P`` with
the structure-preserving doubling algorithm (SDA). The Hamiltonian

    [[A, -G], [-Q, -A']],   G = B R^-1 B'

is Cayley-transformed with a shift ``gamma > 0`` into a symplectic pencil
in standard form ``(M, L)`` with

    M = [[E, 0], [-H, I]],   L = [[I, G], [0, E']].

Its stable deflating subspace is spanned by ``[I; P]``. Doubling squares
the pencil each iteration: ``E_k -> 0`` and ``H_k -> P`` quadratically.
Only linear solves are needed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike

from .linalg import (
    FloatArray,
    LinAlgError,
    SingularMatrix,
    as_matrix,
    lu_solve,
    numerical_rank,
)

__all__ = [
    "CareError",
    "BadWeights",
    "NotStabilizable",
    "CareProblem",
    "CareSolution",
    "solve_care",
    "care_residual",
    "controllability_matrix",
    "controllability_rank",
]

log = logging.getLogger(__name__)

MAX_ITER = 100
STEP_RTOL = 1e-12
DIVERGENCE_NORM = 1e12
RESIDUAL_RTOL = 1e-8
SYMMETRY_RTOL = 1e-10
PSD_SHIFT = 1e-12
MAX_GAMMA_DOUBLINGS = 8


class CareError(ArithmeticError):
    pass


class BadWeights(CareError, ValueError):
    """Q is not symmetric or R is not symmetric positive definite."""


class NotStabilizable(CareError):
    """No stabilizing solution was found for the given (A, B) pair."""


def _check_symmetric(m: FloatArray, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise BadWeights(f"{name} must be square, got shape {m.shape}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > SYMMETRY_RTOL * scale:
        raise BadWeights(f"{name} is not symmetric")


@dataclass(frozen=True)
class CareProblem:
    a: FloatArray
    b: FloatArray
    q: FloatArray
    r: FloatArray

    def __post_init__(self) -> None:
        a = as_matrix(self.a, "a")
        b = as_matrix(self.b, "b")
        try:
            q = as_matrix(self.q, "q")
            r = as_matrix(self.r, "r")
        except ValueError as exc:
            raise BadWeights(str(exc)) from exc
        n, m = b.shape
        if a.shape != (n, n):
            raise ValueError(f"a has shape {a.shape}, expected {(n, n)} from b")
        if q.shape != (n, n):
            raise BadWeights(f"q has shape {q.shape}, expected {(n, n)}")
        if r.shape != (m, m):
            raise BadWeights(f"r has shape {r.shape}, expected {(m, m)}")
        _check_symmetric(q, "q")
        _check_symmetric(r, "r")
        try:
            np.linalg.cholesky(r)
        except np.linalg.LinAlgError as exc:
            raise BadWeights("r is not positive definite") from exc
        for name, val in (("a", a), ("b", b), ("q", q), ("r", r)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def g(self) -> FloatArray:
        """``B R^-1 B'``, symmetrized."""
        c = sla.cho_factor(self.r)
        g = self.b @ sla.cho_solve(c, self.b.T)
        return 0.5 * (g + g.T)

    def gain(self, p: ArrayLike) -> FloatArray:
        """Feedback gain ``R^-1 B' P``."""
        return sla.cho_solve(sla.cho_factor(self.r), self.b.T @ np.asarray(p))


@dataclass(frozen=True)
class CareSolution:
    p: FloatArray
    residual_norm: float
    iterations: int
    gamma: float = field(default=1.0)
    polished: bool = False


def care_residual(prob: CareProblem, p: ArrayLike) -> float:
    """Frobenius norm of ``A'P + PA - PGP + Q``."""
    p = np.asarray(p, dtype=np.float64)
    res = prob.a.T @ p + p @ prob.a - p @ prob.g() @ p + prob.q
    return float(np.linalg.norm(res))


def _residual_ok(res: float, p: FloatArray) -> bool:
    return res <= RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(p)))


def _sda_init(a: FloatArray, g: FloatArray, h: FloatArray, gamma: float):
    n = a.shape[0]
    eye = np.eye(n)
    a_minus = a - gamma * eye
    # A_-^{-T} H and A_-^{-1} G
    at_inv_h = lu_solve(a_minus.T, h)
    a_inv_g = lu_solve(a_minus, g)
    w = a_minus + g @ at_inv_h
    w_inv = lu_solve(w, eye)
    e0 = eye + 2.0 * gamma * w_inv
    g0 = 2.0 * gamma * w_inv @ a_inv_g.T
    h0 = 2.0 * gamma * w_inv.T @ at_inv_h.T
    return e0, 0.5 * (g0 + g0.T), 0.5 * (h0 + h0.T)


def _sda(a: FloatArray, g: FloatArray, h: FloatArray, gamma: float) -> tuple[FloatArray, int]:
    n = a.shape[0]
    e, g_k, h_k = _sda_init(a, g, h, gamma)
    eye = np.eye(n)
    for k in range(1, MAX_ITER + 1):
        sol = lu_solve(eye + g_k @ h_k, np.hstack([e, g_k]))
        ie, ig = sol[:, :n], sol[:, n:]
        g_next = g_k + e @ ig @ e.T
        h_next = h_k + e.T @ h_k @ ie
        e = e @ ie
        g_k = 0.5 * (g_next + g_next.T)
        h_next = 0.5 * (h_next + h_next.T)

        h_norm = np.linalg.norm(h_next)
        if not np.isfinite(h_norm) or h_norm > DIVERGENCE_NORM:
            raise NotStabilizable(f"doubling iterate diverged at step {k} (||H|| = {h_norm:.3e})")
        step = np.linalg.norm(h_next - h_k)
        h_k = h_next
        if step <= STEP_RTOL * h_norm:
            return h_k, k
    log.debug("SDA reached the %d-iteration cap without meeting the step tolerance", MAX_ITER)
    return h_k, MAX_ITER


def _newton_kleinman(prob: CareProblem, p: FloatArray) -> FloatArray:
    g = prob.g()
    closed = prob.a - g @ p
    rhs = -(prob.q + p @ g @ p)
    p_new = sla.solve_continuous_lyapunov(closed.T, rhs)
    return 0.5 * (p_new + p_new.T)


def _is_psd(p: FloatArray) -> bool:
    try:
        np.linalg.cholesky(p + PSD_SHIFT * np.eye(p.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def solve_care(prob: CareProblem) -> CareSolution:
    """Stabilizing solution of the CARE for ``prob``.

    The Cayley shift starts at ``max(1, ||A||_F)`` and is doubled if the
    transformed pencil hits a singular pivot. If the doubling result misses
    the residual bound ``1e-8 * max(1, ||P||_F)`` one Newton-Kleinman step is
    applied; if it still misses, or ``P`` is not PSD, the pair is reported
    as not stabilizable.

    Raises:
        NotStabilizable: doubling diverged or the result is not an
            acceptable stabilizing solution.
    """
    a = prob.a
    g = prob.g()
    gamma = max(1.0, float(np.linalg.norm(a)))
    for _ in range(MAX_GAMMA_DOUBLINGS):
        try:
            p, iters = _sda(a, g, prob.q, gamma)
            break
        except SingularMatrix:
            gamma *= 2.0
    else:
        raise NotStabilizable("Cayley-transformed pencil stayed singular")

    res = care_residual(prob, p)
    polished = False
    if not _residual_ok(res, p):
        try:
            p_pol = _newton_kleinman(prob, p)
        except (LinAlgError, np.linalg.LinAlgError, ValueError) as exc:
            raise NotStabilizable(f"residual {res:.3e} and polish failed: {exc}") from exc
        if np.all(np.isfinite(p_pol)):
            p, res, polished = p_pol, care_residual(prob, p_pol), True
        if not _residual_ok(res, p):
            raise NotStabilizable(f"CARE residual {res:.3e} exceeds tolerance")
    if not _is_psd(p):
        raise NotStabilizable("solution is not positive semidefinite")
    return CareSolution(p=p, residual_norm=res, iterations=iters, gamma=gamma, polished=polished)


def controllability_matrix(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """Kalman matrix ``[B, AB, ..., A^(n-1) B]``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError(f"inconsistent shapes a={a.shape}, b={b.shape}")
    blocks = [b]
    for _ in range(n - 1):
        blocks.append(a @ blocks[-1])
    return np.hstack(blocks)


def controllability_rank(a: ArrayLike, b: ArrayLike) -> int:
    return numerical_rank(controllability_matrix(a, b))
