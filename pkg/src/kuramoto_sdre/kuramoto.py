"""Controlled Kuramoto network and its phase-difference error dynamics.

The network is

    dtheta_i/dt = omega_i + (K/N) u_i sum_j sin(theta_j - theta_i)

with multiplicative input ``u = 1 + v``. In the reduced coordinates
``X_i = theta_{i+1} - theta_i`` and ``e = X - X_des`` the error obeys

    de/dt = f(e) + c + B(e) v.

Phases are never wrapped. Everything that depends on ``e`` first rebuilds
phases with ``theta_1 = 0``; this is harmless because ``f``, ``B`` and the
Jacobian only see phase differences.

Array conventions: phases have length ``n``; ``e``, ``x_des``, ``f``, ``c``
have length ``n - 1``; ``B`` is ``(n - 1) x n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .linalg import FloatArray, as_vector

__all__ = [
    "NetworkParams",
    "phase_differences",
    "reconstruct_phases",
    "coupling_sums",
    "full_dynamics",
    "freq_diff_c",
    "drift_f",
    "control_matrix_b",
    "jacobian_a",
]


@dataclass(frozen=True)
class NetworkParams:
    """Oscillator count ``n``, global coupling gain and natural frequencies (rad/s)."""

    n: int
    coupling: float
    omega: FloatArray

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not (np.isfinite(self.coupling) and self.coupling > 0):
            raise ValueError(f"coupling must be positive, got {self.coupling}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "coupling", float(self.coupling))
        object.__setattr__(self, "omega", as_vector(self.omega, "omega", self.n))

    @classmethod
    def uniform(cls, n: int, coupling: float = 1.0, omega: float = 0.0) -> NetworkParams:
        return cls(n, coupling, np.full(n, float(omega)))

    @property
    def gain(self) -> float:
        """``K / N``."""
        return self.coupling / self.n


def _check_lengths(params: NetworkParams, x_des: ArrayLike, e: ArrayLike) -> tuple[FloatArray, FloatArray]:
    x_des = as_vector(x_des, "x_des", params.n - 1)
    e = as_vector(e, "e", params.n - 1)
    return x_des, e


def phase_differences(theta: ArrayLike) -> FloatArray:
    """``X_i = theta_{i+1} - theta_i``; no angle wrapping."""
    theta = as_vector(theta, "theta")
    if theta.size < 2:
        raise ValueError("need at least two phases")
    return np.diff(theta)


def reconstruct_phases(e: ArrayLike, x_des: ArrayLike) -> FloatArray:
    """Phases with ``theta_1 = 0`` and ``theta_k = sum_{l<k} (e_l + x_des_l)``."""
    e = as_vector(e, "e")
    x_des = as_vector(x_des, "x_des", e.size)
    return np.concatenate(([0.0], np.cumsum(e + x_des)))


def coupling_sums(theta: FloatArray) -> FloatArray:
    """``S_i = sum_k sin(theta_k - theta_i)`` for every oscillator."""
    return np.sin(theta[np.newaxis, :] - theta[:, np.newaxis]).sum(axis=1)


def full_dynamics(params: NetworkParams, theta: ArrayLike, u: ArrayLike) -> FloatArray:
    theta = as_vector(theta, "theta", params.n)
    u = as_vector(u, "u", params.n)
    return params.omega + params.gain * u * coupling_sums(theta)


def freq_diff_c(params: NetworkParams) -> FloatArray:
    return np.diff(params.omega)


def drift_f(params: NetworkParams, x_des: ArrayLike, e: ArrayLike) -> FloatArray:
    """Uncontrolled coupling part of the error dynamics, ``f(e)``."""
    x_des, e = _check_lengths(params, x_des, e)
    s = coupling_sums(reconstruct_phases(e, x_des))
    return params.gain * (s[1:] - s[:-1])


def control_matrix_b(params: NetworkParams, x_des: ArrayLike, e: ArrayLike) -> FloatArray:
    """Input matrix ``B(e)``: row i has ``-(K/N) S_i`` at column i and ``(K/N) S_{i+1}`` at i+1."""
    x_des, e = _check_lengths(params, x_des, e)
    s = coupling_sums(reconstruct_phases(e, x_des))
    n = params.n
    rows = np.arange(n - 1)
    b = np.zeros((n - 1, n))
    b[rows, rows] = -params.gain * s[:-1]
    b[rows, rows + 1] = params.gain * s[1:]
    return b


def jacobian_a(params: NetworkParams, x_des: ArrayLike, e: ArrayLike) -> FloatArray:
    """Analytic Jacobian ``df/de`` at ``e``.

    Differentiating ``f_i`` gives

        A_ij = (K/N) sum_k [cos(theta_k - theta_{i+1}) (D_kj - D_{i+1,j})
                            - cos(theta_k - theta_i) (D_kj - D_ij)]

    where ``D_kj = d theta_k / d e_j``. From the reconstruction
    ``theta_k = sum_{l<k} (e_l + x_des_l)`` this is 1 when ``j < k``
    (0-based oscillator k, error index j) and 0 otherwise.

    With ``C[i, k] = cos(theta_k - theta_i)`` the bracket splits into
    ``(C @ D)[i, j] - rowsum(C)[i] * D[i, j]``, which is evaluated for all
    oscillators at once and then differenced over adjacent rows.
    """
    x_des, e = _check_lengths(params, x_des, e)
    theta = reconstruct_phases(e, x_des)
    n = params.n
    d = np.tril(np.ones((n, n - 1)), k=-1)
    cos = np.cos(theta[np.newaxis, :] - theta[:, np.newaxis])
    m = cos @ d - cos.sum(axis=1)[:, np.newaxis] * d
    return params.gain * (m[1:] - m[:-1])
