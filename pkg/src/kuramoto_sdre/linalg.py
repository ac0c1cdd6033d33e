"""Dense real linear algebra used by the solver and the controller.

Matrices and vectors are plain ``float64`` numpy arrays. The functions
here add the contracts the rest of the package relies on: explicit
singularity detection for LU solves, an SVD that always returns full
orthogonal factors with descending singular values, and a pseudoinverse
and numerical rank that share one default cutoff.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]

__all__ = [
    "LinAlgError",
    "SingularMatrix",
    "NoConvergence",
    "SvdResult",
    "as_matrix",
    "as_vector",
    "lu_solve",
    "svd",
    "singular_values",
    "default_tol",
    "pinv",
    "numerical_rank",
]

# Relative pivot threshold for lu_solve.
PIVOT_RTOL = 1e-14
# Relative singular-value cutoff used when tol is not given.
SVD_RTOL = 1e-12


class LinAlgError(ArithmeticError):
    """Base class for linear algebra failures in this package."""


class SingularMatrix(LinAlgError):
    pass


class NoConvergence(LinAlgError):
    pass


def as_matrix(m: ArrayLike, name: str = "matrix") -> FloatArray:
    """Return ``m`` as a finite 2-D float64 array, raising ValueError otherwise."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v: ArrayLike, name: str = "vector", length: int | None = None) -> FloatArray:
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1 or a.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {a.shape}")
    if length is not None and a.size != length:
        raise ValueError(f"{name} must have length {length}, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def lu_solve(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """Solve ``a @ x = b`` by LU factorization with partial pivoting.

    ``b`` may be a vector or an ``n x k`` matrix; the result has the same
    shape as ``b``. Raises :class:`SingularMatrix` when any pivot of the
    factorization is below ``1e-14 * ||a||_inf``.
    """
    a = as_matrix(a, "a")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"a must be square, got shape {a.shape}")
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != n:
        raise ValueError(f"b has {b.shape[0]} rows, expected {n}")

    norm_inf = np.abs(a).sum(axis=1).max()
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if norm_inf == 0.0 or pivots.min() < PIVOT_RTOL * norm_inf:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * ||a||_inf = {norm_inf:.3e}"
        )
    return sla.lu_solve((lu, piv), b, check_finite=False)


@dataclass(frozen=True)
class SvdResult:
    """Full SVD ``m = u @ diag(singular_values) @ vt``.

    ``u`` is ``rows x rows``, ``vt`` is ``cols x cols``; singular values
    are nonnegative and sorted in descending order.
    """

    u: FloatArray
    singular_values: FloatArray
    vt: FloatArray

    def sigma(self) -> FloatArray:
        """The ``rows x cols`` diagonal factor."""
        m, n = self.u.shape[0], self.vt.shape[0]
        s = np.zeros((m, n))
        k = self.singular_values.size
        s[:k, :k] = np.diag(self.singular_values)
        return s


def svd(m: ArrayLike) -> SvdResult:
    m = as_matrix(m, "m")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return SvdResult(u=u, singular_values=s, vt=vt)


def singular_values(m: ArrayLike) -> FloatArray:
    """Singular values only, descending. Cheaper than :func:`svd` for wide inputs."""
    m = as_matrix(m, "m")
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def default_tol(shape: tuple[int, int], sigma_max: float) -> float:
    """``max(rows, cols) * sigma_max * 1e-12``."""
    return max(shape) * sigma_max * SVD_RTOL


def pinv(m: ArrayLike, tol: float | None = None) -> FloatArray:
    """Moore-Penrose pseudoinverse via the SVD.

    Singular values ``<= tol`` are treated as zero. The default cutoff is
    :func:`default_tol`. A zero matrix maps to the zero matrix of
    transposed shape.
    """
    m = as_matrix(m, "m")
    if tol is not None and tol < 0:
        raise ValueError("tol must be nonnegative")
    res = svd(m)
    s = res.singular_values
    smax = s[0] if s.size else 0.0
    cut = default_tol(m.shape, smax) if tol is None else tol
    keep = s > cut
    r = int(keep.sum())
    if r == 0:
        return np.zeros((m.shape[1], m.shape[0]))
    # V_r diag(1/s_r) U_r^T
    return (res.vt[:r].T / s[:r]) @ res.u[:, :r].T


def numerical_rank(m: ArrayLike, tol: float | None = None) -> int:
    m = as_matrix(m, "m")
    s = singular_values(m)
    smax = s[0] if s.size else 0.0
    cut = default_tol(m.shape, smax) if tol is None else tol
    return int(np.count_nonzero(s > cut))
