"""Dense numeric kernels shared by the solvers.

Everything here operates on plain numpy arrays: vectors are 1-d float64
arrays, matrices are 2-d float64 arrays in row-major layout. All functions
are pure and deterministic.
"""

import numpy as np
import scipy.linalg


def as_vector(x) -> np.ndarray:
    """Coerce to a finite 1-d float64 array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(x) -> np.ndarray:
    """Coerce to a finite 2-d float64 array."""
    m = np.asarray(x, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def solve_shifted_system(mat: np.ndarray, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (mat + shift*I) y = rhs for a symmetric PSD ``mat``.

    Uses a Cholesky factorization of the shifted matrix, with one step of
    iterative refinement so the relative residual stays at machine level,
    and a symmetric-solve fallback if the factorization fails despite a
    positive shift.

    Raises
    ------
    ValueError
        On dimension mismatch, an asymmetric matrix, or a singular system
        ("singular shift": shift == 0 with ``mat`` singular).
    """
    mat = as_matrix(mat)
    rhs = as_vector(rhs)
    n = mat.shape[0]
    if mat.shape[1] != n:
        raise ValueError(f"matrix must be square, got {mat.shape}")
    if rhs.shape[0] != n:
        raise ValueError(f"rhs length {rhs.shape[0]} != matrix order {n}")
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-10 * max(1.0, abs(mat).max())):
        raise ValueError("matrix must be symmetric")

    shifted = mat + shift * np.eye(n)
    try:
        factor = scipy.linalg.cho_factor(shifted, check_finite=False)
        solve = lambda b: scipy.linalg.cho_solve(factor, b, check_finite=False)
    except scipy.linalg.LinAlgError:
        if shift == 0.0:
            raise ValueError("singular shift: shift is zero and matrix is singular")
        # shift > 0 makes the system PD in exact arithmetic; fall back to a
        # generic symmetric solve when rounding defeats the Cholesky.
        solve = lambda b: scipy.linalg.solve(shifted, b, assume_a="sym", check_finite=False)

    y = solve(rhs)
    # one round of iterative refinement keeps the residual near machine precision
    residual = rhs - shifted @ y
    if np.linalg.norm(residual) > 1e-14 * max(1.0, np.linalg.norm(rhs)):
        y = y + solve(residual)
    return y


def svd_thin(mat: np.ndarray):
    """Thin SVD: returns (U, sigma, V) with mat = U @ diag(sigma) @ V.T.

    Singular values are nonnegative and nonincreasing; U and V have
    orthonormal columns.
    """
    mat = as_matrix(mat)
    u, sigma, vt = np.linalg.svd(mat, full_matrices=False)
    return u, sigma, vt.T


def spectral_norm_estimate(mat: np.ndarray, tol: float = 1e-9, max_iters: int = 50_000) -> float:
    """Largest singular value of ``mat`` via power iteration on mat.T @ mat.

    Starts from the normalized all-ones vector so repeated calls are
    bitwise-reproducible. Returns 0.0 for the zero matrix.
    """
    mat = as_matrix(mat)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(mat):
        return 0.0

    n = mat.shape[1]
    v = np.ones(n) / np.sqrt(n)
    estimate = 0.0
    basis_idx = 0
    for _ in range(max_iters):
        w = mat.T @ (mat @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # iterate landed in the null space; restart from the next basis vector
            if basis_idx >= n:
                return estimate
            v = np.zeros(n)
            v[basis_idx] = 1.0
            basis_idx += 1
            continue
        new_estimate = np.sqrt(norm_w)
        v = w / norm_w
        # safety factor on the change-based stop: power iteration's error is
        # larger than its per-step change when the spectral gap is small
        if abs(new_estimate - estimate) <= 0.01 * tol * new_estimate:
            return new_estimate
        estimate = new_estimate
    return estimate
