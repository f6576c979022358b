"""Dense complex Hermitian linear algebra substrate.

Small wrappers around LAPACK (via NumPy) with pinned tolerances:
operator norms, Hermitian eigendecompositions, PSD square roots, and
completion of isometries to unitaries.  All functions are pure and
treat their ndarray arguments as immutable.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyInputError, InvariantViolationError, NotPSDError

# Tolerances shared across the package.
HERMITICITY_TOL = 1e-10     # relative to the matrix scale
PSD_TOL = 1e-9              # eigenvalue floor for "positive semidefinite"
ISOMETRY_TOL = 1e-9         # ||V*V - I|| for admissible isometries
RECONSTRUCTION_TOL = 1e-9   # dilation / factorization residuals


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex128 array, rejecting empty or non-finite input."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise InvariantViolationError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise EmptyInputError(f"{name} has a zero dimension: shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise InvariantViolationError(f"{name} contains non-finite entries")
    return A


def dagger(M: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return M.conj().T


def hermitize(M: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (M + M*)/2.

    Idempotent at the bit level, so repeated ingestion never perturbs data.
    """
    M = np.asarray(M, dtype=np.complex128)
    return (M + np.conj(np.swapaxes(M, -1, -2))) / 2


def hermiticity_residual(M: np.ndarray) -> float:
    """Max entry deviation between M and its conjugate transpose."""
    return float(np.max(np.abs(M - dagger(M)))) if M.size else 0.0


def _check_hermitian(A: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    res = hermiticity_residual(A)
    if res > HERMITICITY_TOL * scale:
        raise InvariantViolationError(
            f"{name} is not Hermitian: residual {res:.3e} exceeds "
            f"{HERMITICITY_TOL:.0e} x scale {scale:.3e}"
        )


def operator_norm(M) -> float:
    """Largest singular value of M (max |eigenvalue| for Hermitian input)."""
    A = as_matrix(M, "operator_norm input")
    return float(np.linalg.norm(A, ord=2))


def eig_hermitian(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and
    ascending, and eigenvectors as the columns of a unitary matrix, so
    that ``A = U @ diag(w) @ U.conj().T``.  Eigenvector phases carry no
    guarantee beyond orthonormality.
    """
    M = as_matrix(A, "eig_hermitian input")
    if M.shape[0] != M.shape[1]:
        raise InvariantViolationError(f"eig_hermitian needs a square matrix, got {M.shape}")
    _check_hermitian(M, "eig_hermitian input")
    w, U = np.linalg.eigh(hermitize(M))
    return w, U


def sqrt_psd(A) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues inside ``[-PSD_TOL, 0)`` are clamped to zero; anything
    lower raises :class:`NotPSDError`.  Satisfies ``||R @ R - A|| <= 1e-9``.
    """
    w, U = eig_hermitian(A)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w[0] < -PSD_TOL * scale:
        raise NotPSDError(f"matrix is not PSD: lambda_min = {w[0]:.3e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitize((U * root) @ dagger(U))


def complete_to_unitary(V) -> np.ndarray:
    """Extend an isometry to a unitary.

    Given ``V`` of shape (k, d) with ``V*V = I_d`` (residual at most
    ``ISOMETRY_TOL``), returns a k x k unitary whose first d columns are
    exactly ``V``.  The remaining columns are the canonical completion:
    standard basis vectors taken in index order, orthonormalized against
    everything kept so far (two-pass modified Gram-Schmidt).
    """
    A = as_matrix(V, "complete_to_unitary input")
    k, d = A.shape
    if k < d:
        raise InvariantViolationError(f"isometry must be tall, got shape {A.shape}")
    residual = operator_norm(dagger(A) @ A - np.eye(d))
    if residual > ISOMETRY_TOL:
        raise InvariantViolationError(
            f"input is not an isometry: ||V*V - I|| = {residual:.3e}"
        )
    cols: list[np.ndarray] = [A[:, j] for j in range(d)]
    for j in range(k):
        if len(cols) == k:
            break
        v = np.zeros(k, dtype=np.complex128)
        v[j] = 1.0
        for _ in range(2):  # two passes keep orthogonality near machine precision
            for u in cols:
                v = v - u * np.vdot(u, v)
        norm = float(np.linalg.norm(v))
        if norm > 1e-8:
            cols.append(v / norm)
    if len(cols) != k:
        raise InvariantViolationError("failed to complete isometry to a unitary basis")
    W = np.column_stack(cols)
    W[:, :d] = A  # first d columns must equal V exactly
    unit_res = operator_norm(dagger(W) @ W - np.eye(k))
    if unit_res > ISOMETRY_TOL:
        raise InvariantViolationError(f"completion is not unitary: residual {unit_res:.3e}")
    return W
