"""Dense complex linear-algebra primitives.

All vectorization is column-major (``vec`` stacks columns), so that
``vec(X @ Z @ Y) == kron(Y.T, X) @ vec(Z)``.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "HermitianEvd",
    "vec",
    "unvec",
    "kron",
    "null_projector",
    "hermitian_evd",
    "inv_sqrt_psd",
    "dominant_right_singular_vector",
    "dominant_generalized_eigenvector",
    "rayleigh_quotient",
]

HERMITIAN_TOL = 1e-8
PD_REL_TOL = 1e-12
MAX_GRAM_COND = 1e12


class HermitianEvd(NamedTuple):
    """Eigendecomposition ``A = basis @ diag(eigenvalues) @ basis^H``.

    Eigenvalues are sorted in descending order.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray

    def rank_basis(self, k):
        """First `k` eigenvectors (largest eigenvalues)."""
        return self.basis[:, :k]


def _fix_phase(v):
    # Largest-modulus entry (first on ties) made real non-negative.
    idx = int(np.argmax(np.abs(v)))
    a = v[idx]
    if a == 0:
        return v
    return v * (np.conj(a) / np.abs(a))


def _fix_phase_columns(V):
    return np.column_stack([_fix_phase(V[:, j]) for j in range(V.shape[1])])


def _check_hermitian(A, name="A"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    scale = max(np.linalg.norm(A), 1.0)
    if np.linalg.norm(A - A.conj().T) > HERMITIAN_TOL * scale:
        raise ValueError(f"{name} is not Hermitian")
    return A


def vec(M):
    """Stack the columns of `M` into a 1-D vector."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"vec expects a 2-D array, got {M.ndim}-D")
    return M.reshape(-1, order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != rows * cols:
        raise ValueError(
            f"cannot reshape vector of length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def kron(A, B):
    """Kronecker product; block ``(i, j)`` of the result is ``A[i, j] * B``."""
    return np.kron(np.asarray(A), np.asarray(B))


def null_projector(X, side="row"):
    """Orthogonal projector onto the complement of the span of `X`.

    Parameters
    ----------
    X : ndarray
        Constraint matrix. For ``side="row"`` the rows of `X` are projected
        out, ``Q = I - X^H (X X^H)^{-1} X`` and ``X @ Q = 0``. For
        ``side="column"`` the columns are projected out,
        ``Q = I - X (X^H X)^{-1} X^H`` and ``Q @ X = 0``.
    side : {"row", "column"}

    Returns
    -------
    ndarray
        Hermitian idempotent ``N x N`` matrix. An empty `X` gives the
        identity.

    Raises
    ------
    numpy.linalg.LinAlgError
        If `X` is rank deficient on the projected side.
    """
    X = np.asarray(X, dtype=complex)
    if side == "row":
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        n = X.shape[1]
        B = X.conj().T  # columns span the removed subspace
    elif side == "column":
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        n = X.shape[0]
        B = X
    else:
        raise ValueError(f"side must be 'row' or 'column', got {side!r}")

    if B.shape[1] == 0:
        return np.eye(n, dtype=complex)
    gram = B.conj().T @ B
    if np.linalg.cond(gram) > MAX_GRAM_COND:
        raise np.linalg.LinAlgError("singular Gram matrix in null_projector")
    Q = np.eye(n) - B @ np.linalg.solve(gram, B.conj().T)
    return 0.5 * (Q + Q.conj().T)


def hermitian_evd(A):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Ties keep their original (ascending-solver) index order, and each
    eigenvector is phase-normalized so its largest-modulus entry is real
    and non-negative.
    """
    A = _check_hermitian(A)
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    order = np.argsort(-w, kind="stable")
    return HermitianEvd(_fix_phase_columns(V[:, order]), w[order])


def inv_sqrt_psd(A):
    """Hermitian inverse square root ``B`` with ``B @ A @ B = I``."""
    A = _check_hermitian(A)
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    if w[0] <= PD_REL_TOL * max(w[-1], 0.0) or w[-1] <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    B = (V / np.sqrt(w)) @ V.conj().T
    return 0.5 * (B + B.conj().T)


def dominant_right_singular_vector(A):
    """Unit vector ``u`` maximizing ``||A u||``."""
    A = np.asarray(A)
    if not np.any(A):
        raise ValueError("dominant singular vector of a zero matrix")
    _, _, Vh = np.linalg.svd(A)
    return _fix_phase(Vh[0].conj())


def rayleigh_quotient(A, B, d):
    """Generalized Rayleigh quotient ``(d^H A d) / (d^H B d)``."""
    d = np.asarray(d)
    return float(np.real(np.vdot(d, A @ d)) / np.real(np.vdot(d, B @ d)))


def dominant_generalized_eigenvector(A, B):
    """Maximizer of ``(d^H A d) / (d^H B d)``.

    Parameters
    ----------
    A : ndarray
        Hermitian positive semidefinite matrix.
    B : ndarray
        Hermitian positive definite matrix.

    Returns
    -------
    d : ndarray
        Dominant eigenvector of ``B^{-1} A`` (unit 2-norm, phase-normalized).
    lam : float
        The maximal quotient, ``A d = lam B d``.
    """
    A = _check_hermitian(A, "A")
    B = _check_hermitian(B, "B")
    if A.shape != B.shape:
        raise ValueError("A and B must have the same shape")
    wb = np.linalg.eigvalsh(B)
    if wb[0] <= PD_REL_TOL * max(wb[-1], 0.0) or wb[-1] <= 0:
        raise np.linalg.LinAlgError("B is not positive definite")
    n = A.shape[0]
    w, V = scipy.linalg.eigh(A, B, subset_by_index=[n - 1, n - 1])
    d = V[:, 0]
    d = _fix_phase(d / np.linalg.norm(d))
    return d, float(w[0])
