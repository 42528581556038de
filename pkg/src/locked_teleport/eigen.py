"""Eigenvalues of small complex Hermitian matrices by cyclic Jacobi rotations."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
OFF_DIAGONAL_TOL = 1e-13
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    pass


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _rotation(app: float, aqq: float, apq: complex) -> np.ndarray:
    """2x2 unitary J with (J^H A J)_pq = 0 for the pivot block of A.

    The phase of apq is removed first, which leaves a real symmetric block
    that an ordinary Jacobi rotation diagonalizes.
    """
    g = abs(apq)
    phase = apq / g
    theta = (aqq - app) / (2.0 * g)
    if abs(theta) > 1e150:
        t = 0.5 / abs(theta)
    else:
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])


def hermitian_eigenvalues(m, tol: float = OFF_DIAGONAL_TOL) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    Sweeps over every (p, q) pivot in row order until the off-diagonal
    Frobenius norm drops below ``tol`` (scaled by the matrix norm when that
    exceeds one).
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian within 1e-10")
    a = 0.5 * (a + a.conj().T)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    for _ in range(MAX_SWEEPS):
        if _off_norm(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                j = _rotation(a[p, p].real, a[q, q].real, apq)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        if _off_norm(a) >= threshold:
            raise ConvergenceError(f"Jacobi sweeps did not converge in {MAX_SWEEPS} sweeps")
    return np.sort(np.diag(a).real)
