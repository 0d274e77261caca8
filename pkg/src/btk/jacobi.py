"""Cyclic Jacobi eigenvalue iteration for Hermitian matrices.

Each pivot (p, q) is annihilated by a complex rotation: the pivot's phase is
absorbed into the rotation so the remaining 2x2 problem is the classical real
one.  Used for all spectra in the operator layer; numpy's eigvalsh serves as
an independent cross-check in the tests only.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigvalsh(
    matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending.

    Sweeps cyclically over the upper triangle until the off-diagonal Frobenius
    norm drops below tol * ||matrix||_F.  Raises ConvergenceError after
    max_sweeps full sweeps.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("matrix must be square")
    if n == 0:
        return np.array([])
    if n == 1:
        return np.array([a[0, 0].real])
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n)

    for _ in range(max_sweeps):
        if _off_norm(a) <= tol * norm:
            return np.sort(np.diag(a).real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-30 * norm:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + np.hypot(1.0, theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G e_p = c e_p - s conj(phase) e_q ; G e_q = s phase e_p + c e_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    if _off_norm(a) <= tol * norm:
        return np.sort(np.diag(a).real)
    raise ConvergenceError(
        f"Jacobi iteration failed to converge in {max_sweeps} sweeps"
    )
