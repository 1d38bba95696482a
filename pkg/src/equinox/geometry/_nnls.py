"""Active-set nonnegative least squares (Lawson-Hanson).

Solves min ||A x - b|| subject to x >= 0. This is the workhorse behind
projection onto finitely generated cones: the nearest cone point to b is
A @ x at the optimum, where the columns of A are the cone generators.
"""

import numpy as np

from ..errors import GeometryError


def nnls(A, b, max_iter=None, tol=1e-10):
    """Solve min ||A x - b|| with x >= 0 by the Lawson-Hanson active-set method.

    Parameters
    ----------
    A : (m, n) array
    b : (m,) array
    max_iter : int, optional
        Cap on active-set iterations; defaults to 100 * n.
    tol : float
        Dual-feasibility tolerance, relative to ||b||.

    Returns
    -------
    x : (n,) array of nonnegative coefficients.

    Raises
    ------
    GeometryError
        If the iteration cap is hit ("projection failed"), which signals
        degenerate input columns.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 100 * n

    scale = max(1.0, float(np.linalg.norm(b)))
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)

    for _ in range(max_iter):
        w = A.T @ (b - A @ x)
        w_free = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_free))
        if w_free[j] <= tol * scale:
            return x
        passive[j] = True

        # Inner loop: restore feasibility of the passive-set least squares
        # solution, moving indices back to the active set as they hit zero.
        while True:
            idx = np.flatnonzero(passive)
            z_sub, _, _, _ = np.linalg.lstsq(A[:, idx], b, rcond=None)
            if np.all(z_sub > 0.0):
                x = np.zeros(n)
                x[idx] = z_sub
                break
            z = np.zeros(n)
            z[idx] = z_sub
            blocking = passive & (z <= 0.0)
            ratios = x[blocking] / (x[blocking] - z[blocking])
            alpha = float(np.min(ratios))
            x = x + alpha * (z - x)
            hit_zero = passive & (x <= tol * max(1.0, float(np.max(np.abs(x)))))
            passive[hit_zero] = False
            x[~passive] = 0.0
            if not np.any(passive):
                break

    raise GeometryError("projection failed: active-set NNLS hit the iteration cap")
