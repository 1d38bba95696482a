"""Wolfe's minimum-norm-point algorithm over a convex hull of points.

Used to project onto vertex-represented polytopes: the nearest point of
conv(V) to a query q is q + min_norm_point(V - q).
"""

import numpy as np


def _affine_minimizer(B):
    """Affine coefficients a (sum 1, unconstrained sign) minimizing ||a @ B||."""
    s = B.shape[0]
    G = B @ B.T
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = G
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    sol, _, _, _ = np.linalg.lstsq(K, rhs, rcond=None)
    return sol[:s]


def min_norm_point(points, tol=1e-12, max_iter=None):
    """Return the minimum-norm point of conv(points).

    points : (k, n) array of hull vertices (k >= 1).
    """
    P = np.asarray(points, dtype=float)
    k = P.shape[0]
    if k == 1:
        return P[0].copy()
    if max_iter is None:
        max_iter = 200 + 20 * k
    scale2 = max(1.0, float(np.max(np.sum(P * P, axis=1))))

    corral = [int(np.argmin(np.sum(P * P, axis=1)))]
    w = np.array([1.0])
    x = P[corral[0]].copy()

    for _ in range(max_iter):
        d = P @ x
        j = int(np.argmin(d))
        if d[j] >= float(x @ x) - tol * scale2 or j in corral:
            return x
        corral.append(j)
        w = np.append(w, 0.0)

        for _ in range(max_iter):
            B = P[corral]
            a = _affine_minimizer(B)
            if np.all(a > 1e-12):
                w = a
                x = a @ B
                break
            mask = a <= 1e-12
            ratios = w[mask] / (w[mask] - a[mask])
            theta = float(np.min(ratios))
            w = w + theta * (a - w)
            keep = w > 1e-12
            # Drop at least one index so the minor cycle makes progress.
            if np.all(keep):
                keep[int(np.argmin(w))] = False
            corral = [c for c, k_ in zip(corral, keep) if k_]
            w = w[keep]
            if len(corral) <= 1:
                x = P[corral[0]].copy()
                w = np.array([1.0])
                break
            w = w / w.sum()
        else:  # pragma: no cover - minor cycle cap
            return x

    return x


def project_onto_hull(vertices, q, tol=1e-12):
    """Euclidean projection of q onto conv(vertices)."""
    V = np.asarray(vertices, dtype=float)
    q = np.asarray(q, dtype=float)
    return q + min_norm_point(V - q, tol=tol)


def hull_distance(vertices, q, tol=1e-12):
    """Distance from q to conv(vertices)."""
    return float(np.linalg.norm(project_onto_hull(vertices, q, tol=tol) - q))
