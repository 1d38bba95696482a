"""Generator enumeration for polyhedral cones and polyhedra given by inequalities.

A cone {x : A x <= 0} splits into a lineality space (null space of A) and a
pointed cone in the orthogonal complement.  In the complement, every extreme
ray is the null direction of some rank-(d-1) subset of constraint rows, so at
desk scale the rays can be enumerated combinatorially and checked for
feasibility.  Polyhedron vertices are recovered through the standard
homogenization with one extra coordinate.
"""

import itertools

import numpy as np

from ..errors import GeometryError

RAY_TOL = 1e-9


def _normalize_rows(A):
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms <= 0.0):
        raise GeometryError("zero inequality row")
    return A / norms[:, None]


def cone_rays(A, tol=RAY_TOL):
    """Generating rays and lineality basis of the cone {x : A x <= 0}.

    Returns (rays, lineality): rays is a (p, d) array of unit extreme rays of
    the pointed part, lineality a (q, d) orthonormal basis of the lineality
    space.  Together, the cone equals cone(rays) + span(lineality).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, d = A.shape
    A = _normalize_rows(A)

    _, sv, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(sv > tol * max(1.0, sv[0] if len(sv) else 1.0)))
    lineality = Vt[rank:]
    basis = Vt[:rank].T  # d x d' map from reduced coords to ambient
    dp = rank

    if dp == 0:
        return np.zeros((0, d)), lineality

    A2 = A @ basis  # m x d', rows still (near) unit after rotation

    rays_reduced = []
    if dp == 1:
        if np.all(A2[:, 0] <= tol):
            rays_reduced.append(np.array([1.0]))
        if np.all(-A2[:, 0] <= tol):
            rays_reduced.append(np.array([-1.0]))
    else:
        for subset in itertools.combinations(range(m), dp - 1):
            M = A2[list(subset)]
            _, msv, MVt = np.linalg.svd(M, full_matrices=True)
            nnz = int(np.sum(msv > tol))
            if nnz != dp - 1:
                continue
            v = MVt[dp - 1]
            slack = A2 @ v
            if np.max(slack) <= tol:
                rays_reduced.append(v)
            elif np.max(-slack) <= tol:
                rays_reduced.append(-v)

    # Deduplicate by direction.
    unique = []
    for v in rays_reduced:
        v = v / np.linalg.norm(v)
        if all(float(v @ u) < 1.0 - 1e-9 for u in unique):
            unique.append(v)

    if not unique:
        return np.zeros((0, d)), lineality
    rays = np.array([basis @ v for v in unique])
    return rays, lineality


def polyhedron_vertices(A_ub, b_ub, A_eq=None, b_eq=None, tol=RAY_TOL):
    """Vertices of {x : A_ub x <= b_ub, A_eq x = b_eq} via homogenization.

    Returns (vertices, recession_rays); nonempty recession rays or any
    lineality mean the polyhedron is unbounded or contains a line.
    """
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.asarray(b_ub, dtype=float)
    m, d = A_ub.shape
    rows = [np.hstack([A_ub, -b_ub[:, None]])]
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        b_eq = np.asarray(b_eq, dtype=float)
        rows.append(np.hstack([A_eq, -b_eq[:, None]]))
        rows.append(np.hstack([-A_eq, b_eq[:, None]]))
    last = np.zeros((1, d + 1))
    last[0, d] = -1.0  # s >= 0
    rows.append(last)
    H = np.vstack(rows)

    rays, lineality = cone_rays(H, tol=tol)
    if lineality.shape[0] > 0:
        spatial = lineality[:, :d]
        if np.max(np.abs(spatial)) > tol:
            return np.zeros((0, d)), spatial
    vertices = []
    recession = []
    for r in rays:
        s = r[d]
        if s > tol:
            vertices.append(r[:d] / s)
        elif np.linalg.norm(r[:d]) > tol:
            recession.append(r[:d])
    return (
        np.array(vertices) if vertices else np.zeros((0, d)),
        np.array(recession) if recession else np.zeros((0, d)),
    )
