"""Dense linear-algebra building blocks shared by the estimators.

All rank checks use a relative condition-number threshold of ``COND_LIMIT``.
"""

import math

import numpy as np

from .errors import AmbiguousEigenvalue, AmbiguousNullspace, NoTLSSolution, RankDeficient

COND_LIMIT = 1e12


def _condition(singular_values):
    s = np.asarray(singular_values)
    if s.size == 0 or s[-1] == 0.0:
        return math.inf
    return float(s[0] / s[-1])


def condition_number(A):
    """2-norm condition number of a tall matrix (``inf`` if rank deficient)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] < A.shape[1]:
        return math.inf
    return _condition(np.linalg.svd(A, compute_uv=False))


def least_squares(A, b):
    """Minimize ``||A x - b||_2`` for full column rank ``A``.

    Solved through the SVD (``numpy.linalg.lstsq``), never the normal
    equations. ``b`` may be a vector or a matrix of right-hand sides.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    if A.shape[0] < A.shape[1]:
        raise RankDeficient(f"underdetermined system {A.shape}", math.inf)
    x, _, _, s = np.linalg.lstsq(A, b, rcond=None)
    cond = _condition(s)
    if not cond < COND_LIMIT:
        raise RankDeficient(f"regressor is rank deficient (condition {cond:.3g})", cond)
    return x


def total_least_squares(A, b):
    """Total least-squares solution of ``A x ~ b`` with errors in ``A`` and ``b``.

    With ``[A b] = U S V^T`` and ``v`` the right singular vector of the
    smallest singular value, ``x = -v[:n] / v[n]``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    if m < n:
        raise RankDeficient(f"underdetermined system {A.shape}", math.inf)
    cond = condition_number(A)
    if not cond < COND_LIMIT:
        raise RankDeficient(f"regressor is rank deficient (condition {cond:.3g})", cond)
    C = np.column_stack([A, b])
    # square A gives a wide [A b]; the full V^T then carries the nullspace
    _, s, Vt = np.linalg.svd(C, full_matrices=m <= n)
    sv = np.zeros(n + 1)
    sv[: s.size] = s
    if sv[n - 1] - sv[n] <= 1e-12 * sv[0]:
        raise NoTLSSolution("smallest singular value of [A b] is not simple")
    v = Vt[n]
    if abs(v[n]) <= 1e-12:
        raise NoTLSSolution("last component of the TLS singular vector vanishes")
    return -v[:n] / v[n]


def nullspace_vector(M):
    """Unit right singular vector of the smallest singular value of ``M``.

    Returns ``(v, gap)`` where ``gap = sigma_{n-1} / sigma_n`` (``inf`` when the
    smallest singular value is exactly zero). Raises
    :class:`AmbiguousNullspace` if the two smallest singular values are within
    1e-8 (relative to the largest) of each other.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = M.shape
    if rows < cols - 1:
        raise AmbiguousNullspace(
            f"{rows} rows cannot pin down a one-dimensional nullspace in R^{cols}"
        )
    _, s, Vt = np.linalg.svd(M, full_matrices=rows < cols)
    # pad with the implicit zero singular values of a wide matrix
    sv = np.zeros(cols)
    sv[: s.size] = s
    scale = sv[0] if sv[0] > 0 else 1.0
    if sv[-2] - sv[-1] < 1e-8 * scale:
        raise AmbiguousNullspace(
            f"two smallest singular values {sv[-2]:.3g}, {sv[-1]:.3g} are not separated"
        )
    v = Vt[-1]
    gap = math.inf if sv[-1] == 0.0 else float(sv[-2] / sv[-1])
    return v / np.linalg.norm(v), gap


def eigenvector_nearest_unit_eigenvalue(K):
    """Unit eigenvector of ``K`` whose eigenvalue is closest to 1.

    The returned vector is real; an eigenvector with a significant imaginary
    part, or a tie for the nearest eigenvalue, raises
    :class:`AmbiguousEigenvalue`.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    w, V = np.linalg.eig(K)
    dist = np.abs(w - 1.0)
    order = np.argsort(dist, kind="stable")
    if w.size > 1 and dist[order[1]] - dist[order[0]] < 1e-10:
        raise AmbiguousEigenvalue(
            f"eigenvalues {w[order[0]]:.6g} and {w[order[1]]:.6g} are equally close to 1"
        )
    v = V[:, order[0]]
    # eig normalizes to unit 2-norm; rotate the phase so the largest entry is real
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    if np.linalg.norm(v.imag) >= 1e-6 * np.linalg.norm(v):
        raise AmbiguousEigenvalue("eigenvector nearest to eigenvalue 1 is complex")
    v = v.real
    return v / np.linalg.norm(v)
