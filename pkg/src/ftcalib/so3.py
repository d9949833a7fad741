"""Rotation-group primitives.

Conventions
-----------
* Rotation matrices act on column vectors, ``v_a = R_ab @ v_b``.
* ``skew(s) @ v == np.cross(s, v)`` (right-handed cross product).
* The Cayley chart is ``R = (I + S)^-1 (I - S)`` with ``S = skew(s)``.
"""

import math

import numpy as np

from .errors import DegenerateInput, SingularRotation

ROTATION_TOL = 1e-10


def skew(s):
    """Cross-product matrix of a 3-vector, ``skew(s) @ v == s x v``."""
    x, y, z = np.asarray(s, dtype=float).reshape(3)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def vee(S):
    """Inverse of :func:`skew`, using the antisymmetric part of ``S``."""
    S = np.asarray(S, dtype=float)
    return 0.5 * np.array([S[2, 1] - S[1, 2], S[0, 2] - S[2, 0], S[1, 0] - S[0, 1]])


def is_rotation(R, tol=ROTATION_TOL):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return rotation_deviation(R) <= tol


def rotation_deviation(R):
    """Largest of ``||R^T R - I||_F`` and ``|det R - 1|``."""
    R = np.asarray(R, dtype=float)
    ortho = np.linalg.norm(R.T @ R - np.eye(3))
    return max(ortho, abs(np.linalg.det(R) - 1.0))


def project_to_so3(M):
    """Closest rotation to ``M`` in the Frobenius norm.

    Uses the SVD ``M = U S V^T`` and returns ``U diag(1, 1, det(U V^T)) V^T``.
    Raises :class:`DegenerateInput` when ``M`` has rank <= 1, where the
    projection is not unique.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DegenerateInput("matrix has non-finite entries")
    U, S, Vt = np.linalg.svd(M)
    if S[0] == 0.0 or S[1] <= 1e-12 * S[0]:
        raise DegenerateInput(f"rank <= 1 matrix (singular values {S})")
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def cayley(s):
    """Rotation matrix with Cayley-Gibbs-Rodrigues parameters ``s``."""
    S = skew(s)
    I = np.eye(3)
    return np.linalg.solve(I + S, I - S)


def inverse_cayley(R):
    """Cayley-Gibbs-Rodrigues parameters of ``R``.

    The chart excludes rotations by pi; raises :class:`SingularRotation` when
    the angle of ``R`` is within 1e-8 of pi.
    """
    R = np.asarray(R, dtype=float)
    if rotation_angle(R) > math.pi - 1e-8:
        raise SingularRotation("rotation angle is pi, Cayley parameters are unbounded")
    I = np.eye(3)
    # S (I + R) = I - R
    S = np.linalg.solve((I + R).T, (I - R).T).T
    return vee(S)


def rotation_angle(R):
    """Rotation angle of ``R`` in [0, pi]."""
    R = np.asarray(R, dtype=float)
    # atan2 form keeps full precision near 0 and pi, where acos of the trace
    # expression loses about half the digits.
    c = 0.5 * (np.trace(R) - 1.0)
    s = np.linalg.norm(vee(R))
    return float(math.atan2(s, c))


def rotation_angle_between(R1, R2):
    """Geodesic angle between two rotations, ``acos((tr(R1^T R2) - 1) / 2)``."""
    return rotation_angle(np.asarray(R1, dtype=float).T @ np.asarray(R2, dtype=float))


def axis_angle(R):
    """Unit axis and angle of ``R``. The axis is arbitrary when the angle is 0."""
    R = np.asarray(R, dtype=float)
    angle = rotation_angle(R)
    w = vee(R)
    n = np.linalg.norm(w)
    if n > 1e-12:
        return w / n, angle
    if angle < 1.0:
        return np.array([1.0, 0.0, 0.0]), angle
    # angle near pi: axis from the symmetric part R + I = 2 a a^T
    B = 0.5 * (R + np.eye(3))
    k = int(np.argmax(np.diag(B)))
    a = B[:, k] / math.sqrt(max(B[k, k], 1e-300))
    return a / np.linalg.norm(a), angle


def axis_angle_to_matrix(axis, angle):
    """Rodrigues' formula."""
    axis = np.asarray(axis, dtype=float).reshape(3)
    axis = axis / np.linalg.norm(axis)
    K = skew(axis)
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)
