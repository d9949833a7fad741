"""Joint estimation of the sensor rotation and the mass-scaled gravity vector.

With ``R = R_TF^S`` and mass folded into ``g``, every reading satisfies
``R f_i = A_i g`` where ``A_i = R_TF^RB`` is the flange orientation. Stacking
gives ``F vec(R) = D g`` with ``D = [A_1; A_2; ...]`` and
``F = [f_1^T kron I_3; f_2^T kron I_3; ...]`` (column-major ``vec``).

Three solvers are provided and agree on noise-free data:

* :func:`calibrate_eigen`: ``vec(R)`` is the eigenvector of
  ``K = F^+ D D^+ F`` for the eigenvalue closest to one.
* :func:`calibrate_nullspace`: pairwise differences eliminate ``g`` and
  ``vec(R)`` spans the nullspace of the stacked difference operator.
* :func:`calibrate_iterative`: alternating least squares on ``g`` and ``R``
  with projection onto SO(3) in between, a power iteration on ``K``.

All results report ``rotation`` as ``R_S^TF`` (the direction of the forward
model); ``flange_from_sensor`` gives ``R_TF^S``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, PreconditionError
from .numerics import eigenvector_nearest_unit_eigenvalue, least_squares, nullspace_vector
from .simulate import MIN_POSES
from .so3 import project_to_so3, rotation_angle_between


class UnknownGravityMethod(str, enum.Enum):
    EIGEN = "eigen"
    NULLSPACE = "nullspace"
    ITERATIVE = "iterative"


@dataclass(frozen=True)
class UnknownGravityEstimate:
    rotation: np.ndarray  # R_S^TF
    gravity_scaled: np.ndarray  # m g in the base frame
    method: UnknownGravityMethod
    residual: float  # per-axis RMS of F vec(R_TF^S) - D g
    iterations_used: int = None
    nullspace_gap: float = None
    converged: bool = True

    @property
    def flange_from_sensor(self):
        return self.rotation.T


@dataclass(frozen=True)
class OperatorPair:
    D: np.ndarray  # (3N, 3) stacked R_TF^RB
    F: np.ndarray  # (3N, 9) stacked f_i^T kron I_3


@dataclass(frozen=True)
class IterationState:
    """Snapshot after one pass of the alternating least-squares loop."""

    iteration: int
    gravity_in: np.ndarray  # gravity used for the rotation half-step
    rotation_unconstrained: np.ndarray  # least-squares R_TF^S before projection
    flange_from_sensor: np.ndarray  # projected R_TF^S
    gravity: np.ndarray  # gravity re-estimated from the projected rotation
    step_angle: float  # angle to the previous iterate (nan on the first pass)

    @property
    def rotation(self):
        return self.flange_from_sensor.T


def vec(M):
    return np.asarray(M).reshape(-1, order="F")


def unvec(r):
    return np.asarray(r).reshape(3, 3, order="F")


def build_operators(data):
    """Stack the flange rotations ``D`` and force Kronecker blocks ``F`` in sample order."""
    if len(data) < 1:
        raise PreconditionError("empty dataset")
    D = data.orientations.reshape(-1, 3)
    F = np.vstack([np.kron(f.reshape(1, 3), np.eye(3)) for f in data.forces])
    return OperatorPair(D, F)


def fixed_point_operator(ops):
    """The 9 x 9 matrix ``K = F^+ D D^+ F``."""
    return least_squares(ops.F, ops.D) @ least_squares(ops.D, ops.F)


def rotation_from_vector(r):
    """Reshape ``vec(R)``, flip the sign so ``det > 0``, and project onto SO(3)."""
    R = unvec(r)
    if np.linalg.det(R) < 0:
        R = -R
    return project_to_so3(R)


def gravity_given_rotation(ops, flange_from_sensor):
    """Least-squares ``g = D^+ F vec(R_TF^S)``."""
    return least_squares(ops.D, ops.F @ vec(flange_from_sensor))


def _residual(ops, flange_from_sensor, gravity):
    res = ops.F @ vec(flange_from_sensor) - ops.D @ gravity
    return float(np.sqrt(np.mean(res**2)))


def _finish(ops, flange_from_sensor, method, **extra):
    g = gravity_given_rotation(ops, flange_from_sensor)
    return UnknownGravityEstimate(
        rotation=flange_from_sensor.T.copy(),
        gravity_scaled=g,
        method=method,
        residual=_residual(ops, flange_from_sensor, g),
        **extra,
    )


def _require_poses(data, n=MIN_POSES):
    if len(data) < n:
        raise PreconditionError(f"need at least {n} samples, got {len(data)}")


def calibrate_eigen(data):
    """Rotation from the eigenvector of ``K`` with eigenvalue nearest to one."""
    _require_poses(data)
    ops = build_operators(data)
    r = eigenvector_nearest_unit_eigenvalue(fixed_point_operator(ops))
    return _finish(ops, rotation_from_vector(r), UnknownGravityMethod.EIGEN)


def pairwise_difference_operator(data):
    """Stack ``A_k A_i^T (f_i^T kron I) - (f_k^T kron I)`` over all pairs ``i < k``.

    Rows are ordered by ``i`` then ``k``; the result is ``3 N (N-1) / 2 x 9``.
    """
    A = data.orientations
    P = np.stack([np.kron(f.reshape(1, 3), np.eye(3)) for f in data.forces])
    blocks = []
    for i in range(len(data) - 1):
        # g = A_i^T R f_i for every i, hence A_k A_i^T R f_i = R f_k
        carried = A[i].T @ P[i]
        blocks.append((A[i + 1:] @ carried - P[i + 1:]).reshape(-1, 9))
    return np.vstack(blocks)


def calibrate_nullspace(data):
    """Rotation spanning the nullspace of the pairwise-difference operator."""
    _require_poses(data, 2)
    M = pairwise_difference_operator(data)
    r, gap = nullspace_vector(M)
    ops = build_operators(data)
    return _finish(ops, rotation_from_vector(r), UnknownGravityMethod.NULLSPACE,
                   nullspace_gap=gap)


def iterate_alternating(ops, initial_gravity=None, max_iters=50, tol=1e-10):
    """Yield :class:`IterationState` for each pass of the alternating loop.

    Without ``initial_gravity`` the loop starts from ``R_TF^S = I`` and the
    corresponding least-squares gravity. Stops after ``max_iters`` passes or
    once the rotation moves less than ``tol`` radians.
    """
    if max_iters < 1:
        raise PreconditionError("max_iters must be at least 1")
    F_pinv_D = least_squares(ops.F, ops.D)
    D_pinv_F = least_squares(ops.D, ops.F)
    previous = None
    if initial_gravity is None:
        previous = np.eye(3)
        g = D_pinv_F @ vec(previous)
    else:
        g = np.asarray(initial_gravity, dtype=float).reshape(3)
    for k in range(1, max_iters + 1):
        r_bar = F_pinv_D @ g
        R = rotation_from_vector(r_bar)
        g_new = D_pinv_F @ vec(R)
        step = float("nan") if previous is None else rotation_angle_between(previous, R)
        yield IterationState(k, g, unvec(r_bar), R, g_new, step)
        if step < tol:
            return
        previous, g = R, g_new


def calibrate_iterative(data, max_iters=50, tol=1e-10, initial_gravity=None, callback=None):
    """Alternating least-squares estimate of rotation and scaled gravity.

    ``callback`` receives every :class:`IterationState`. Raises
    :class:`NonConvergence` (carrying the last estimate) when the rotation
    still moves by ``tol`` or more after ``max_iters`` passes.
    """
    _require_poses(data)
    ops = build_operators(data)
    state = None
    for state in iterate_alternating(ops, initial_gravity, max_iters, tol):
        if callback is not None:
            callback(state)
    converged = state.step_angle < tol
    estimate = UnknownGravityEstimate(
        rotation=state.flange_from_sensor.T.copy(),
        gravity_scaled=state.gravity,
        method=UnknownGravityMethod.ITERATIVE,
        residual=_residual(ops, state.flange_from_sensor, state.gravity),
        iterations_used=state.iteration,
        converged=converged,
    )
    if not converged:
        raise NonConvergence(
            f"rotation still changing by {state.step_angle:.3g} rad after {max_iters} iterations",
            estimate,
        )
    return estimate
