"""Estimators for a known gravity vector.

* :func:`calibrate_relaxation` estimates the scaled rotation ``m R_S^TF`` by
  unconstrained linear least squares and splits it into rotation and mass
  by projection onto SO(3).
* :func:`calibrate_cayley` solves for the Cayley-Gibbs-Rodrigues parameters
  of ``R_S^TF`` given the mass, by total (or ordinary) least squares.
* :func:`estimate_cog` recovers the centre of gravity from the torques.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (NonPositiveMass, NoTLSSolution, PreconditionError, RankDeficient,
                     SingularRotation)
from .numerics import COND_LIMIT, condition_number, least_squares, total_least_squares
from .simulate import MIN_POSES
from .so3 import cayley, project_to_so3, skew


class KnownGravityMethod(str, enum.Enum):
    RELAXATION = "relaxation"
    CAYLEY_TLS = "cayley_tls"
    CAYLEY_OLS = "cayley_ols"


@dataclass(frozen=True)
class KnownGravityEstimate:
    rotation: np.ndarray  # R_S^TF
    mass: float
    residual_force: float  # per-axis RMS, N
    method: KnownGravityMethod

    @property
    def flange_from_sensor(self):
        return self.rotation.T


@dataclass(frozen=True)
class CogEstimate:
    cog: np.ndarray
    residual_torque: float  # per-axis RMS, N m


def _rms(residual):
    return float(np.sqrt(np.mean(np.square(residual))))


def _loads(data, gravity_scaled):
    """Per-sample load in the flange frame, ``R_TF^RB (m g)``, shape (N, 3)."""
    return np.einsum("nij,j->ni", data.orientations, gravity_scaled)


def _check_gravity(gravity):
    g = np.asarray(gravity, dtype=float).reshape(3)
    if not np.linalg.norm(g) > 0:
        raise PreconditionError("gravity vector must be non-zero")
    return g


def relaxation_regressor(data, gravity):
    """Stacked ``a_i^T kron I_3`` blocks, 3N x 9."""
    return np.vstack([np.kron(a, np.eye(3)) for a in _loads(data, gravity)])


def calibrate_relaxation(data, gravity):
    """Joint rotation and mass from forces, with the gravity vector known.

    Each reading gives ``f_i = X a_i`` with ``a_i = R_TF^RB_i g`` and
    ``X = m R_S^TF``, i.e. ``(a_i^T kron I_3) vec(X) = f_i``. The stacked
    3N x 9 system is solved for ``vec(X)``; the rotation is the SO(3)
    projection of ``X`` and the mass is the mean singular value of ``X``.
    """
    if len(data) < MIN_POSES:
        raise PreconditionError(f"need at least {MIN_POSES} samples, got {len(data)}")
    g = _check_gravity(gravity)
    loads = _loads(data, g)
    regressor = relaxation_regressor(data, g)
    x = least_squares(regressor, data.forces.reshape(-1))
    scaled = x.reshape(3, 3, order="F")
    rotation = project_to_so3(scaled)
    # negative determinant means the data imply a negative scale
    mass = float(np.mean(np.linalg.svd(scaled, compute_uv=False)))
    det = np.linalg.det(scaled)
    if det <= 0 or not mass > 0:
        raise NonPositiveMass(f"scaled rotation estimate has det {det:.3g}, implying mass <= 0")
    residual = data.forces - mass * loads @ rotation.T
    return KnownGravityEstimate(rotation, mass, _rms(residual), KnownGravityMethod.RELAXATION)


def cayley_system(data, gravity_scaled):
    """Stacked linear system ``skew(f_i + a_i) s = f_i - a_i`` in the Cayley parameters."""
    loads = _loads(data, gravity_scaled)
    A = np.vstack([skew(f + a) for f, a in zip(data.forces, loads)])
    b = (data.forces - loads).reshape(-1)
    return A, b


def calibrate_cayley(data, gravity, mass, use_tls=True):
    """Rotation ``R_S^TF`` for a known mass via the Cayley transform.

    The regressor contains the noisy forces, so total least squares is the
    default; ``use_tls=False`` gives the ordinary least-squares variant.
    """
    if len(data) < 2:
        raise PreconditionError(f"need at least 2 samples, got {len(data)}")
    if not mass > 0:
        raise PreconditionError(f"mass must be positive, got {mass}")
    g = _check_gravity(gravity)
    A, b = cayley_system(data, mass * g)
    try:
        if use_tls:
            s = total_least_squares(A, b)
            method = KnownGravityMethod.CAYLEY_TLS
        else:
            s = least_squares(A, b)
            method = KnownGravityMethod.CAYLEY_OLS
    except NoTLSSolution as exc:
        raise SingularRotation(f"Cayley parameters unbounded: {exc}") from exc
    except RankDeficient:
        # At angle pi every f_i + a_i lies on the rotation axis. If the loads
        # themselves are diverse, the rotation (not the data) is to blame.
        loads = np.vstack([skew(a) for a in _loads(data, g)])
        if condition_number(loads) < COND_LIMIT:
            raise SingularRotation("rotation angle is pi, Cayley parameters are unbounded") from None
        raise
    if math.pi - 2.0 * math.atan(np.linalg.norm(s)) < 1e-3:
        raise SingularRotation("estimated rotation angle is within 1e-3 rad of pi")
    rotation = cayley(s)
    residual = data.forces - _loads(data, mass * g) @ rotation.T
    return KnownGravityEstimate(rotation, float(mass), _rms(residual), method)


def estimate_cog(data, rotation, gravity, mass):
    """Centre of gravity ``r`` from torques, given rotation, gravity and mass.

    Rotating the torques into the flange frame gives
    ``R_TF^S tau_i = r x a_i = -skew(a_i) r`` with ``a_i = R_TF^RB_i (m g)``.
    """
    if not data.has_torque:
        raise PreconditionError("dataset has no torque measurements")
    if len(data) < 1:
        raise PreconditionError("empty dataset")
    loads = _loads(data, mass * np.asarray(gravity, dtype=float))
    A = -np.vstack([skew(a) for a in loads])
    b = data.torques @ np.asarray(rotation)  # rows are R^T tau_i
    cog = least_squares(A, b.reshape(-1))
    residual = A @ cog - b.reshape(-1)
    return CogEstimate(cog, _rms(residual))
