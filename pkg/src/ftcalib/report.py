"""Calibration report assembly (plain dicts, serialized as JSON)."""

import math

import numpy as np

from .so3 import axis_angle

REPORT_VERSION = "1.0"


def _vec(x):
    return None if x is None else [float(v) for v in np.asarray(x).reshape(-1)]


def _num(x):
    if x is None:
        return None
    x = float(x)
    # JSON has no infinity; a zero smallest singular value is reported as null
    return x if math.isfinite(x) else None


def rotation_summary(R):
    axis, angle = axis_angle(R)
    return {
        "matrix": _vec(R),
        "axis": _vec(axis),
        "angle_rad": float(angle),
    }


def build_report(method, rotation, *, mass=None, gravity=None, gravity_scaled=None,
                 cog=None, residual_force=None, residual_torque=None,
                 condition_numbers=None, nullspace_gap=None, iterations_used=None,
                 converged=None, input_digest=None):
    """Report dictionary. ``rotation`` is ``R_S^TF``; matrices are row-major."""
    return {
        "report_version": REPORT_VERSION,
        "method": method,
        "rotation": rotation_summary(rotation),
        "mass": _num(mass),
        "gravity": _vec(gravity),
        "gravity_scaled": _vec(gravity_scaled),
        "cog": _vec(cog),
        "residuals": {
            "force_rms": _num(residual_force),
            "torque_rms": _num(residual_torque),
        },
        "diagnostics": {
            "condition_numbers": {k: _num(v) for k, v in (condition_numbers or {}).items()},
            "nullspace_gap": _num(nullspace_gap),
            "iterations_used": iterations_used,
            "converged": converged,
        },
        "input_digest": input_digest,
    }


def report_rotation(report):
    return np.array(report["rotation"]["matrix"], dtype=float).reshape(3, 3)
