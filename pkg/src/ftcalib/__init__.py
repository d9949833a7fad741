"""Calibration of wrist-mounted force/torque sensors from free-air reorientation."""

from .errors import CalibrationError
from .known_gravity import calibrate_cayley, calibrate_relaxation, estimate_cog
from .simulate import Dataset, SyntheticScenario, WrenchSample, generate_dataset, random_scenario
from .unknown_gravity import calibrate_eigen, calibrate_iterative, calibrate_nullspace

__all__ = [
    "CalibrationError",
    "Dataset",
    "SyntheticScenario",
    "WrenchSample",
    "calibrate_cayley",
    "calibrate_eigen",
    "calibrate_iterative",
    "calibrate_nullspace",
    "calibrate_relaxation",
    "estimate_cog",
    "generate_dataset",
    "random_scenario",
]

__version__ = "0.1.0"
