"""Forward wrench model and synthetic calibration scenarios.

Frames: ``RB`` robot base, ``TF`` tool flange, ``S`` sensor. A sample stores
the flange orientation ``R_TF^RB`` (maps base-frame vectors into the flange
frame) together with the sensor-frame force and torque::

    f_S   = R_S^TF R_TF^RB (m g)
    tau_S = R_S^TF skew(r) R_TF^RB (m g)
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .so3 import is_rotation, project_to_so3, skew

MIN_POSES = 4
STANDARD_GRAVITY = np.array([0.0, 0.0, -9.81])


@dataclass(frozen=True)
class WrenchSample:
    flange_orientation: np.ndarray  # R_TF^RB
    force: np.ndarray
    torque: np.ndarray = None


@dataclass(frozen=True)
class Dataset:
    """Stacked measurements; ``torques`` is ``None`` for force-only data."""

    orientations: np.ndarray  # (N, 3, 3), R_TF^RB per sample
    forces: np.ndarray  # (N, 3)
    torques: np.ndarray = None  # (N, 3)

    def __post_init__(self):
        R = np.asarray(self.orientations, dtype=float).reshape(-1, 3, 3)
        f = np.asarray(self.forces, dtype=float).reshape(-1, 3)
        if len(R) != len(f):
            raise ValueError(f"{len(R)} orientations but {len(f)} forces")
        object.__setattr__(self, "orientations", R)
        object.__setattr__(self, "forces", f)
        if self.torques is not None:
            t = np.asarray(self.torques, dtype=float).reshape(-1, 3)
            if len(t) != len(f):
                raise ValueError(f"{len(t)} torques but {len(f)} forces")
            object.__setattr__(self, "torques", t)

    @classmethod
    def from_samples(cls, samples):
        samples = list(samples)
        has_torque = all(s.torque is not None for s in samples)
        return cls(
            np.array([s.flange_orientation for s in samples]).reshape(-1, 3, 3),
            np.array([s.force for s in samples]).reshape(-1, 3),
            np.array([s.torque for s in samples]).reshape(-1, 3) if has_torque else None,
        )

    @property
    def has_torque(self):
        return self.torques is not None

    def __len__(self):
        return len(self.forces)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i):
        torque = None if self.torques is None else self.torques[i]
        return WrenchSample(self.orientations[i], self.forces[i], torque)

    def subset(self, index):
        index = np.atleast_1d(index)
        torques = None if self.torques is None else self.torques[index]
        return Dataset(self.orientations[index], self.forces[index], torques)


@dataclass(frozen=True)
class CalibrationResult:
    """Ground-truth (or estimated) calibration parameters.

    ``rotation`` is ``R_S^TF``, mapping flange-frame vectors into the sensor
    frame.
    """

    rotation: np.ndarray
    mass: float
    gravity: np.ndarray
    cog: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def gravity_scaled(self):
        return self.mass * np.asarray(self.gravity)


@dataclass(frozen=True)
class SyntheticScenario:
    true_rotation: np.ndarray  # R_S^TF
    mass: float
    gravity: np.ndarray
    cog: np.ndarray = field(default_factory=lambda: np.zeros(3))
    noise_std_force: float = 0.0
    noise_std_torque: float = None  # defaults to noise_std_force
    num_poses: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if not self.mass > 0:
            raise PreconditionError(f"mass must be positive, got {self.mass}")
        if self.num_poses < MIN_POSES:
            raise PreconditionError(
                f"need at least {MIN_POSES} poses, got {self.num_poses}"
            )
        if self.noise_std_force < 0 or (self.noise_std_torque or 0.0) < 0:
            raise PreconditionError("noise standard deviations must be non-negative")
        if not is_rotation(self.true_rotation):
            raise PreconditionError("true_rotation is not a rotation matrix")

    @property
    def torque_noise(self):
        if self.noise_std_torque is None:
            return self.noise_std_force
        return self.noise_std_torque

    @property
    def ground_truth(self):
        return CalibrationResult(
            rotation=np.array(self.true_rotation, dtype=float),
            mass=float(self.mass),
            gravity=np.array(self.gravity, dtype=float),
            cog=np.array(self.cog, dtype=float),
        )


def sample_random_rotation(rng):
    """Haar-uniform rotation: SO(3) projection of an iid standard normal matrix.

    The projection is equivariant under left multiplication by rotations and
    the Gaussian is invariant, so the result is uniformly distributed.
    """
    return project_to_so3(rng.standard_normal((3, 3)))


def random_scenario(seed, *, num_poses=100, noise_std_force=0.0, noise_std_torque=None,
                    gravity_std=None, gravity=None, mass=1.0, cog_std=0.05):
    """Draw a scenario with random sensor rotation, gravity and centre of gravity.

    With ``gravity_std`` set the gravity vector is iid Gaussian per component
    (mass folded in, so keep ``mass=1``); otherwise ``gravity`` or standard
    gravity along -z is used.
    """
    rng = np.random.default_rng(seed)
    rotation = sample_random_rotation(rng)
    if gravity_std is not None:
        g = gravity_std * rng.standard_normal(3)
    elif gravity is not None:
        g = np.asarray(gravity, dtype=float)
    else:
        g = STANDARD_GRAVITY.copy()
    cog = cog_std * rng.standard_normal(3)
    return SyntheticScenario(
        true_rotation=rotation,
        mass=mass,
        gravity=g,
        cog=cog,
        noise_std_force=noise_std_force,
        noise_std_torque=noise_std_torque,
        num_poses=num_poses,
        rng_seed=int(rng.integers(2**63)),
    )


def forward_wrench(scenario, flange_orientation, rng=None):
    """Sensor reading for one flange orientation, with Gaussian sensor-frame noise."""
    A = np.asarray(flange_orientation, dtype=float)
    load = A @ (scenario.mass * np.asarray(scenario.gravity, dtype=float))
    R = np.asarray(scenario.true_rotation, dtype=float)
    force = R @ load
    torque = R @ skew(scenario.cog) @ load
    if rng is not None:
        if scenario.noise_std_force > 0:
            force = force + scenario.noise_std_force * rng.standard_normal(3)
        if scenario.torque_noise > 0:
            torque = torque + scenario.torque_noise * rng.standard_normal(3)
    return WrenchSample(A, force, torque)


def generate_dataset(scenario):
    """Simulate ``scenario.num_poses`` readings at Haar-random flange orientations.

    Deterministic in ``scenario.rng_seed``. Returns ``(dataset, ground_truth)``.
    """
    if scenario.num_poses < MIN_POSES:
        raise PreconditionError(f"need at least {MIN_POSES} poses, got {scenario.num_poses}")
    rng = np.random.default_rng(scenario.rng_seed)
    samples = [
        forward_wrench(scenario, sample_random_rotation(rng), rng)
        for _ in range(scenario.num_poses)
    ]
    return Dataset.from_samples(samples), scenario.ground_truth
