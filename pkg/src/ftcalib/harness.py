"""Monte-Carlo experiments: noise sweeps, iteration traces and method audits.

Every cell (noise level, repetition) draws a fresh scenario from a seed derived
deterministically from ``SweepSpec.seed``; all methods in a cell see the same
dataset. Estimator failures are recorded as failed rows and never abort a run.
"""

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import CalibrationError, NonConvergence
from .known_gravity import calibrate_cayley, calibrate_relaxation
from .simulate import generate_dataset, random_scenario
from .so3 import rotation_angle_between
from .unknown_gravity import calibrate_eigen, calibrate_iterative, calibrate_nullspace

KNOWN_GRAVITY_METHODS = ("relaxation", "cayley", "cayley_ols")
UNKNOWN_GRAVITY_METHODS = ("eigen", "nullspace", "iterative")
METHODS = KNOWN_GRAVITY_METHODS + UNKNOWN_GRAVITY_METHODS


def default_noise_levels(gravity_std=100.0, num=8, snr_max=1e4, snr_min=1.0):
    """Log-spaced force noise levels for SNRs from ``snr_max`` down to ``snr_min``."""
    snr = np.logspace(math.log10(snr_max), math.log10(snr_min), num)
    return tuple(float(gravity_std / s) for s in snr)


@dataclass(frozen=True)
class SweepSpec:
    noise_levels: tuple = field(default_factory=default_noise_levels)
    num_repetitions: int = 100
    num_poses: int = 100
    methods: tuple = METHODS
    # mass handed to estimators that take it as an input (Cayley), as a
    # multiple of the true mass; relaxation estimates its own mass
    mass_error_factor: float = 1.0
    gravity_std: float = 100.0
    seed: int = 0
    max_iters: int = 50
    tol: float = 1e-10
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "noise_levels", tuple(float(x) for x in self.noise_levels))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.num_repetitions < 1:
            raise ValueError("num_repetitions must be at least 1")
        if not self.noise_levels or min(self.noise_levels) < 0:
            raise ValueError("noise_levels must be non-empty and non-negative")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if not self.mass_error_factor > 0:
            raise ValueError("mass_error_factor must be positive")

    def cells(self):
        return list(itertools.product(range(len(self.noise_levels)), range(self.num_repetitions)))

    def scenario(self, level_index, repetition):
        seq = np.random.SeedSequence(self.seed, spawn_key=(level_index, repetition))
        return random_scenario(
            seq,
            num_poses=self.num_poses,
            noise_std_force=self.noise_levels[level_index],
            gravity_std=self.gravity_std,
        )

    def initial_gravity(self, level_index, repetition):
        """Unit-variance random starting gravity for the iterative method."""
        seq = np.random.SeedSequence(self.seed, spawn_key=(level_index, repetition, 1))
        return np.random.default_rng(seq).standard_normal(3)


@dataclass(frozen=True)
class ErrorReport:
    rotation_error_rad: float
    gravity_rel_error: float
    gravity_direction_error_rad: float
    mass_rel_error: float = None


def angle_between_vectors(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # atan2 form of acos(a.b / |a||b|), accurate near 0 and pi
    return float(math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b)))


def error_report(rotation, gravity_scaled, truth, mass=None):
    g = truth.gravity_scaled
    return ErrorReport(
        rotation_error_rad=rotation_angle_between(rotation, truth.rotation),
        gravity_rel_error=float(np.linalg.norm(gravity_scaled - g) / np.linalg.norm(g)),
        gravity_direction_error_rad=angle_between_vectors(g, gravity_scaled),
        mass_rel_error=None if mass is None else abs(mass - truth.mass) / truth.mass,
    )


def estimate(method, data, truth, spec, initial_gravity=None):
    """Run one method and return ``(rotation, gravity_scaled, mass)``."""
    if method == "relaxation":
        est = calibrate_relaxation(data, truth.gravity)
        return est.rotation, est.mass * truth.gravity, est.mass
    if method in ("cayley", "cayley_ols"):
        mass = spec.mass_error_factor * truth.mass
        est = calibrate_cayley(data, truth.gravity, mass, use_tls=method == "cayley")
        return est.rotation, est.mass * truth.gravity, est.mass
    if method == "eigen":
        est = calibrate_eigen(data)
    elif method == "nullspace":
        est = calibrate_nullspace(data)
    elif method == "iterative":
        est = calibrate_iterative(data, spec.max_iters, spec.tol, initial_gravity)
    else:
        raise ValueError(f"unknown method {method!r}")
    return est.rotation, est.gravity_scaled, None


@dataclass(frozen=True)
class SweepRow:
    method: str
    noise_std: float
    repetition: int
    status: str
    rotation_error_rad: float = None
    gravity_rel_error: float = None
    gravity_direction_error_rad: float = None
    mass_rel_error: float = None


@dataclass(frozen=True)
class TraceRow:
    noise_std: float
    repetition: int
    iteration: int
    status: str
    step_angle_rad: float = None
    converged: bool = None
    rotation_error_rad: float = None
    gravity_rel_error: float = None
    gravity_direction_error_rad: float = None


@dataclass(frozen=True)
class AuditRow:
    noise_std: float
    repetition: int
    method_a: str
    method_b: str
    status: str
    rotation_disagreement_rad: float = None
    gravity_disagreement_rel: float = None


def _failure(exc):
    return f"failed:{type(exc).__name__}"


def _sweep_cell(spec, level_index, repetition):
    scenario = spec.scenario(level_index, repetition)
    data, truth = generate_dataset(scenario)
    g0 = spec.initial_gravity(level_index, repetition)
    rows = []
    for method in spec.methods:
        base = dict(method=method, noise_std=scenario.noise_std_force, repetition=repetition)
        try:
            rotation, gravity, mass = estimate(method, data, truth, spec, g0)
        except CalibrationError as exc:
            rows.append(SweepRow(status=_failure(exc), **base))
            continue
        report = error_report(rotation, gravity, truth, mass)
        rows.append(SweepRow(status="ok", **base, **asdict(report)))
    return rows


def _trace_cell(spec, level_index, repetition):
    scenario = spec.scenario(level_index, repetition)
    data, truth = generate_dataset(scenario)
    states = []
    try:
        calibrate_iterative(data, spec.max_iters, spec.tol,
                            spec.initial_gravity(level_index, repetition), states.append)
    except NonConvergence:
        pass
    except CalibrationError as exc:
        return [TraceRow(scenario.noise_std_force, repetition, 0, _failure(exc))]
    rows = []
    for state in states:
        last = state is states[-1]
        report = error_report(state.rotation, state.gravity, truth)
        rows.append(TraceRow(
            noise_std=scenario.noise_std_force,
            repetition=repetition,
            iteration=state.iteration,
            status="ok",
            step_angle_rad=state.step_angle,
            converged=bool(state.step_angle < spec.tol) if last else None,
            rotation_error_rad=report.rotation_error_rad,
            gravity_rel_error=report.gravity_rel_error,
            gravity_direction_error_rad=report.gravity_direction_error_rad,
        ))
    return rows


def _audit_cell(spec, level_index, repetition):
    scenario = spec.scenario(level_index, repetition)
    data, truth = generate_dataset(scenario)
    g0 = spec.initial_gravity(level_index, repetition)
    results = {}
    for method in UNKNOWN_GRAVITY_METHODS:
        try:
            results[method] = estimate(method, data, truth, spec, g0)
        except CalibrationError as exc:
            results[method] = exc
    rows = []
    for a, b in itertools.combinations(UNKNOWN_GRAVITY_METHODS, 2):
        base = dict(noise_std=scenario.noise_std_force, repetition=repetition,
                    method_a=a, method_b=b)
        ra, rb = results[a], results[b]
        failed = [r for r in (ra, rb) if isinstance(r, Exception)]
        if failed:
            rows.append(AuditRow(status=_failure(failed[0]), **base))
            continue
        rows.append(AuditRow(
            status="ok",
            rotation_disagreement_rad=rotation_angle_between(ra[0], rb[0]),
            gravity_disagreement_rel=float(np.linalg.norm(ra[1] - rb[1]) / np.linalg.norm(rb[1])),
            **base,
        ))
    return rows


def _run(cell_fn, spec):
    cells = spec.cells()
    args = ([spec] * len(cells), [c[0] for c in cells], [c[1] for c in cells])
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            chunks = list(pool.map(cell_fn, *args, chunksize=max(1, len(cells) // (4 * spec.workers))))
    else:
        chunks = list(map(cell_fn, *args))
    return [row for chunk in chunks for row in chunk]


def run_noise_sweep(spec):
    """One :class:`SweepRow` per (noise level, repetition, method)."""
    return _run(_sweep_cell, spec)


def run_iteration_trace(spec):
    """One :class:`TraceRow` per iteration of the iterative method, per cell."""
    return _run(_trace_cell, spec)


def run_equivalence_audit(spec):
    """Pairwise disagreement among eigen, nullspace and iterative, per cell."""
    return _run(_audit_cell, spec)


@dataclass(frozen=True)
class Summary:
    median: float
    q25: float
    q75: float
    n_ok: int
    n_failed: int

    @property
    def iqr(self):
        return self.q75 - self.q25


def summarize(rows, value="rotation_error_rad", by=("method", "noise_std")):
    """Median and quartiles of ``value`` grouped by the ``by`` columns.

    Failed rows count towards ``n_failed`` and are excluded from the statistics.
    """
    groups = {}
    for row in rows:
        key = tuple(getattr(row, k) for k in by)
        groups.setdefault(key, []).append(row)
    out = {}
    for key, group in groups.items():
        vals = [getattr(r, value) for r in group if r.status == "ok" and getattr(r, value) is not None]
        if vals:
            q25, med, q75 = np.percentile(vals, [25, 50, 75])
        else:
            q25 = med = q75 = math.nan
        out[key] = Summary(float(med), float(q25), float(q75), len(vals), len(group) - len(vals))
    return out


def final_iterations(trace_rows):
    """The last trace row of every (noise level, repetition)."""
    last = {}
    for row in trace_rows:
        last[(row.noise_std, row.repetition)] = row
    return list(last.values())


def _format(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, stream=None):
    """Write dataclass rows as CSV (header row, shortest round-trip floats)."""
    if not rows:
        raise ValueError("no rows to write")
    names = [f.name for f in fields(rows[0])]
    own = stream is None
    stream = io.StringIO() if own else stream
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([_format(getattr(row, n)) for n in names])
    return stream.getvalue() if own else None


def write_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        rows_to_csv(rows, fh)


_ROW_TYPES = {cls.__name__: cls for cls in (SweepRow, TraceRow, AuditRow)}


def _parse(value, typ):
    if value == "":
        return None
    if typ == "bool":
        return value == "true"
    if typ == "int":
        return int(value)
    if typ == "float":
        return float(value)
    return value


def read_csv(path):
    """Read a CSV written by :func:`write_csv` back into row objects."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for cls in _ROW_TYPES.values():
            if [f.name for f in fields(cls)] == header:
                break
        else:
            raise ValueError(f"unrecognised CSV header {header}")
        types = {}
        for f in fields(cls):
            t = f.type if isinstance(f.type, str) else f.type.__name__
            types[f.name] = t
        return [cls(**{n: _parse(v, types[n]) for n, v in zip(header, line)}) for line in reader]
