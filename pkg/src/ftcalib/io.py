"""Dataset files and calibration reports.

JSON dataset (``schema_version`` "1.0")::

    {"schema_version": "1.0",
     "samples": [{"orientation": [r11, r12, r13, r21, r22, r23, r31, r32, r33],
                  "force": [fx, fy, fz],
                  "torque": [tx, ty, tz]}]}

``orientation`` is ``R_TF^RB`` in row-major order; ``torque`` is optional.
The CSV twin has one sample per row and the 15 columns of ``CSV_COLUMNS``,
with the three torque cells left empty for force-only data.
"""

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidOrientation, ParseError
from .simulate import CalibrationResult, Dataset
from .so3 import project_to_so3, rotation_deviation

SCHEMA_VERSION = "1.0"
ORIENTATION_TOL = 1e-6
CSV_COLUMNS = (
    "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33",
    "fx", "fy", "fz", "tx", "ty", "tz",
)
SCHEMA_HELP = """\
Dataset files are JSON or CSV.
  JSON: {"schema_version": "1.0", "samples": [{"orientation": [9 numbers, row-major R_TF^RB],
         "force": [3 numbers, N], "torque": [3 numbers, N m, optional]}, ...]}
  CSV:  header r11,r12,r13,r21,r22,r23,r31,r32,r33,fx,fy,fz,tx,ty,tz; one sample per row,
        torque cells may be empty.
Example: an identity flange orientation is [1, 0, 0, 0, 1, 0, 0, 0, 1]; the
rotation about z by +90 degrees is [0, -1, 0, 1, 0, 0, 0, 0, 1]."""


def _floats(values, n, where):
    if not isinstance(values, (list, tuple)) or len(values) != n:
        raise ParseError(f"{where}: expected a list of {n} numbers")
    try:
        out = np.array([float(v) for v in values])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{where}: non-finite value")
    return out


def _validated(orientations, forces, torques):
    if len(forces) == 0:
        raise ParseError("empty dataset")
    fixed = []
    for i, R in enumerate(orientations):
        dev = rotation_deviation(R)
        if not dev <= ORIENTATION_TOL:
            raise InvalidOrientation(
                f"sample {i}: orientation deviates from SO(3) by {dev:.3g}", i, dev
            )
        fixed.append(project_to_so3(R))
    return Dataset(np.array(fixed), np.array(forces), None if torques is None else np.array(torques))


def parse_json_dataset(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "samples" not in doc:
        raise ParseError("top level must be an object with a 'samples' list")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    samples = doc["samples"]
    if not isinstance(samples, list):
        raise ParseError("'samples' must be a list")
    orientations, forces, torques = [], [], []
    for i, s in enumerate(samples):
        if not isinstance(s, dict):
            raise ParseError(f"samples[{i}]: expected an object")
        for key in ("orientation", "force"):
            if key not in s:
                raise ParseError(f"samples[{i}]: missing '{key}'")
        orientations.append(_floats(s["orientation"], 9, f"samples[{i}].orientation").reshape(3, 3))
        forces.append(_floats(s["force"], 3, f"samples[{i}].force"))
        if s.get("torque") is not None:
            torques.append(_floats(s["torque"], 3, f"samples[{i}].torque"))
    if torques and len(torques) != len(forces):
        raise ParseError("torque must be given for every sample or for none")
    return _validated(orientations, forces, torques or None)


def parse_csv_dataset(text):
    lines = text.splitlines()
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty dataset") from None
    if tuple(header) != CSV_COLUMNS:
        raise ParseError(f"line 1: expected header {','.join(CSV_COLUMNS)}")
    orientations, forces, torques = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        values = []
        for name, cell in zip(CSV_COLUMNS, row):
            cell = cell.strip()
            if cell == "" and name in ("tx", "ty", "tz"):
                values.append(None)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(f"line {lineno}, field {name}: not a number: {cell!r}") from None
            if not math.isfinite(values[-1]):
                raise ParseError(f"line {lineno}, field {name}: non-finite value")
        orientations.append(np.array(values[:9]).reshape(3, 3))
        forces.append(np.array(values[9:12]))
        tq = values[12:]
        if all(v is None for v in tq):
            torques.append(None)
        elif any(v is None for v in tq):
            raise ParseError(f"line {lineno}: torque must have all three components or none")
        else:
            torques.append(np.array(tq))
    has = [t is not None for t in torques]
    if any(has) and not all(has):
        raise ParseError("torque must be given for every sample or for none")
    return _validated(orientations, forces, torques if torques and all(has) else None)


def _is_csv(path):
    return Path(path).suffix.lower() == ".csv"


def load_dataset(path):
    """Load a JSON or CSV dataset (chosen by extension) and validate orientations."""
    text = Path(path).read_text(encoding="utf-8")
    if _is_csv(path):
        return parse_csv_dataset(text)
    return parse_json_dataset(text)


def dataset_to_json(data):
    samples = []
    for s in data:
        item = {"orientation": s.flange_orientation.reshape(-1).tolist(), "force": s.force.tolist()}
        if s.torque is not None:
            item["torque"] = s.torque.tolist()
        samples.append(item)
    return json.dumps({"schema_version": SCHEMA_VERSION, "samples": samples}, indent=1)


def dataset_to_csv(data):
    lines = [",".join(CSV_COLUMNS)]
    for s in data:
        torque = ["", "", ""] if s.torque is None else [repr(float(v)) for v in s.torque]
        cells = [repr(float(v)) for v in s.flange_orientation.reshape(-1)]
        cells += [repr(float(v)) for v in s.force] + torque
        lines.append(",".join(cells))
    return "\r\n".join(lines) + "\r\n"


def save_dataset(data, path):
    """Write a dataset; ``.csv`` selects the CSV twin, anything else JSON."""
    text = dataset_to_csv(data) if _is_csv(path) else dataset_to_json(data)
    Path(path).write_text(text, encoding="utf-8", newline="")


def file_digest(path):
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def truth_to_dict(truth, scenario=None):
    doc = {
        "rotation": np.asarray(truth.rotation).reshape(-1).tolist(),
        "mass": float(truth.mass),
        "gravity": np.asarray(truth.gravity).tolist(),
        "gravity_scaled": np.asarray(truth.gravity_scaled).tolist(),
        "cog": np.asarray(truth.cog).tolist(),
    }
    if scenario is not None:
        doc["noise_std_force"] = scenario.noise_std_force
        doc["noise_std_torque"] = scenario.torque_noise
        doc["num_poses"] = scenario.num_poses
        doc["rng_seed"] = scenario.rng_seed
    return doc


def load_truth(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return CalibrationResult(
        rotation=np.array(doc["rotation"], dtype=float).reshape(3, 3),
        mass=float(doc["mass"]),
        gravity=np.array(doc["gravity"], dtype=float),
        cog=np.array(doc["cog"], dtype=float),
    )


def write_json(doc, path=None):
    """Dump ``doc`` as JSON (to ``path`` or returned as a string)."""
    text = json.dumps(doc, indent=2, allow_nan=True) + "\n"
    if path is None:
        return text
    Path(path).write_text(text, encoding="utf-8")
    return None


def read_report(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
