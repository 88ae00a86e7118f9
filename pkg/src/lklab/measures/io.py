"""JSON serialization of driving measures and entropy reports."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from ..errors import InvalidInputError
from .core import AtomicSlice, CircleDensity, DrivingMeasure, MeasureSlice

_NUM = {"type": "number"}

MEASURE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["T", "slices"],
    "additionalProperties": False,
    "properties": {
        "T": {"type": "number", "exclusiveMinimum": 0},
        "slices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["t0", "t1", "kind", "values"],
                        "additionalProperties": False,
                        "properties": {
                            "t0": _NUM,
                            "t1": _NUM,
                            "kind": {"const": "density"},
                            "mass": _NUM,
                            "values": {"type": "array", "minItems": 2, "items": {"type": "number", "minimum": 0}},
                        },
                    },
                    {
                        "type": "object",
                        "required": ["t0", "t1", "kind", "atoms"],
                        "additionalProperties": False,
                        "properties": {
                            "t0": _NUM,
                            "t1": _NUM,
                            "kind": {"const": "atoms"},
                            "atoms": {
                                "type": "array",
                                "minItems": 1,
                                "items": {
                                    "type": "array",
                                    "prefixItems": [_NUM, {"type": "number", "exclusiveMinimum": 0}],
                                    "minItems": 2,
                                    "maxItems": 2,
                                },
                            },
                        },
                    },
                ]
            },
        },
    },
}

_VALUE_OR_INF = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}, {"type": "null"}]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["total_entropy", "invariant_entropy", "energy", "per_slice", "pinsker", "becker_kappa"],
    "properties": {
        "total_entropy": _VALUE_OR_INF,
        "invariant_entropy": _VALUE_OR_INF,
        "energy": _VALUE_OR_INF,
        "pinsker": _VALUE_OR_INF,
        "becker_kappa": _VALUE_OR_INF,
        "becker_entropy_bound": _VALUE_OR_INF,
        "log_sobolev_bound": _VALUE_OR_INF,
        "per_slice": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t0", "t1", "mass", "entropy"],
                "properties": {
                    "t0": _NUM,
                    "t1": _NUM,
                    "mass": _NUM,
                    "entropy": _VALUE_OR_INF,
                    "energy": _VALUE_OR_INF,
                    "pinsker": _VALUE_OR_INF,
                },
            },
        },
    },
}


def encode_float(x):
    """JSON-safe float: infinities become the strings ``"inf"`` / ``"-inf"``."""
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise InvalidInputError("NaN cannot be serialized")
    return x


def decode_float(x):
    if isinstance(x, str):
        return float(x)
    return x


def measure_to_dict(mu: DrivingMeasure) -> dict:
    slices = []
    for s in mu.slices:
        if isinstance(s.content, AtomicSlice):
            atoms = [[float(a), float(w)] for a, w in zip(s.content.angles, s.content.weights)]
            slices.append({"t0": s.t0, "t1": s.t1, "kind": "atoms", "atoms": atoms})
        else:
            slices.append(
                {"t0": s.t0, "t1": s.t1, "kind": "density", "mass": s.mass, "values": s.content.values.tolist()}
            )
    return {"T": mu.T, "slices": slices}


def measure_from_dict(data: dict) -> DrivingMeasure:
    """Validate ``data`` against :data:`MEASURE_SCHEMA` and build the measure.

    Raises
    ------
    InvalidInputError
        On schema violations or inconsistent slices.
    """
    try:
        jsonschema.validate(data, MEASURE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidInputError(f"invalid driving-measure JSON: {exc.message}") from exc
    slices = []
    for s in data["slices"]:
        if s["kind"] == "density":
            slices.append(MeasureSlice(s["t0"], s["t1"], CircleDensity(s["values"]), s.get("mass")))
        else:
            ang = [a for a, _ in s["atoms"]]
            wts = [w for _, w in s["atoms"]]
            slices.append(MeasureSlice(s["t0"], s["t1"], AtomicSlice(ang, wts)))
    mu = DrivingMeasure(slices)
    if abs(mu.T - float(data["T"])) > 1e-12 * max(1.0, mu.T):
        raise InvalidInputError("declared T does not match the last slice")
    return mu


def dump_measure(mu: DrivingMeasure, path) -> None:
    data = measure_to_dict(mu)
    jsonschema.validate(data, MEASURE_SCHEMA)
    Path(path).write_text(json.dumps(data, separators=(",", ":")))


def load_measure(path) -> DrivingMeasure:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read measure file {path}: {exc}") from exc
    return measure_from_dict(data)


@dataclass
class EntropyReport:
    """Summary of the entropy-type functionals of a driving measure.

    ``pinsker`` is the time-integrated Pinsker lower bound (``None`` when a
    slice is not a probability density). ``log_sobolev_bound`` is ``2 S``.
    """

    total_entropy: float
    invariant_entropy: float
    energy: float
    per_slice: list = field(default_factory=list)
    pinsker: float | None = None
    becker_kappa: float | None = None
    becker_entropy_bound: float | None = None
    log_sobolev_bound: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("total_entropy", "invariant_entropy", "energy", "pinsker", "becker_kappa",
                  "becker_entropy_bound", "log_sobolev_bound"):
            d[k] = encode_float(d[k])
        d["per_slice"] = [{k: encode_float(v) for k, v in row.items()} for row in self.per_slice]
        jsonschema.validate(d, REPORT_SCHEMA)
        return d
