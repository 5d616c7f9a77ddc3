"""JSON wire formats: matrices, channels, and report payloads.

JSON is the single source of truth for reports (schema_version tags every
payload); CSV tables are derived and never parsed back.
"""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from .channels import KrausChannel
from .linops import InvariantViolation

SCHEMA_VERSION = "1"


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "real": [[float(x) for x in row] for row in m.real],
        "imag": [[float(x) for x in row] for row in m.imag],
    }


def matrix_from_json(obj) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    real = np.array(obj["real"], dtype=float)
    imag = np.array(obj["imag"], dtype=float)
    if real.shape != (rows, cols) or imag.shape != (rows, cols):
        raise InvariantViolation("matrix JSON shape mismatch")
    return real + 1j * imag


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "name": ch.name,
        "d_in": ch.d_in,
        "d_out": ch.d_out,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(obj) -> KrausChannel:
    ops = [matrix_from_json(k) for k in obj["kraus"]]
    return KrausChannel(tuple(ops), int(obj["d_in"]), int(obj["d_out"]), obj.get("name", ""))


def save_channel(ch: KrausChannel, path):
    with open(path, "w") as fh:
        json.dump(channel_to_json(ch), fh, indent=2, sort_keys=True)


def load_channel(path) -> KrausChannel:
    with open(path) as fh:
        obj = json.load(fh)
    ch = channel_from_json(obj)
    ch.require_cptp()
    return ch


def to_jsonable(obj):
    """Recursively convert reports (dataclasses, arrays, complex) to JSON."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return float(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, KrausChannel):
        return channel_to_json(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return repr(obj)
