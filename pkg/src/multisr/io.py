"""JSON round-tripping for measures, illuminations and measurement sets.

Floats go through :mod:`json`, which writes ``repr`` and so reads back
bit-for-bit. Complex arrays are stored as separate ``_re`` / ``_im`` lists
(``amplitudes_re``, ``values_im``, ...).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .forward import FrequencyGrid, MeasurementSet
from .measure import (ConstantPattern, DiscreteMeasure, IlluminationSet, SinusoidPattern,
                      SpeckleGrid)

__all__ = [
    "complex_to_json",
    "complex_from_json",
    "measure_to_dict",
    "measure_from_dict",
    "illumination_to_dict",
    "illumination_from_dict",
    "measurements_to_dict",
    "measurements_from_dict",
    "read_matrix",
    "dump_json",
    "load_json",
]


def complex_to_json(a) -> dict:
    a = np.asarray(a, complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def complex_from_json(d) -> np.ndarray:
    if isinstance(d, dict):
        re = np.asarray(d["re"], float)
        im = np.asarray(d.get("im", np.zeros_like(re)), float)
        if re.shape != im.shape:
            raise DomainError("real and imaginary parts differ in shape")
        return re + 1j * im
    return np.asarray(d, complex)


def _split(prefix, a) -> dict:
    a = np.asarray(a, complex)
    return {f"{prefix}_re": a.real.tolist(), f"{prefix}_im": a.imag.tolist()}


def _joined(d, prefix):
    if f"{prefix}_re" in d:
        return complex_from_json({"re": d[f"{prefix}_re"], "im": d.get(f"{prefix}_im", np.zeros_like(
            np.asarray(d[f"{prefix}_re"], float)))})
    return complex_from_json(d[prefix])


def measure_to_dict(m: DiscreteMeasure) -> dict:
    return {"dim": m.dim, "locations": m.locations.tolist(), **_split("amplitudes", m.amplitudes)}


def measure_from_dict(d: dict) -> DiscreteMeasure:
    dim = int(d.get("dim", 1))
    loc = np.asarray(d["locations"], float).reshape((-1,) if dim == 1 else (-1, 2))
    return DiscreteMeasure(loc, _joined(d, "amplitudes"), dim)


def _pattern_to_dict(p) -> dict:
    if isinstance(p, ConstantPattern):
        return {"kind": "constant", "value": complex_to_json([p.value])}
    if isinstance(p, SinusoidPattern):
        return {"kind": "sinusoid", "wavevector": p.wavevector.tolist(), "phase": p.phase,
                "amplitude": p.amplitude, "real": p.real}
    if isinstance(p, SpeckleGrid):
        return {"kind": "speckle-grid", "grid": list(p.values.shape), **_split("values", p.values),
                "pitch": p.pitch, "origin": p.origin.tolist()}
    raise DomainError(f"cannot serialise pattern of type {type(p).__name__}")


def _pattern_from_dict(d: dict):
    kind = d["kind"]
    if kind == "constant":
        return ConstantPattern(complex_from_json(d["value"])[0])
    if kind == "sinusoid":
        return SinusoidPattern(d["wavevector"], d["phase"], d["amplitude"], d["real"])
    if kind == "speckle-grid":
        origin = d["origin"]
        values = _joined(d, "values")
        if "grid" in d:
            values = values.reshape(d["grid"])
        return SpeckleGrid(values, d["pitch"], origin if len(origin) > 1 else origin[0])
    raise DomainError(f"unknown pattern kind {kind!r}")


def illumination_to_dict(il: IlluminationSet) -> dict:
    return {"representation": il.representation, "patterns": [_pattern_to_dict(p) for p in il.patterns]}


def illumination_from_dict(d: dict) -> IlluminationSet:
    return IlluminationSet(tuple(_pattern_from_dict(p) for p in d["patterns"]))


def measurements_to_dict(ms: MeasurementSet) -> dict:
    g = ms.grid
    return {"omega": g.omega, "nodes": g.nodes.tolist(), "scheme": g.scheme, "grid_params": g.params,
            "frames": complex_to_json(ms.frames), "sigma": ms.sigma, "norm_mode": ms.norm_mode}


def measurements_from_dict(d: dict) -> MeasurementSet:
    g = FrequencyGrid(d["omega"], np.asarray(d["nodes"], float), d.get("scheme", "custom"),
                      dict(d.get("grid_params", {})))
    return MeasurementSet(g, complex_from_json(d["frames"]), d.get("sigma", 0.0), d.get("norm_mode", "rms"))


def read_matrix(obj) -> np.ndarray:
    """A complex matrix from ``[[...]]``, ``{"re": ..., "im": ...}`` or ``{"matrix": ...}``."""
    if isinstance(obj, dict) and "matrix" in obj:
        obj = obj["matrix"]
    A = np.atleast_2d(complex_from_json(obj))
    if A.ndim != 2:
        raise DomainError("expected a 2D matrix")
    return A


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dump_json(obj, path=None, indent: int = 2) -> str:
    text = json.dumps(obj, indent=indent, default=_default, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_json(path):
    return json.loads(Path(path).read_text())
