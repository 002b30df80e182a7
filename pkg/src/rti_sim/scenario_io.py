"""Strict JSON scenario files.

Top level::

    {"alpha"?, "energy_tol"?, "amplitude_tau"?, "max_ticks", "seed",
     "channels": [{"id", "label", "re", "im"}],
     "emitters": [{"id", "levels", "allowed", "matrix_elements", "initial_level"}],
     "absorbers": [{"id", "channel", "levels", "allowed", "initial_level",
                    "matrix_elements"?, "active_from"?}],
     "detectors"?: [{"id", "channel", "n", "gap"}]}

``matrix_elements`` keys are ``"from-to"`` strings. Detector ``n`` may be an
integer or a decimal string such as ``"1e23"``. Unknown keys are errors.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .amplitudes import parse_count
from .engine import Scenario
from .errors import NormalizationError, ScenarioError, SchemaError
from .substratum import AbsorberState, BoundStateSpec, Channel, DetectorSpec, EmitterState

_TOP_REQUIRED = {"max_ticks", "seed", "channels", "emitters", "absorbers"}
_TOP_OPTIONAL = {"alpha", "energy_tol", "amplitude_tau", "detectors"}
_CHANNEL = ({"id", "label", "re", "im"}, set())
_EMITTER = ({"id", "levels", "allowed", "matrix_elements", "initial_level"}, set())
_ABSORBER = ({"id", "channel", "levels", "allowed", "initial_level"}, {"matrix_elements", "active_from"})
_DETECTOR = ({"id", "channel", "n", "gap"}, set())


def _keys(obj: Any, path: str, required: set, optional: set) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    for k in obj:
        if k not in required and k not in optional:
            raise SchemaError(f"{path}.{k}", "unknown key")
    for k in sorted(required):
        if k not in obj:
            raise SchemaError(f"{path}.{k}", "missing required key")
    return obj


def _num(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SchemaError(path, "expected a finite number")
    return float(v)


def _int(v: Any, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(path, "expected an integer")
    return v


def _str(v: Any, path: str) -> str:
    if not isinstance(v, str) or not v:
        raise SchemaError(path, "expected a non-empty string")
    return v


def _list(v: Any, path: str) -> list:
    if not isinstance(v, list):
        raise SchemaError(path, "expected an array")
    return v


def _pairs(v: Any, path: str) -> list[tuple[int, int]]:
    out = []
    for k, item in enumerate(_list(v, path)):
        if not isinstance(item, list) or len(item) != 2:
            raise SchemaError(f"{path}[{k}]", "expected a [from, to] pair")
        out.append((_int(item[0], f"{path}[{k}][0]"), _int(item[1], f"{path}[{k}][1]")))
    return out


def _elements(v: Any, path: str) -> dict[tuple[int, int], float]:
    if not isinstance(v, dict):
        raise SchemaError(path, "expected an object of \"from-to\": number")
    out = {}
    for key, val in v.items():
        a, sep, b = key.partition("-")
        if not sep or not a.isdigit() or not b.isdigit():
            raise SchemaError(f"{path}.{key}", "key must look like \"from-to\"")
        out[(int(a), int(b))] = _num(val, f"{path}.{key}")
    return out


def _spec(obj: dict, path: str, default_element: float | None) -> BoundStateSpec:
    levels = [_num(e, f"{path}.levels[{k}]") for k, e in enumerate(_list(obj["levels"], f"{path}.levels"))]
    allowed = _pairs(obj["allowed"], f"{path}.allowed")
    elements = _elements(obj["matrix_elements"], f"{path}.matrix_elements") if "matrix_elements" in obj else {}
    try:
        return BoundStateSpec.from_energies(levels, allowed, elements, default_element)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def scenario_from_dict(doc: Any) -> Scenario:
    _keys(doc, "$", _TOP_REQUIRED, _TOP_OPTIONAL)
    channels = []
    for k, c in enumerate(_list(doc["channels"], "$.channels")):
        p = f"$.channels[{k}]"
        _keys(c, p, *_CHANNEL)
        amp = complex(_num(c["re"], f"{p}.re"), _num(c["im"], f"{p}.im"))
        channels.append(Channel(_str(c["id"], f"{p}.id"), _str(c["label"], f"{p}.label"), amp))
    if not channels:
        raise SchemaError("$.channels", "at least one channel is required")
    if all(ch.amplitude == 0 for ch in channels):
        raise NormalizationError("all channel amplitudes are zero")

    emitters = []
    for k, e in enumerate(_list(doc["emitters"], "$.emitters")):
        p = f"$.emitters[{k}]"
        _keys(e, p, *_EMITTER)
        spec = _spec(e, p, None)
        try:
            emitters.append(EmitterState(_str(e["id"], f"{p}.id"), spec, _int(e["initial_level"], f"{p}.initial_level")))
        except ValueError as exc:
            raise SchemaError(f"{p}.initial_level", str(exc)) from None

    absorbers = []
    for k, a in enumerate(_list(doc["absorbers"], "$.absorbers")):
        p = f"$.absorbers[{k}]"
        _keys(a, p, *_ABSORBER)
        spec = _spec(a, p, 1.0)
        active = _int(a.get("active_from", 1), f"{p}.active_from")
        try:
            absorbers.append(
                AbsorberState(
                    _str(a["id"], f"{p}.id"),
                    spec,
                    _int(a["initial_level"], f"{p}.initial_level"),
                    _str(a["channel"], f"{p}.channel"),
                    active,
                )
            )
        except ValueError as exc:
            raise SchemaError(f"{p}.initial_level", str(exc)) from None

    detectors = []
    for k, d in enumerate(_list(doc.get("detectors", []), "$.detectors")):
        p = f"$.detectors[{k}]"
        _keys(d, p, *_DETECTOR)
        raw_n = d["n"]
        if isinstance(raw_n, bool) or not isinstance(raw_n, (int, str)):
            raise SchemaError(f"{p}.n", "expected an integer or a decimal string")
        try:
            n = parse_count(raw_n)
            detectors.append(DetectorSpec(_str(d["id"], f"{p}.id"), _str(d["channel"], f"{p}.channel"), n, _num(d["gap"], f"{p}.gap")))
        except ValueError as exc:
            raise SchemaError(p, str(exc)) from None

    kwargs: dict[str, Any] = {
        "max_ticks": _int(doc["max_ticks"], "$.max_ticks"),
        "seed": _int(doc["seed"], "$.seed"),
    }
    for key in ("alpha", "energy_tol", "amplitude_tau"):
        if key in doc:
            kwargs[key] = _num(doc[key], f"$.{key}")
    try:
        return Scenario(tuple(emitters), tuple(absorbers), tuple(detectors), tuple(channels), **kwargs)
    except ScenarioError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("$", str(exc)) from None


def parse_scenario(data: bytes | str) -> Scenario:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError("$", f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    return scenario_from_dict(doc)


def _spec_dict(spec: BoundStateSpec) -> dict:
    pairs = sorted(spec.allowed)
    return {
        "levels": [lvl.energy for lvl in spec.levels],
        "allowed": [list(p) for p in pairs],
        "matrix_elements": {f"{i}-{j}": spec.matrix_elements[(i, j)] for i, j in pairs},
    }


def scenario_to_dict(sc: Scenario) -> dict:
    doc: dict[str, Any] = {
        "alpha": sc.alpha,
        "energy_tol": sc.energy_tol,
        "max_ticks": sc.max_ticks,
        "seed": sc.seed,
        "channels": [{"id": c.id, "label": c.label, "re": c.amplitude.real, "im": c.amplitude.imag} for c in sc.channels],
        "emitters": [{"id": e.id, **_spec_dict(e.spec), "initial_level": e.current_level} for e in sc.emitters],
        "absorbers": [
            {"id": a.id, "channel": a.channel, **_spec_dict(a.spec), "initial_level": a.current_level, "active_from": a.active_from}
            for a in sc.absorbers
        ],
    }
    if sc.amplitude_tau is not None:
        doc["amplitude_tau"] = sc.amplitude_tau
    if sc.detectors:
        doc["detectors"] = [
            {"id": d.id, "channel": d.channel, "n": d.n if d.n < 2**53 else str(d.n), "gap": d.gap}
            for d in sc.detectors
        ]
    return doc


def serialize_scenario(sc: Scenario) -> bytes:
    return (json.dumps(scenario_to_dict(sc), indent=2) + "\n").encode()
