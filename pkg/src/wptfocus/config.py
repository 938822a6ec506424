"""JSON scenario files.

Every file starts from a bundled preset (``hallway-3p8`` unless named)
and overrides any top-level field::

    {"preset": "hallway-3p8", "tx_power_w": 1000.0}

``reflectors`` replaces the preset's reflector list as a whole.  All
lengths are meters, frequency Hz, power W.  A ``null`` half-width leaves
that reflector direction unbounded.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import replace
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import ConfigError
from .geometry import PRESETS, POLARIZATIONS, Reflector, Scenario, Ura

ENV_SCENARIO = "WPT_SCENARIO_PATH"
DEFAULT_PRESET = "hallway-3p8"

_vec = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": sorted(PRESETS)},
        "name": {"type": "string"},
        "frequency_hz": {"type": "number", "exclusiveMinimum": 0},
        "tx_power_w": {"type": "number", "exclusiveMinimum": 0},
        "polarization": {"enum": list(POLARIZATIONS)},
        "rx_aperture_m2": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "element_exponent": {"type": "number", "minimum": 0},
        "device_m": _vec,
        "array": {
            "type": "object",
            "additionalProperties": False,
            "required": ["nx", "ny"],
            "properties": {
                "center_m": _vec,
                "axis_u": _vec,
                "axis_v": _vec,
                "nx": {"type": "integer", "minimum": 1},
                "ny": {"type": "integer", "minimum": 1},
                "spacing_m": {"type": "number", "exclusiveMinimum": 0},
                "spacing_wavelengths": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "reflectors": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["index", "anchor_m", "normal"],
                "properties": {
                    "index": {"type": "integer", "minimum": 2},
                    "name": {"type": "string"},
                    "anchor_m": _vec,
                    "normal": _vec,
                    "eps_r": {"type": "number", "exclusiveMinimum": 1},
                    "attenuation_db": {"type": "number", "minimum": 0},
                    "polarization": {"enum": list(POLARIZATIONS) + [None]},
                    "extent_axes": {"type": "array", "items": _vec, "minItems": 2, "maxItems": 2},
                    "half_widths_m": {
                        "type": "array",
                        "items": {"type": ["number", "null"]},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
            },
        },
    },
}


def _array_from(doc: dict, base: Optional[Ura]) -> Ura:
    kw = {}
    if base is not None:
        kw = dict(center=base.center, axis_u=base.axis_u, axis_v=base.axis_v,
                  spacing=base.spacing, spacing_in_wavelengths=base.spacing_in_wavelengths)
    if "spacing_m" in doc and "spacing_wavelengths" in doc:
        raise ConfigError("give either spacing_m or spacing_wavelengths, not both")
    if "spacing_m" in doc:
        kw.update(spacing=doc["spacing_m"], spacing_in_wavelengths=False)
    elif "spacing_wavelengths" in doc:
        kw.update(spacing=doc["spacing_wavelengths"], spacing_in_wavelengths=True)
    elif base is None:
        kw.update(spacing=0.75, spacing_in_wavelengths=True)
    kw.setdefault("center", (0.0, 0.0, 0.0))
    kw.setdefault("axis_u", (0.0, 1.0, 0.0))
    kw.setdefault("axis_v", (0.0, 0.0, 1.0))
    for key, field_ in (("center_m", "center"), ("axis_u", "axis_u"), ("axis_v", "axis_v")):
        if key in doc:
            kw[field_] = doc[key]
    return Ura(nx=doc["nx"], ny=doc["ny"], **kw)


def _reflector_from(doc: dict) -> Reflector:
    axes = doc.get("extent_axes")
    hw = doc.get("half_widths_m")
    if (axes is None) != (hw is None):
        raise ConfigError("extent_axes and half_widths_m must be given together")
    if hw is not None:
        hw = tuple(math.inf if h is None else h for h in hw)
    return Reflector(
        index=doc["index"],
        anchor=doc["anchor_m"],
        normal=doc["normal"],
        eps_r=doc.get("eps_r", 5.0),
        attenuation_db=doc.get("attenuation_db", 0.0),
        extent_axes=None if axes is None else tuple(axes),
        half_widths=hw,
        polarization=doc.get("polarization"),
        name=doc.get("name", ""),
    )


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid scenario: {exc.message}") from None
    try:
        base = PRESETS[doc.get("preset", DEFAULT_PRESET)]()
        if "array" in doc:
            base = replace(base, array=_array_from(doc["array"], base.array))
        updates = {}
        simple = {
            "frequency_hz": "frequency",
            "tx_power_w": "tx_power",
            "polarization": "polarization",
            "rx_aperture_m2": "rx_aperture",
            "element_exponent": "element_exponent",
            "device_m": "device",
            "name": "name",
        }
        for key, attr in simple.items():
            if key in doc:
                updates[attr] = doc[key]
        if "reflectors" in doc:
            updates["reflectors"] = tuple(_reflector_from(r) for r in doc["reflectors"])
        return replace(base, **updates)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from None


def scenario_to_dict(sc: Scenario) -> dict:
    a = sc.array
    arr = {
        "center_m": a.center.tolist(),
        "axis_u": a.axis_u.tolist(),
        "axis_v": a.axis_v.tolist(),
        "nx": a.nx,
        "ny": a.ny,
    }
    arr["spacing_wavelengths" if a.spacing_in_wavelengths else "spacing_m"] = a.spacing
    refl = []
    for r in sc.reflectors:
        d = {
            "index": r.index,
            "name": r.name,
            "anchor_m": r.anchor.tolist(),
            "normal": r.normal.tolist(),
            "eps_r": r.eps_r,
            "attenuation_db": r.attenuation_db,
            "polarization": r.polarization,
        }
        if r.extent_axes is not None:
            d["extent_axes"] = [ax.tolist() for ax in r.extent_axes]
            d["half_widths_m"] = [None if math.isinf(h) else h for h in r.half_widths]
        refl.append(d)
    return {
        "name": sc.name,
        "frequency_hz": sc.frequency,
        "tx_power_w": sc.tx_power,
        "polarization": sc.polarization,
        "rx_aperture_m2": sc.rx_aperture,
        "element_exponent": sc.element_exponent,
        "device_m": sc.device.tolist(),
        "array": arr,
        "reflectors": refl,
    }


def load_scenario(path: Optional[str] = None, preset: Optional[str] = None) -> Scenario:
    """Load a scenario file, falling back to ``$WPT_SCENARIO_PATH`` then to a preset."""
    path = path or os.environ.get(ENV_SCENARIO) or None
    if path is None:
        name = preset or DEFAULT_PRESET
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        return PRESETS[name]()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("scenario file must contain a JSON object")
    if preset is not None:
        doc.setdefault("preset", preset)
    return scenario_from_dict(doc)
