"""Parsing of unit-suffixed quantities such as ``"200 keV"`` or ``"2 nm"``.

Values convert to the internal units (eV, nm, fs, rad/fs, Debye, rad).
"""

from __future__ import annotations

import math
import re

from .physical import DEBYE, HBAR

_SCALES = {
    "energy": {"ev": 1.0, "mev": 1e-3, "kev": 1e3, "gev": 1e9},
    "length": {"nm": 1.0, "pm": 1e-3, "a": 0.1, "angstrom": 0.1, "um": 1e3, "µm": 1e3,
               "mm": 1e6, "cm": 1e7, "m": 1e9},
    "time": {"fs": 1.0, "as": 1e-3, "ps": 1e3, "ns": 1e6, "s": 1e15},
    "angular_frequency": {"rad/fs": 1.0, "rad/s": 1e-15, "rad/ps": 1e-3},
    "dipole": {"d": 1.0, "debye": 1.0, "e*nm": 1.0 / DEBYE, "e nm": 1.0 / DEBYE},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
}
# MeV would clash with meV under case folding; keep the SI spelling distinct
_CASE_SENSITIVE = {"energy": {"MeV": 1e6, "meV": 1e-3}}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATTERN = re.compile(rf"^\s*({_NUMBER})\s*([^\s].*?)?\s*$")


class UnitError(ValueError):
    """Quantity string is malformed or carries the wrong unit."""


def parse_quantity(value, kind: str, field: str = "value") -> float:
    """Convert ``value`` (e.g. ``"2 eV"``) to internal units of ``kind``.

    Bare numbers are rejected for dimensional kinds: every quantity carries
    its unit. Energies may also be given as ``"... rad/fs"`` for angular
    frequency fields and vice versa (``E = hbar omega``).
    """
    if kind not in _SCALES:
        raise KeyError(kind)
    if isinstance(value, bool) or not isinstance(value, str):
        raise UnitError(f"{field}: expected a string with a unit, got {value!r}")
    m = _PATTERN.match(value)
    if not m or m.group(2) is None:
        raise UnitError(f"{field}: cannot parse {value!r}; write e.g. '2 eV'")
    number = float(m.group(1))
    unit = m.group(2).strip()
    scale = _lookup(kind, unit)
    if scale is not None:
        return number * scale
    # energy <-> angular frequency through hbar
    if kind == "angular_frequency":
        e = _lookup("energy", unit)
        if e is not None:
            return number * e / HBAR
    if kind == "energy":
        w = _lookup("angular_frequency", unit)
        if w is not None:
            return number * w * HBAR
    raise UnitError(f"{field}: unit {unit!r} is not a valid {kind.replace('_', ' ')} unit")


def _lookup(kind: str, unit: str):
    special = _CASE_SENSITIVE.get(kind, {})
    if unit in special:
        return special[unit]
    return _SCALES[kind].get(unit.lower())


def format_quantity(value: float, unit: str) -> str:
    return f"{value!r} {unit}"
