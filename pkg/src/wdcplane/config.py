"""TOML model files.

A model file has a ``[model]`` table with ``kind`` one of ``isolated``,
``degenerate``, ``complement`` or ``raw``.  Rationals are written as
strings (``"1/2"``) or plain numbers, angles in degrees::

    [model]
    kind = "complement"
    center = [0, 0]
    rho = "1/2"

    [[sectors]]
    theta_deg = 90
    omega = "1"
    profile = { xs = ["-1", "0", "1"], ys = ["2", "0", "2"] }

Degenerate models use a ``[degenerate]`` table with ``theta_deg``,
``omega``, ``upper`` and ``lower`` profiles on ``[0, omega]``.  Raw models
list ``points`` and ``segments`` directly.  Sector radii default to ``rho``.
An optional ``[run]`` table supplies command defaults.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dc1 import DCFun1, as_fraction, dc_from_pl
from .geometry import CompactSetModel
from .sectors import (
    BasicOpenSector,
    DegenerateClosedSector,
    PRZLocalModel,
    build_local_set,
    validate_model,
)


class ConfigError(Exception):
    """Malformed or incomplete configuration (exit code 3)."""


class ModelError(Exception):
    """Well-formed configuration describing an invalid set (exit code 4)."""


@dataclass(frozen=True)
class LoadedModel:
    compact: CompactSetModel
    local: Optional[PRZLocalModel] = None
    run: dict = field(default_factory=dict)


def _rational(value, what: str) -> Fraction:
    try:
        return as_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"{what}: not a rational: {value!r}") from exc


def _point(value, what: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{what}: expected a pair [x, y]")
    return tuple(float(_rational(c, what)) for c in value)


def _require(table: dict, key: str, where: str):
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected a table")
    if key not in table:
        raise ConfigError(f"{where}: missing key {key!r}")
    return table[key]


def _profile(table, where: str) -> DCFun1:
    xs = _require(table, "xs", where)
    ys = _require(table, "ys", where)
    if not isinstance(xs, list) or not isinstance(ys, list) or len(xs) != len(ys) or not xs:
        raise ConfigError(f"{where}: xs and ys must be nonempty lists of equal length")
    xs = [_rational(x, where) for x in xs]
    ys = [_rational(y, where) for y in ys]
    try:
        return dc_from_pl(xs, ys)
    except ValueError as exc:
        raise ModelError(f"{where}: {exc}") from exc


def _theta(table, where: str) -> float:
    return math.radians(float(_rational(table.get("theta_deg", 0), where + ".theta_deg")))


def parse_model(doc: dict) -> LoadedModel:
    model = _require(doc, "model", "file")
    kind = _require(model, "kind", "model")
    run = doc.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("run: expected a table")
    if kind == "raw":
        pts = [_point(p, "model.points") for p in model.get("points", [])]
        segs = []
        for s in model.get("segments", []):
            if not isinstance(s, list) or len(s) != 2:
                raise ConfigError("model.segments: expected [[x, y], [x, y]] entries")
            segs.append((_point(s[0], "model.segments"), _point(s[1], "model.segments")))
        try:
            return LoadedModel(CompactSetModel(points=pts, segments=segs, label=model.get("label", "raw")),
                               None, run)
        except ValueError as exc:
            raise ModelError(str(exc)) from exc
    if kind not in ("isolated", "degenerate", "complement"):
        raise ConfigError(f"model.kind: unknown kind {kind!r}")
    center = _point(model.get("center", [0, 0]), "model.center")
    rho = _rational(_require(model, "rho", "model"), "model.rho")
    if rho <= 0:
        raise ModelError("model.rho must be positive")
    degenerate, sectors = None, []
    if kind == "degenerate":
        t = _require(doc, "degenerate", "file")
        degenerate = DegenerateClosedSector(
            _theta(t, "degenerate"),
            _rational(t.get("radius", rho), "degenerate.radius"),
            _rational(_require(t, "omega", "degenerate"), "degenerate.omega"),
            _profile(_require(t, "upper", "degenerate"), "degenerate.upper"),
            _profile(_require(t, "lower", "degenerate"), "degenerate.lower"))
    elif kind == "complement":
        entries = _require(doc, "sectors", "file")
        if not isinstance(entries, list) or not entries:
            raise ConfigError("sectors: expected a nonempty array of tables")
        for i, t in enumerate(entries):
            where = f"sectors[{i}]"
            sectors.append(BasicOpenSector(
                _theta(t, where),
                _rational(t.get("radius", rho), where + ".radius"),
                _rational(_require(t, "omega", where), where + ".omega"),
                _profile(_require(t, "profile", where), where + ".profile")))
    local = PRZLocalModel(center, rho, kind, degenerate, tuple(sectors))
    problems = validate_model(local)
    if problems:
        raise ModelError("; ".join(problems))
    shrink = float(_rational(model.get("shrink", "1/1000"), "model.shrink"))
    try:
        compact = build_local_set(local, shrink)
    except ValueError as exc:
        raise ModelError(str(exc)) from exc
    return LoadedModel(compact, local, run)


def load_model(path) -> LoadedModel:
    try:
        with open(Path(path), "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_model(doc)


def parse_eps_list(text: str) -> list[Fraction]:
    try:
        out = [as_fraction(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"eps list: {exc}") from exc
    if not out or any(e <= 0 for e in out):
        raise ConfigError("eps list must hold positive rationals")
    return out
