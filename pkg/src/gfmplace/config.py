"""YAML input files: network description, converter parameters and case lists.

Every mapping read from a file remembers its source line so that validation
errors can point at the offending record.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .converters import GfmParams, PllParams
from .netmodel import Bus, Line, NetworkError, NetworkSpec

LINE_KEY = "__line__"


class ConfigError(ValueError):
    def __init__(self, path, line, message):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = loader.construct_mapping(node, deep=deep)
    mapping[LINE_KEY] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_yaml(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(path, None, f"cannot read file ({exc.strerror})") from None
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(path, mark.line + 1 if mark else None, f"YAML syntax error: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(path, None, "top level must be a mapping")
    return data


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def fixture_path(name: str) -> Path:
    """Path of a bundled data file (e.g. ``two_area.yaml``)."""
    return Path(str(resources.files("gfmplace") / "data" / name))


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if k != LINE_KEY}


def _num(path, rec, key, positive=True):
    try:
        v = float(rec[key])
    except KeyError:
        raise ConfigError(path, rec.get(LINE_KEY), f"missing field {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigError(path, rec.get(LINE_KEY), f"field {key!r} is not a number") from None
    if not np.isfinite(v) or (positive and v <= 0):
        raise ConfigError(path, rec.get(LINE_KEY), f"field {key!r} must be a positive number")
    return v


def load_network(path) -> NetworkSpec:
    """Network file: ``buses`` (id, kind, optional capacity) and ``lines`` (from, to, and x or b)."""
    data = load_yaml(path)
    buses, lines, caps = [], [], {}
    for key in ("buses", "lines"):
        if not isinstance(data.get(key), list):
            raise ConfigError(path, data.get(LINE_KEY), f"missing list {key!r}")
    for rec in data["buses"]:
        if not isinstance(rec, dict) or "id" not in rec or "kind" not in rec:
            raise ConfigError(path, getattr(rec, "get", lambda *_: None)(LINE_KEY), "bus record needs 'id' and 'kind'")
        buses.append(Bus(rec["id"], rec["kind"]))
        if "capacity" in rec:
            if rec["kind"] != "converter":
                raise ConfigError(path, rec[LINE_KEY], "capacity is only allowed on converter buses")
            caps[rec["id"]] = _num(path, rec, "capacity")
        elif rec["kind"] == "converter":
            caps[rec["id"]] = 1.0
    for rec in data["lines"]:
        if not isinstance(rec, dict) or "from" not in rec or "to" not in rec:
            raise ConfigError(path, getattr(rec, "get", lambda *_: None)(LINE_KEY), "line record needs 'from' and 'to'")
        if ("x" in rec) == ("b" in rec):
            raise ConfigError(path, rec[LINE_KEY], "line record needs exactly one of 'x' (reactance) or 'b' (susceptance)")
        b = 1.0 / _num(path, rec, "x") if "x" in rec else _num(path, rec, "b")
        lines.append(Line(rec["from"], rec["to"], b))
    kw = {}
    if "omega0" in data:
        kw["omega0"] = _num(path, data, "omega0")
    elif "f0" in data:
        kw["omega0"] = 2 * np.pi * _num(path, data, "f0")
    tau = _num(path, data, "tau", positive=False) if "tau" in data else 0.0
    try:
        return NetworkSpec(tuple(buses), tuple(lines), tau=tau, capacities=caps,
                           name=str(data.get("name", Path(path).stem)), **kw)
    except NetworkError as exc:
        raise ConfigError(path, _locate(data, str(exc)), str(exc)) from None


def _locate(data, message):
    """Best-effort source line for a network validation message."""
    for rec in data.get("lines", []) + data.get("buses", []):
        if not isinstance(rec, dict):
            continue
        ids = [repr(rec.get(k)) for k in ("from", "to", "id") if k in rec]
        if ids and all(i in message for i in ids):
            return rec.get(LINE_KEY)
    return None


def _params(path, cls, rec):
    if not isinstance(rec, dict):
        raise ConfigError(path, None, f"missing section for {cls.kind} parameters")
    names = {f.name for f in fields(cls)}
    extra = set(_clean(rec)) - names
    if extra:
        raise ConfigError(path, rec[LINE_KEY], f"unknown {cls.kind} parameter(s): {', '.join(sorted(extra))}")
    try:
        vals = {}
        for k, v in _clean(rec).items():
            vals[k] = tuple(float(x) for x in v) if isinstance(v, list) else float(v)
        return cls(**vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, rec[LINE_KEY], f"invalid {cls.kind} parameters: {exc}") from None


@dataclass(frozen=True)
class CaseSpec:
    name: str
    gfm_nodes: tuple = ()


@dataclass(frozen=True)
class SimSettings:
    t_end: float = 3.0
    magnitude: float = 0.3
    t_start: float = 0.2
    duration: float = 0.02


@dataclass(frozen=True)
class ConverterConfig:
    pll: PllParams
    gfm: GfmParams | None
    grid_voltage: complex = 1.0
    cases: tuple = field(default=())
    simulation: SimSettings = field(default_factory=SimSettings)


def _cases(path, recs):
    out = []
    if recs is None:
        return ()
    if not isinstance(recs, list):
        raise ConfigError(path, None, "'cases' must be a list")
    for rec in recs:
        if not isinstance(rec, dict) or "name" not in rec:
            raise ConfigError(path, getattr(rec, "get", lambda *_: None)(LINE_KEY), "case record needs a 'name'")
        nodes = rec.get("gfm_nodes", []) or []
        if not isinstance(nodes, list):
            raise ConfigError(path, rec[LINE_KEY], "'gfm_nodes' must be a list")
        out.append(CaseSpec(str(rec["name"]), tuple(nodes)))
    return tuple(out)


def load_converters(path) -> ConverterConfig:
    data = load_yaml(path)
    pll = _params(path, PllParams, data.get("pll"))
    gfm = _params(path, GfmParams, data["gfm"]) if data.get("gfm") is not None else None
    v = data.get("grid_voltage", 1.0)
    try:
        v = complex(*v) if isinstance(v, list) else complex(v)
    except (TypeError, ValueError):
        raise ConfigError(path, data.get(LINE_KEY), "grid_voltage must be a number or [re, im]") from None
    sim = data.get("simulation") or {}
    try:
        sim = SimSettings(**{k: float(x) for k, x in _clean(sim).items()})
    except TypeError as exc:
        raise ConfigError(path, sim.get(LINE_KEY), f"invalid simulation settings: {exc}") from None
    return ConverterConfig(pll, gfm, v, _cases(path, data.get("cases")), sim)


def load_cases(path) -> tuple:
    """Stand-alone case manifest: a file with a top-level ``cases`` list."""
    return _cases(path, load_yaml(path).get("cases"))
