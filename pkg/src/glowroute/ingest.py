"""Text formats: netlists, thermal grids, configuration and reports.

Netlist::

    chip <W> <H>
    net <id> <npins> <driver_index>
    pin <x> <y>            (npins times)

Thermal grid (row 0 is the bottom row, y in [0, tile))::

    grid <cols> <rows> <tile_mm>
    <v00> <v01> ...        (rows lines of cols values, degC)

Config: ``key = value`` lines, ``#`` starts a comment.

Blank lines and ``#`` comments are accepted in every format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from .oil import DeviceModels, ModelError


class ParseError(ValueError):
    """Malformed input. ``line`` and ``column`` are 1-based (0 if unknown)."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")

    def locus(self) -> dict:
        return {"source": self.source, "line": self.line, "column": self.column}


@dataclass(frozen=True)
class Net:
    id: int
    driver: int
    pins: tuple[tuple[float, float], ...]

    @property
    def driver_pin(self) -> tuple[float, float]:
        return self.pins[self.driver]


@dataclass(frozen=True)
class Netlist:
    width: float
    height: float
    nets: tuple[Net, ...]

    @property
    def pin_count(self) -> int:
        return sum(len(n.pins) for n in self.nets)


@dataclass(frozen=True, eq=False)
class ThermalProfile:
    """Uniform square tiles of |dT| (degC); ``grid[row, col]``."""

    grid: np.ndarray
    tile: float

    @property
    def rows(self) -> int:
        return self.grid.shape[0]

    @property
    def cols(self) -> int:
        return self.grid.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ThermalProfile):
            return NotImplemented
        return self.tile == other.tile and np.array_equal(self.grid, other.grid)

    def tile_index(self, x: float, y: float) -> tuple[int, int]:
        col = min(max(int(math.floor(x / self.tile)), 0), self.cols - 1)
        row = min(max(int(math.floor(y / self.tile)), 0), self.rows - 1)
        return row, col

    def at(self, x: float, y: float) -> float:
        row, col = self.tile_index(x, y)
        return float(self.grid[row, col])

    def covers(self, width: float, height: float) -> bool:
        eps = 1e-9 * max(width, height, 1.0)
        return self.cols * self.tile >= width - eps and self.rows * self.tile >= height - eps

    @classmethod
    def zeros(cls, width: float, height: float, tile: float = 1.0) -> "ThermalProfile":
        cols = max(1, int(math.ceil(width / tile - 1e-9)))
        rows = max(1, int(math.ceil(height / tile - 1e-9)))
        return cls(np.zeros((rows, cols)), tile)


@dataclass(frozen=True)
class Config:
    models: DeviceModels = field(default_factory=DeviceModels)
    c_max: int = 32
    max_placement_revisions: int = 8
    seed: int = 0
    min_ring_pitch: float = 0.04   # mm, modulator footprint

    def __post_init__(self):
        if self.c_max < 1:
            raise ValueError("c_max must be >= 1")
        if self.max_placement_revisions < 0:
            raise ValueError("max_placement_revisions must be >= 0")
        if self.min_ring_pitch < 0:
            raise ValueError("min_ring_pitch must be >= 0")


_MODEL_KEYS = {f.name for f in fields(DeviceModels)}
_CONFIG_INT_KEYS = {"c_max", "max_placement_revisions", "seed"}
_CONFIG_FLOAT_KEYS = {"min_ring_pitch"}


def _lines(text: str):
    """Yield (lineno, tokens, raw_line) for non-blank, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = body.split()
        if toks:
            yield lineno, toks, raw


def _column(raw: str, toks: list[str], i: int) -> int:
    pos = 0
    for k in range(i + 1):
        pos = raw.index(toks[k], pos)
        if k < i:
            pos += len(toks[k])
    return pos + 1


def _num(raw, toks, i, lineno, kind=float, source=""):
    try:
        v = kind(toks[i])
    except (ValueError, IndexError):
        col = _column(raw, toks, i) if i < len(toks) else len(raw) + 1
        what = toks[i] if i < len(toks) else "<missing>"
        raise ParseError(f"expected {kind.__name__}, got {what!r}", lineno, col, source)
    if kind is float and not math.isfinite(v):
        raise ParseError(f"non-finite value {toks[i]!r}", lineno, _column(raw, toks, i), source)
    return v


def parse_netlist(text: str, source: str = "") -> Netlist:
    it = _lines(text)
    try:
        lineno, toks, raw = next(it)
    except StopIteration:
        raise ParseError("empty netlist", 0, 0, source)
    if toks[0] != "chip" or len(toks) != 3:
        raise ParseError("first line must be 'chip <W> <H>'", lineno, 1, source)
    width = _num(raw, toks, 1, lineno, source=source)
    height = _num(raw, toks, 2, lineno, source=source)
    if width <= 0 or height <= 0:
        raise ParseError("chip dimensions must be positive", lineno, 1, source)

    nets: list[Net] = []
    seen: set[int] = set()
    cur = None   # (id, npins, driver, pins, lineno)
    for lineno, toks, raw in it:
        head = toks[0]
        if head == "net":
            if cur is not None and len(cur[3]) < cur[1]:
                raise ParseError(f"net {cur[0]} declares {cur[1]} pins, found {len(cur[3])}",
                                 lineno, 1, source)
            if len(toks) != 4:
                raise ParseError("expected 'net <id> <npins> <driver_index>'", lineno, 1, source)
            nid = _num(raw, toks, 1, lineno, int, source)
            npins = _num(raw, toks, 2, lineno, int, source)
            drv = _num(raw, toks, 3, lineno, int, source)
            if nid in seen:
                raise ParseError(f"duplicate net id {nid}", lineno, _column(raw, toks, 1), source)
            if npins < 2:
                raise ParseError("a net needs at least 2 pins", lineno, _column(raw, toks, 2), source)
            if not 0 <= drv < npins:
                raise ParseError(f"driver index {drv} outside [0, {npins})", lineno,
                                 _column(raw, toks, 3), source)
            seen.add(nid)
            cur = (nid, npins, drv, [], lineno)
            nets.append(cur)
        elif head == "pin":
            if cur is None:
                raise ParseError("pin before any net", lineno, 1, source)
            if len(cur[3]) >= cur[1]:
                raise ParseError(f"net {cur[0]} has more than {cur[1]} pins", lineno, 1, source)
            if len(toks) != 3:
                raise ParseError("expected 'pin <x> <y>'", lineno, 1, source)
            x = _num(raw, toks, 1, lineno, source=source)
            y = _num(raw, toks, 2, lineno, source=source)
            if not 0 <= x <= width:
                raise ParseError(f"pin x={x} outside chip [0, {width}]", lineno,
                                 _column(raw, toks, 1), source)
            if not 0 <= y <= height:
                raise ParseError(f"pin y={y} outside chip [0, {height}]", lineno,
                                 _column(raw, toks, 2), source)
            cur[3].append((x, y))
        else:
            raise ParseError(f"unknown record {head!r}", lineno, 1, source)
    if cur is not None and len(cur[3]) < cur[1]:
        raise ParseError(f"net {cur[0]} declares {cur[1]} pins, found {len(cur[3])}",
                         cur[4], 1, source)
    return Netlist(width, height, tuple(Net(n[0], n[2], tuple(n[3])) for n in nets))


def write_netlist(netlist: Netlist) -> str:
    out = [f"chip {netlist.width!r} {netlist.height!r}"]
    for net in netlist.nets:
        out.append(f"net {net.id} {len(net.pins)} {net.driver}")
        out.extend(f"pin {x!r} {y!r}" for x, y in net.pins)
    return "\n".join(out) + "\n"


def parse_thermal(text: str, source: str = "") -> ThermalProfile:
    it = _lines(text)
    try:
        lineno, toks, raw = next(it)
    except StopIteration:
        raise ParseError("empty thermal file", 0, 0, source)
    if toks[0] != "grid" or len(toks) != 4:
        raise ParseError("first line must be 'grid <cols> <rows> <tile_mm>'", lineno, 1, source)
    cols = _num(raw, toks, 1, lineno, int, source)
    rows = _num(raw, toks, 2, lineno, int, source)
    tile = _num(raw, toks, 3, lineno, source=source)
    if cols < 1 or rows < 1 or tile <= 0:
        raise ParseError("grid needs cols, rows >= 1 and tile > 0", lineno, 1, source)
    data = []
    for lineno, toks, raw in it:
        if len(data) == rows:
            raise ParseError(f"more than {rows} grid rows", lineno, 1, source)
        if len(toks) != cols:
            raise ParseError(f"row has {len(toks)} values, expected {cols}", lineno, 1, source)
        row = []
        for i in range(cols):
            v = _num(raw, toks, i, lineno, source=source)
            if v < 0:
                raise ParseError(f"negative temperature variation {v}", lineno,
                                 _column(raw, toks, i), source)
            row.append(v)
        data.append(row)
    if len(data) != rows:
        raise ParseError(f"expected {rows} grid rows, found {len(data)}", 0, 0, source)
    grid = np.array(data, dtype=float)
    grid.setflags(write=False)
    return ThermalProfile(grid, tile)


def write_thermal(profile: ThermalProfile, digits: int | None = None) -> str:
    fmt = repr if digits is None else (lambda v: f"{v:.{digits}f}")
    out = [f"grid {profile.cols} {profile.rows} {profile.tile!r}"]
    for row in profile.grid:
        out.append(" ".join(fmt(float(v)) for v in row))
    return "\n".join(out) + "\n"


def parse_config(text: str, source: str = "") -> Config:
    model_kw: dict[str, float] = {}
    cfg_kw: dict[str, Any] = {}
    for lineno, toks, raw in _lines(text):
        body = raw.split("#", 1)[0]
        if "=" not in body:
            raise ParseError("expected 'key = value'", lineno, 1, source)
        key, value = (s.strip() for s in body.split("=", 1))
        col = raw.index(key) + 1 if key else 1
        vcol = raw.index("=") + 2
        if key in model_kw or key in cfg_kw:
            raise ParseError(f"duplicate key {key!r}", lineno, col, source)
        if key in _MODEL_KEYS or key in _CONFIG_FLOAT_KEYS:
            kind = float
        elif key in _CONFIG_INT_KEYS:
            kind = int
        else:
            raise ParseError(f"unknown config key {key!r}", lineno, col, source)
        try:
            v = kind(value)
        except ValueError:
            raise ParseError(f"bad {kind.__name__} value {value!r} for {key}", lineno, vcol, source)
        if kind is float and not math.isfinite(v):
            raise ParseError(f"non-finite value for {key}", lineno, vcol, source)
        (model_kw if key in _MODEL_KEYS else cfg_kw)[key] = v
    try:
        return Config(models=DeviceModels(**model_kw), **cfg_kw)
    except (ModelError, ValueError) as exc:
        raise ParseError(str(exc), 0, 0, source) from exc


def write_config(cfg: Config) -> str:
    out = [f"{f.name} = {getattr(cfg.models, f.name)!r}" for f in fields(DeviceModels)]
    out += [f"{name} = {getattr(cfg, name)!r}"
            for name in ("c_max", "max_placement_revisions", "seed", "min_ring_pitch")]
    return "\n".join(out) + "\n"


REPORT_KEYS = ("trunks", "channels", "avg_channels_per_trunk", "total_trunk_length_mm")
POWER_KEYS = ("p_cross", "p_trunk_thm", "p_ring_thm", "p_path", "p_dynamic", "p_total")


def write_report(report, extra: dict | None = None) -> str:
    """Serialise a PowerReport as JSON with a fixed key order.

    ``extra`` entries are appended after the fixed keys.
    """
    doc = {
        "trunks": report.trunk_count,
        "channels": report.channel_count,
        "avg_channels_per_trunk": report.avg_channels_per_trunk,
        "total_trunk_length_mm": report.total_trunk_length_mm,
        "power": {k: getattr(report, k) for k in POWER_KEYS},
    }
    if extra:
        for k, v in extra.items():
            if k in doc:
                raise ValueError(f"extra key {k!r} clashes with a report field")
            doc[k] = v
    return json.dumps(doc, indent=2) + "\n"


def parse_report(text: str, source: str = ""):
    from .power import PowerReport

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from exc
    try:
        power = doc["power"]
        return PowerReport(
            trunk_count=int(doc["trunks"]),
            channel_count=int(doc["channels"]),
            avg_channels_per_trunk=float(doc["avg_channels_per_trunk"]),
            total_trunk_length_mm=float(doc["total_trunk_length_mm"]),
            **{k: float(power[k]) for k in POWER_KEYS},
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing report field {exc}", 0, 0, source) from exc


def with_models(cfg: Config, **changes) -> Config:
    """Copy of ``cfg`` with some DeviceModels fields replaced."""
    return replace(cfg, models=replace(cfg.models, **changes))
