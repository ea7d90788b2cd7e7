"""WDM trunk placement and link-to-trunk access geometry.

Trunks are placed in rounds that alternate direction (horizontal first).
Round ``r`` cuts the chip into ``2 ** (r // 2)`` equal slabs stacked across
the trunk direction (horizontal bands for horizontal trunks); each slab that
holds net medians gets one trunk at the median of those medians, running the
full chip extent. A trunk that would cross a thermally blocked tile moves to
the nearest clear tile row/column inside its slab, or is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

from .ingest import Config, ThermalProfile
from .oil import DeviceModels, loss_to_power, path_loss_db, ring_thermal_penalty
from .preprocess import Link, OpticalNetlist, Point, geometric_median, manhattan

H = "H"
V = "V"
MAX_ROUNDS = 20
TIMING_RTOL = 1e-12


class PlacementError(RuntimeError):
    pass


@dataclass(frozen=True)
class Trunk:
    id: int
    orientation: str     # "H" runs along x at y=coord, "V" along y at x=coord
    coord: float
    lo: float
    hi: float
    capacity: int
    round: int = 0

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def point(self, along: float) -> Point:
        return (along, self.coord) if self.orientation == H else (self.coord, along)

    def along(self, p: Point) -> float:
        return p[0] if self.orientation == H else p[1]

    def across(self, p: Point) -> float:
        return p[1] if self.orientation == H else p[0]

    def project(self, p: Point) -> float:
        return min(max(self.along(p), self.lo), self.hi)


@dataclass(frozen=True)
class TrunkPlan:
    width: float
    height: float
    trunks: tuple[Trunk, ...]
    next_round: int = 0
    next_slab: int = 0

    def __post_init__(self):
        for k, t in enumerate(self.trunks):
            if t.id != k:
                raise ValueError(f"trunk ids must be 0..n-1 in order, got {t.id} at {k}")
            if t.orientation not in (H, V) or t.hi < t.lo:
                raise ValueError(f"malformed trunk {t}")

    @property
    def capacity(self) -> int:
        return sum(t.capacity for t in self.trunks)

    def trunk(self, trunk_id: int) -> Trunk:
        return self.trunks[trunk_id]

    @property
    def horizontal(self) -> list[Trunk]:
        return [t for t in self.trunks if t.orientation == H]

    @property
    def vertical(self) -> list[Trunk]:
        return [t for t in self.trunks if t.orientation == V]


def _blocked_cells(trunk_orient: str, lo: float, hi: float, thermal: ThermalProfile,
                   width: float, height: float) -> tuple[int, list[int]]:
    """(index of the across-axis line to test, along-axis tile indices covered)."""
    extent = width if trunk_orient == H else height
    n_along = thermal.cols if trunk_orient == H else thermal.rows
    t = thermal.tile
    first = min(max(int(math.floor(lo / t)), 0), n_along - 1)
    last = min(max(int(math.ceil(min(hi, extent) / t)) - 1, first), n_along - 1)
    return first, list(range(first, last + 1))


def _line_blocked(orient: str, line: int, cells: list[int], thermal: ThermalProfile,
                  threshold: float) -> bool:
    g = thermal.grid
    if orient == H:
        return bool((g[line, cells] > threshold).any())
    return bool((g[cells, line] > threshold).any())


def clear_coordinate(orient: str, coord: float, lo: float, hi: float,
                     thermal: ThermalProfile, threshold: float,
                     width: float, height: float,
                     window: tuple[float, float] | None = None) -> float | None:
    """``coord`` if the trunk line is clear, else the nearest clear tile centre.

    ``lo``/``hi`` is the trunk span; candidate coordinates are restricted to
    ``window`` when given. Returns None when every candidate line is blocked.
    """
    _, cells = _blocked_cells(orient, lo, hi, thermal, width, height)
    extent = height if orient == H else width
    n_lines = thermal.rows if orient == H else thermal.cols
    t = thermal.tile
    n_lines = min(n_lines, max(1, int(math.ceil(extent / t - 1e-9))))
    line = min(max(int(math.floor(coord / t)), 0), n_lines - 1)
    if not _line_blocked(orient, line, cells, thermal, threshold):
        return coord
    best = None
    for k in range(n_lines):
        if _line_blocked(orient, k, cells, thermal, threshold):
            continue
        c = min((k + 0.5) * t, (k * t + extent) / 2.0)
        if window is not None and not window[0] <= c <= window[1]:
            continue
        key = (abs(c - coord), c)
        if best is None or key < best[0]:
            best = (key, c)
    return None if best is None else best[1]


def _net_medians(onet: OpticalNetlist) -> list[Point]:
    return [geometric_median([n.driver.position] + [s.position for s in n.sinks])
            for n in onet.nets]


def _slab_trunk(plan: TrunkPlan, rnd: int, slab: int, medians: list[Point],
                thermal: ThermalProfile, cfg: Config) -> Trunk | None:
    orient = H if rnd % 2 == 0 else V
    n_slabs = 2 ** (rnd // 2)
    across = plan.height if orient == H else plan.width
    span = plan.width if orient == H else plan.height
    lo = across * slab / n_slabs
    hi = across * (slab + 1) / n_slabs
    ax = 1 if orient == H else 0
    last = slab == n_slabs - 1
    inside = [m for m in medians if lo <= m[ax] < hi or (last and m[ax] == hi)]
    if not inside:
        return None
    coord = geometric_median(inside)[ax]
    coord = clear_coordinate(orient, coord, 0.0, span, thermal, cfg.models.temp_threshold,
                             plan.width, plan.height, window=(lo, hi))
    if coord is None:
        return None
    return Trunk(len(plan.trunks), orient, coord, 0.0, span, cfg.c_max, rnd)


def _advance(plan: TrunkPlan) -> tuple[int, int]:
    n_slabs = 2 ** (plan.next_round // 2)
    if plan.next_slab + 1 < n_slabs:
        return plan.next_round, plan.next_slab + 1
    return plan.next_round + 1, 0


def _step(plan, medians, thermal, cfg) -> TrunkPlan:
    trunk = _slab_trunk(plan, plan.next_round, plan.next_slab, medians, thermal, cfg)
    rnd, slab = _advance(plan)
    trunks = plan.trunks + ((trunk,) if trunk is not None else ())
    return replace(plan, trunks=trunks, next_round=rnd, next_slab=slab)


def place_trunks(onet: OpticalNetlist, thermal: ThermalProfile, cfg: Config) -> TrunkPlan:
    """Initial placement: add trunks until total capacity covers every link."""
    if not onet.links:
        raise PlacementError("optical netlist has no links")
    medians = _net_medians(onet)
    plan = TrunkPlan(onet.width, onet.height, ())
    need = len(onet.links)
    while plan.capacity < need:
        if plan.next_round >= MAX_ROUNDS:
            break
        plan = _step(plan, medians, thermal, cfg)
    if not plan.trunks:
        raise PlacementError(f"no placeable trunk after {MAX_ROUNDS} rounds")
    if plan.capacity < need:
        raise PlacementError(
            f"capacity {plan.capacity} < {need} links after {MAX_ROUNDS} rounds")
    return plan


def extend_plan(plan: TrunkPlan, onet: OpticalNetlist, thermal: ThermalProfile,
                cfg: Config) -> TrunkPlan:
    """Revision step: finish the current placement round (or run the next one).

    Keeps going round by round until at least one trunk is added.
    """
    medians = _net_medians(onet)
    before = len(plan.trunks)
    while plan.next_round < MAX_ROUNDS:
        rnd = plan.next_round
        while plan.next_round == rnd:
            plan = _step(plan, medians, thermal, cfg)
        if len(plan.trunks) > before:
            return plan
    raise PlacementError("placement schedule exhausted; no further trunk can be added")


def trunk_thermal_integral(trunk: Trunk, thermal: ThermalProfile) -> float:
    """Line integral of |dT| along the trunk (degC * mm), tile by tile."""
    if trunk.hi <= trunk.lo:
        return 0.0
    t = thermal.tile
    n_along = thermal.cols if trunk.orientation == H else thermal.rows
    n_across = thermal.rows if trunk.orientation == H else thermal.cols
    line = min(max(int(math.floor(trunk.coord / t)), 0), n_across - 1)
    total = 0.0
    k = min(int(math.floor(trunk.lo / t)), n_along - 1)
    pos = trunk.lo
    while pos < trunk.hi:
        end = trunk.hi if k == n_along - 1 else min((k + 1) * t, trunk.hi)
        val = thermal.grid[line, k] if trunk.orientation == H else thermal.grid[k, line]
        total += float(val) * (end - pos)
        pos = end
        k += 1
    return total


def trunk_crossings(plan: TrunkPlan) -> list[tuple[int, int]]:
    """(horizontal id, vertical id) pairs that physically cross."""
    out = []
    for h in plan.horizontal:
        for v in plan.vertical:
            if v.lo <= h.coord <= v.hi and h.lo <= v.coord <= h.hi:
                out.append((h.id, v.id))
    return out


@dataclass(frozen=True)
class LinkAccess:
    link_id: int
    trunk_id: int
    wl_e: float
    wl_o: float
    mod_pos: Point
    det_pos: Point
    t_var: float
    delay: float          # ps through the hybrid path
    delay_budget: float   # ps of the Cu HPWL baseline
    timing_ok: bool
    thermal_ok: bool
    detection_ok: bool
    p_path: float
    p_ring: float

    @property
    def feasible(self) -> bool:
        return self.timing_ok and self.thermal_ok and self.detection_ok

    @property
    def cost(self) -> float:
        return self.p_path + self.p_ring


def timing_holds(delay: float, budget: float) -> bool:
    return delay <= budget + TIMING_RTOL * max(1.0, abs(budget))


def access_at(link: Link, trunk: Trunk, mod_along: float, det_along: float,
              thermal: ThermalProfile, models: DeviceModels) -> LinkAccess:
    """Access record with the converters at given positions along ``trunk``."""
    mod = trunk.point(mod_along)
    det = trunk.point(det_along)
    wl_e = manhattan(link.driver_pos, mod) + manhattan(link.sink_pos, det)
    wl_o = abs(det_along - mod_along)
    t_var = max(thermal.at(*mod), thermal.at(*det))
    delay = models.tau_e * wl_e + models.tau_o * wl_o + models.tau_conv
    budget = models.tau_e * link.hpwl
    ring_ok, p_one = ring_thermal_penalty(t_var, models)
    p_path = loss_to_power(path_loss_db(wl_o, models), models)
    return LinkAccess(
        link_id=link.link_id,
        trunk_id=trunk.id,
        wl_e=wl_e,
        wl_o=wl_o,
        mod_pos=mod,
        det_pos=det,
        t_var=t_var,
        delay=delay,
        delay_budget=budget,
        timing_ok=timing_holds(delay, budget),
        thermal_ok=t_var <= models.temp_threshold and ring_ok,
        detection_ok=models.p_det_sense + p_path <= models.p_laser_max,
        p_path=p_path,
        p_ring=2.0 * p_one,
    )


def link_access(link: Link, trunk: Trunk, thermal: ThermalProfile,
                models: DeviceModels) -> LinkAccess:
    """Shortest access: each pin drops perpendicular onto the trunk, clamped to its span."""
    return access_at(link, trunk, trunk.project(link.driver_pos),
                     trunk.project(link.sink_pos), thermal, models)


def compute_accesses(plan: TrunkPlan, onet: OpticalNetlist, thermal: ThermalProfile,
                     models: DeviceModels,
                     trunks: Iterable[Trunk] | None = None) -> dict[tuple[int, int], LinkAccess]:
    trunks = plan.trunks if trunks is None else trunks
    return {(l.link_id, t.id): link_access(l, t, thermal, models)
            for t in trunks for l in onet.links}
