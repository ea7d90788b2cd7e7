"""Laser power accounting for a link-to-trunk assignment."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .ingest import ThermalProfile
from .oil import DeviceModels
from .placement import LinkAccess, TrunkPlan, trunk_crossings, trunk_thermal_integral
from .preprocess import OpticalNetlist


class AssignmentError(ValueError):
    """The assignment's derived flags disagree with its link choices."""


@dataclass
class Assignment:
    """Which trunk carries each link, plus the decoded activity flags.

    ``net_trunk`` holds the (net, trunk) pairs that use a channel,
    ``trunk_active`` the lit trunks and ``crossing_active`` the
    (horizontal, vertical) crossings with both trunks lit.
    """

    link_net: dict[int, int]
    link_trunk: dict[int, int | None]
    net_trunk: frozenset = frozenset()
    trunk_active: frozenset = frozenset()
    crossing_active: frozenset = frozenset()
    channels: dict[tuple[int, int], int] = field(default_factory=dict)

    @classmethod
    def from_links(cls, link_trunk: Mapping[int, int | None], onet: OpticalNetlist,
                   plan: TrunkPlan) -> "Assignment":
        link_net = {l.link_id: l.net_id for l in onet.links}
        lt = {l.link_id: link_trunk.get(l.link_id) for l in onet.links}
        net_trunk = frozenset((link_net[l], t) for l, t in lt.items() if t is not None)
        active = frozenset(t for _, t in net_trunk)
        crossings = frozenset((i, j) for i, j in trunk_crossings(plan)
                              if i in active and j in active)
        return cls(link_net, lt, net_trunk, active, crossings,
                   assign_channels(net_trunk))

    @classmethod
    def empty(cls, onet: OpticalNetlist) -> "Assignment":
        return cls({l.link_id: l.net_id for l in onet.links},
                   {l.link_id: None for l in onet.links})

    def assigned(self) -> list[tuple[int, int]]:
        return sorted((l, t) for l, t in self.link_trunk.items() if t is not None)

    def unassigned(self) -> list[int]:
        return sorted(l for l, t in self.link_trunk.items() if t is None)

    def nets_on(self, trunk_id: int) -> list[int]:
        return sorted(n for n, t in self.net_trunk if t == trunk_id)


def assign_channels(net_trunk) -> dict[tuple[int, int], int]:
    """Wavelength index per (net, trunk): ascending net id within each trunk."""
    out = {}
    by_trunk: dict[int, list[int]] = {}
    for n, t in net_trunk:
        by_trunk.setdefault(t, []).append(n)
    for t, nets in by_trunk.items():
        for k, n in enumerate(sorted(nets)):
            out[(n, t)] = k
    return out


@dataclass(frozen=True)
class PowerReport:
    p_cross: float = 0.0
    p_trunk_thm: float = 0.0
    p_ring_thm: float = 0.0
    p_path: float = 0.0
    p_dynamic: float = 0.0
    p_total: float = 0.0
    trunk_count: int = 0
    channel_count: int = 0
    avg_channels_per_trunk: float = 0.0
    total_trunk_length_mm: float = 0.0

    @property
    def p_loss(self) -> float:
        return self.p_cross + self.p_trunk_thm + self.p_ring_thm + self.p_path


def validate_assignment(a: Assignment, plan: TrunkPlan) -> None:
    """Raise AssignmentError unless the flags follow from the link choices."""
    n_trunks = len(plan.trunks)
    for l, t in a.link_trunk.items():
        if t is not None and not 0 <= t < n_trunks:
            raise AssignmentError(f"link {l} mapped to unknown trunk {t}")
    want_nt = {(a.link_net[l], t) for l, t in a.link_trunk.items() if t is not None}
    if set(a.net_trunk) != want_nt:
        raise AssignmentError("net/trunk channel flags disagree with link assignment")
    want_active = {t for _, t in want_nt}
    if set(a.trunk_active) != want_active:
        raise AssignmentError("trunk activity flags disagree with channel flags")
    want_x = {(i, j) for i, j in trunk_crossings(plan)
              if i in want_active and j in want_active}
    if set(a.crossing_active) != want_x:
        raise AssignmentError("crossing flags disagree with trunk activity")
    if set(a.channels) != want_nt:
        raise AssignmentError("channel indices must cover exactly the active (net, trunk) pairs")
    for t in want_active:
        cap = plan.trunks[t].capacity
        idx = [a.channels[(n, tt)] for n, tt in want_nt if tt == t]
        if len(idx) > cap:
            raise AssignmentError(f"trunk {t} carries {len(idx)} nets > capacity {cap}")
        if len(set(idx)) != len(idx) or any(not 0 <= k < cap for k in idx):
            raise AssignmentError(f"trunk {t} has clashing or out-of-range channel indices")


def compute_power(a: Assignment, plan: TrunkPlan, accesses: Mapping[tuple[int, int], LinkAccess],
                  thermal: ThermalProfile, models: DeviceModels) -> PowerReport:
    validate_assignment(a, plan)
    active = sorted(a.trunk_active)
    p_cross = sum((models.p_cross_unit for i, j in trunk_crossings(plan)
                   if i in a.trunk_active and j in a.trunk_active), 0.0)
    p_trunk_thm = sum((models.k_trunk_thm * trunk_thermal_integral(plan.trunks[t], thermal)
                       for t in active), 0.0)
    pairs = a.assigned()
    p_ring = sum((accesses[(l, t)].p_ring for l, t in pairs), 0.0)
    p_path = sum((accesses[(l, t)].p_path for l, t in pairs), 0.0)
    p_dynamic = len(a.net_trunk) * models.p_channel + len(active) * models.p_trunk_base
    p_total = p_cross + p_trunk_thm + p_ring + p_path + p_dynamic
    n_tr = len(active)
    n_ch = len(a.net_trunk)
    return PowerReport(
        p_cross=p_cross,
        p_trunk_thm=p_trunk_thm,
        p_ring_thm=p_ring,
        p_path=p_path,
        p_dynamic=p_dynamic,
        p_total=p_total,
        trunk_count=n_tr,
        channel_count=n_ch,
        avg_channels_per_trunk=n_ch / n_tr if n_tr else 0.0,
        total_trunk_length_mm=sum(plan.trunks[t].length for t in active),
    )


class RoutingError(RuntimeError):
    """No legal assignment was found; ``links`` names the stranded links."""

    def __init__(self, message: str, links=()):
        super().__init__(message)
        self.links = list(links)


@dataclass
class RouteResult:
    assignment: Assignment
    report: PowerReport
    plan: TrunkPlan
    accesses: dict
    revisions: int = 0
    status: str = "ok"
    objective: float | None = None
