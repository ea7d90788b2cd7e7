"""End-to-end synthesis: pre-routing, global routing, post-routing."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .cat import cat_route
from .glow import glow_route
from .ingest import Config, Netlist, ParseError, ThermalProfile
from .oil import critical_length
from .placement import TrunkPlan, compute_accesses, place_trunks
from .postroute import legalize
from .power import Assignment, PowerReport, RouteResult, compute_power
from .preprocess import OpticalNetlist, build_optical_netlist

log = logging.getLogger(__name__)

ALGORITHMS = ("cat", "glow")


@dataclass
class FlowResult:
    algo: str
    l_crit: float
    onet: OpticalNetlist
    residual: list[int]
    plan: TrunkPlan
    assignment: Assignment
    accesses: dict
    report: PowerReport
    route: RouteResult | None = None
    pre_legal_report: PowerReport | None = None
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        """Fields appended to the JSON report after the fixed metrics."""
        chans = self.assignment.channels
        rows = [{"link": l, "net": self.assignment.link_net[l], "trunk": t,
                 "channel": chans[(self.assignment.link_net[l], t)]}
                for l, t in self.assignment.assigned()]
        trunks = [{"id": t.id, "orientation": t.orientation, "coord": t.coord,
                   "span": [t.lo, t.hi], "active": t.id in self.assignment.trunk_active}
                  for t in self.plan.trunks]
        return {
            "algorithm": self.algo,
            "status": self.route.status if self.route else "empty",
            "l_crit_mm": self.l_crit,
            "optical_nets": len(self.onet.nets),
            "links": len(self.onet.links),
            "residual_nets": len(self.residual),
            "placement_revisions": self.route.revisions if self.route else 0,
            "trunk_plan": trunks,
            "assignment": rows,
        }


def prepare(netlist: Netlist, thermal: ThermalProfile, cfg: Config):
    """Optical netlist, initial trunk plan and access table (plan is None if no links)."""
    if not thermal.covers(netlist.width, netlist.height):
        raise ParseError(
            f"thermal grid {thermal.cols}x{thermal.rows} of {thermal.tile} mm tiles does not "
            f"cover the {netlist.width}x{netlist.height} mm chip")
    l_crit = critical_length(cfg.models)
    onet, residual = build_optical_netlist(netlist, l_crit)
    log.info("L_crit %.4g mm: %d optical nets, %d links, %d residual nets",
             l_crit, len(onet.nets), len(onet.links), len(residual))
    if not onet.links:
        return l_crit, onet, residual, None, {}
    plan = place_trunks(onet, thermal, cfg)
    accesses = compute_accesses(plan, onet, thermal, cfg.models)
    return l_crit, onet, residual, plan, accesses


def route_prepared(algo, l_crit, onet, residual, plan, accesses, thermal, cfg,
                   time_limit=None) -> FlowResult:
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    if plan is None:
        empty_plan = TrunkPlan(onet.width, onet.height, ())
        a = Assignment.empty(onet)
        return FlowResult(algo, l_crit, onet, residual, empty_plan, a, {}, PowerReport())
    if algo == "cat":
        res = cat_route(plan, onet, accesses, cfg, thermal)
    else:
        res = glow_route(plan, onet, accesses, cfg, thermal, time_limit)
    return finish(algo, l_crit, onet, residual, res, thermal, cfg)


def finish(algo, l_crit, onet, residual, res: RouteResult, thermal, cfg) -> FlowResult:
    a, acc = legalize(res.assignment, res.accesses, res.plan, cfg.models, onet, thermal,
                      cfg.min_ring_pitch)
    report = compute_power(a, res.plan, acc, thermal, cfg.models)
    return FlowResult(algo, l_crit, onet, residual, res.plan, a, acc, report, res,
                      res.report)


def route_design(netlist: Netlist, thermal: ThermalProfile, cfg: Config, algo: str = "glow",
                 time_limit: float | None = None) -> FlowResult:
    l_crit, onet, residual, plan, accesses = prepare(netlist, thermal, cfg)
    return route_prepared(algo, l_crit, onet, residual, plan, accesses, thermal, cfg,
                          time_limit)
