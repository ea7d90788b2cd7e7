"""Exact minimum-power routing as an integer linear program.

Variables (1 = assigned / active):

* ``S_l_t``   link ``l`` rides trunk ``t`` (only for pairs meeting timing,
  thermal and detection limits, which are constant per pair)
* ``SUM_n_t`` number of links of net ``n`` on trunk ``t``
* ``LAM_n_t`` net ``n`` owns a channel on trunk ``t``
* ``W_t``     trunk ``t`` is lit
* ``W_i_j``   crossing trunks ``i`` (horizontal) and ``j`` (vertical) are both lit
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

from .ilp import IlpModel, SolveResult, solve
from .ingest import Config, ThermalProfile
from .oil import DeviceModels
from .placement import (PlacementError, TrunkPlan, compute_accesses, extend_plan,
                        trunk_crossings, trunk_thermal_integral)
from .power import (Assignment, RouteResult, RoutingError, assign_channels,
                    compute_power)
from .preprocess import OpticalNetlist

log = logging.getLogger(__name__)

POWER_RTOL = 1e-9


class InfeasibleLinkError(RoutingError):
    """Some link has no trunk that meets its timing, thermal and detection limits."""


class SolverTimeout(RoutingError):
    def __init__(self, message, result: RouteResult | None = None):
        super().__init__(message)
        self.result = result


def _tag(v: int) -> str:
    return str(v).replace("-", "m")


@dataclass
class GlowModel:
    model: IlpModel
    s: dict[tuple[int, int], int] = field(default_factory=dict)
    sum: dict[tuple[int, int], int] = field(default_factory=dict)
    lam: dict[tuple[int, int], int] = field(default_factory=dict)
    w: dict[int, int] = field(default_factory=dict)
    wx: dict[tuple[int, int], int] = field(default_factory=dict)
    pin_max: int = 0


def build_ilp(plan: TrunkPlan, onet: OpticalNetlist, accesses: dict, models: DeviceModels,
              thermal: ThermalProfile, tighten: bool = True) -> GlowModel:
    """Encode the routing problem on ``plan``.

    With ``tighten`` the rows ``S <= LAM`` and ``LAM <= W`` are added. They
    hold at every integer point of the base formulation, so the optimum is
    unchanged, but they make the LP relaxation far tighter.
    """
    m = IlpModel("glow")
    g = GlowModel(m, pin_max=onet.pin_max)
    link_net = {l.link_id: l.net_id for l in onet.links}

    dead = [l.link_id for l in onet.links
            if not any(accesses[(l.link_id, t.id)].feasible for t in plan.trunks)]
    if dead:
        raise InfeasibleLinkError(
            f"link(s) {dead} have no trunk meeting timing/thermal/detection limits", dead)

    for l in onet.links:
        for t in plan.trunks:
            acc = accesses[(l.link_id, t.id)]
            if acc.feasible:
                i = m.add_var(f"S_{l.link_id}_{t.id}")
                g.s[(l.link_id, t.id)] = i
                m.add_objective(i, acc.p_ring + acc.p_path)

    pairs = sorted({(link_net[l], t) for l, t in g.s})
    for n, t in pairs:
        g.sum[(n, t)] = m.add_var(f"SUM_{_tag(n)}_{t}", 0, g.pin_max)
    for n, t in pairs:
        g.lam[(n, t)] = i = m.add_var(f"LAM_{_tag(n)}_{t}")
        m.add_objective(i, models.p_channel)
    for t in plan.trunks:
        g.w[t.id] = i = m.add_var(f"W_{t.id}")
        m.add_objective(i, models.p_trunk_base
                        + models.k_trunk_thm * trunk_thermal_integral(t, thermal))
    for hi, vj in trunk_crossings(plan):
        g.wx[(hi, vj)] = i = m.add_var(f"W_{hi}_{vj}")
        m.add_objective(i, models.p_cross_unit)

    by_link = defaultdict(list)
    by_pair = defaultdict(list)
    for (l, t), i in g.s.items():
        by_link[l].append(i)
        by_pair[(link_net[l], t)].append(i)
    lam_by_trunk = defaultdict(list)
    for (n, t), i in g.lam.items():
        lam_by_trunk[t].append(i)

    for l in onet.links:
        m.add_constraint({i: 1 for i in by_link[l.link_id]}, "=", 1, f"sel_{l.link_id}")
    for t in plan.trunks:
        if lam_by_trunk[t.id]:
            m.add_constraint({i: 1 for i in lam_by_trunk[t.id]}, "<=", t.capacity,
                             f"cap_{t.id}")
    for (n, t), si in g.sum.items():
        row = {si: 1.0}
        for i in by_pair[(n, t)]:
            row[i] = -1.0
        m.add_constraint(row, "=", 0, f"sum_{_tag(n)}_{t}")
    for (n, t), li in g.lam.items():
        si = g.sum[(n, t)]
        m.add_constraint({si: 2, li: -2 * g.pin_max}, "<=", 1, f"lamlo_{_tag(n)}_{t}")
        m.add_constraint({li: 1, si: -2}, "<=", 0, f"lamhi_{_tag(n)}_{t}")
    for t in plan.trunks:
        wi = g.w[t.id]
        lams = lam_by_trunk[t.id]
        lo = {i: 2.0 for i in lams}
        lo[wi] = -2.0 * t.capacity
        m.add_constraint(lo, "<=", 1, f"wlo_{t.id}")
        hi = {i: -2.0 for i in lams}
        hi[wi] = 1.0
        m.add_constraint(hi, "<=", 0, f"whi_{t.id}")
    for (a, b), xi in g.wx.items():
        m.add_constraint({xi: 2, g.w[a]: -1, g.w[b]: -1}, "<=", 0, f"xlo_{a}_{b}")
        m.add_constraint({g.w[a]: 1, g.w[b]: 1, xi: -1}, "<=", 1, f"xhi_{a}_{b}")

    if tighten:
        for (l, t), i in g.s.items():
            m.add_constraint({i: 1, g.lam[(link_net[l], t)]: -1}, "<=", 0, f"slam_{l}_{t}")
        for (n, t), i in g.lam.items():
            m.add_constraint({i: 1, g.w[t]: -1}, "<=", 0, f"lamw_{_tag(n)}_{t}")
    return g


def decode(g: GlowModel, values, onet: OpticalNetlist) -> Assignment:
    link_trunk: dict[int, int | None] = {l.link_id: None for l in onet.links}
    for (l, t), i in g.s.items():
        if values[i] == 1:
            link_trunk[l] = t
    net_trunk = frozenset(p for p, i in g.lam.items() if values[i] == 1)
    return Assignment(
        link_net={l.link_id: l.net_id for l in onet.links},
        link_trunk=link_trunk,
        net_trunk=net_trunk,
        trunk_active=frozenset(t for t, i in g.w.items() if values[i] == 1),
        crossing_active=frozenset(p for p, i in g.wx.items() if values[i] == 1),
        channels=assign_channels(net_trunk),
    )


def _check_objective(objective: float, p_total: float) -> None:
    if abs(objective - p_total) > POWER_RTOL * max(1.0, abs(p_total)):
        raise AssertionError(f"ILP objective {objective!r} != evaluated power {p_total!r}")


def glow_route(plan: TrunkPlan, onet: OpticalNetlist, accesses: dict, cfg: Config,
               thermal: ThermalProfile, time_limit: float | None = None,
               tighten: bool = True) -> RouteResult:
    """Solve, and on infeasibility add a placement round and try again."""
    accesses = dict(accesses)
    revisions = 0
    while True:
        reason = None
        try:
            g = build_ilp(plan, onet, accesses, cfg.models, thermal, tighten)
        except InfeasibleLinkError as exc:
            reason, stranded = str(exc), exc.links
        else:
            res: SolveResult = solve(g.model, time_limit)
            log.info("GLOW: %d vars, %d rows, status %s after %d nodes (%.2fs)",
                     len(g.model.variables), len(g.model.constraints), res.status,
                     res.nodes, res.elapsed)
            if res.status in ("optimal", "timeout") and res.values is not None:
                a = decode(g, res.values, onet)
                report = compute_power(a, plan, accesses, thermal, cfg.models)
                _check_objective(res.objective, report.p_total)
                out = RouteResult(a, report, plan, accesses, revisions, res.status,
                                  res.objective)
                if res.status == "timeout":
                    raise SolverTimeout(
                        f"ILP time limit hit; incumbent p_total={report.p_total:.6g} mW, "
                        f"bound {res.bound:.6g}", out)
                return out
            if res.status == "timeout":
                raise SolverTimeout("ILP time limit hit before any feasible assignment")
            reason, stranded = "ILP infeasible on current trunk plan", []
        if revisions >= cfg.max_placement_revisions:
            raise RoutingError(f"{reason} after {revisions} placement revision(s)", stranded)
        try:
            new_plan = extend_plan(plan, onet, thermal, cfg)
        except PlacementError as exc:
            raise RoutingError(f"{reason}; {exc}", stranded) from exc
        added = new_plan.trunks[len(plan.trunks):]
        log.info("GLOW revision %d (%s): %d trunk(s) added", revisions + 1, reason, len(added))
        accesses.update(compute_accesses(new_plan, onet, thermal, cfg.models, added))
        plan = new_plan
        revisions += 1
