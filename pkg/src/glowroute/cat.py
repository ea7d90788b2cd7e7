"""Greedy channel assignment ordered by thermal variation (the baseline router)."""

from __future__ import annotations

import logging

from .ingest import Config, ThermalProfile
from .placement import PlacementError, TrunkPlan, compute_accesses, extend_plan
from .power import Assignment, RouteResult, RoutingError, compute_power
from .preprocess import OpticalNetlist

log = logging.getLogger(__name__)


def _fill_trunk(trunk, link_trunk, link_net, accesses):
    """Assign the coolest feasible unassigned links to ``trunk`` until it is full.

    Capacity is counted in distinct nets, so a link whose net already owns a
    channel on the trunk always fits. The scan stops at the first link that
    would need a new channel on a full trunk, which keeps the assigned links
    a prefix of the sorted candidates.
    """
    nets = {link_net[l] for l, t in link_trunk.items() if t == trunk.id}
    cand = [accesses[(l, trunk.id)] for l, t in link_trunk.items() if t is None]
    cand = [a for a in cand if a.feasible]
    cand.sort(key=lambda a: (a.t_var, a.link_id))
    for acc in cand:
        net = link_net[acc.link_id]
        if net not in nets and len(nets) >= trunk.capacity:
            break
        link_trunk[acc.link_id] = trunk.id
        nets.add(net)


def cat_route(plan: TrunkPlan, onet: OpticalNetlist, accesses: dict, cfg: Config,
              thermal: ThermalProfile) -> RouteResult:
    accesses = dict(accesses)
    link_net = {l.link_id: l.net_id for l in onet.links}
    link_trunk: dict[int, int | None] = {l.link_id: None for l in onet.links}
    revisions = 0
    while True:
        for trunk in plan.trunks:
            _fill_trunk(trunk, link_trunk, link_net, accesses)
        stranded = sorted(l for l, t in link_trunk.items() if t is None)
        if not stranded:
            break
        if revisions >= cfg.max_placement_revisions:
            raise RoutingError(
                f"CAT left {len(stranded)} link(s) unassigned after {revisions} "
                f"placement revision(s): {stranded}", stranded)
        try:
            new_plan = extend_plan(plan, onet, thermal, cfg)
        except PlacementError as exc:
            raise RoutingError(f"{exc}; unassigned links {stranded}", stranded) from exc
        added = new_plan.trunks[len(plan.trunks):]
        log.info("CAT revision %d: %d trunk(s) added for %d stranded link(s)",
                 revisions + 1, len(added), len(stranded))
        accesses.update(compute_accesses(new_plan, onet, thermal, cfg.models, added))
        plan = new_plan
        revisions += 1
    assignment = Assignment.from_links(link_trunk, onet, plan)
    report = compute_power(assignment, plan, accesses, thermal, cfg.models)
    return RouteResult(assignment, report, plan, accesses, revisions, status="greedy")
