"""Post-routing legalization of ring converter spacing along each trunk.

Links of one net that share a trunk share a single modulator, since they
have the same driver pseudo-pin; every link has its own detector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .ingest import ThermalProfile
from .oil import DeviceModels
from .placement import TrunkPlan, access_at, link_access
from .power import Assignment, RoutingError
from .preprocess import OpticalNetlist

log = logging.getLogger(__name__)

PITCH_EPS = 1e-9


class LegalizationError(RoutingError):
    pass


@dataclass(frozen=True)
class Converter:
    trunk_id: int
    kind: str                 # "mod" or "det"
    key: int                  # net id for modulators, link id for detectors
    position: float           # along the trunk
    links: tuple[int, ...]


def converters(a: Assignment, accesses: dict, plan: TrunkPlan) -> dict[int, list[Converter]]:
    """Converters on each lit trunk, sorted by position along the trunk."""
    mods: dict[tuple[int, int], list[int]] = {}
    out: dict[int, list[Converter]] = {t: [] for t in sorted(a.trunk_active)}
    for l, t in a.assigned():
        acc = accesses[(l, t)]
        trunk = plan.trunks[t]
        mods.setdefault((t, a.link_net[l]), []).append(l)
        out.setdefault(t, []).append(
            Converter(t, "det", l, trunk.along(acc.det_pos), (l,)))
    for (t, n), links in mods.items():
        acc = accesses[(links[0], t)]
        out[t].append(Converter(t, "mod", n, plan.trunks[t].along(acc.mod_pos), tuple(links)))
    for t in out:
        out[t].sort(key=lambda c: (c.position, c.kind != "mod", c.key))
    return out


def min_spacing(convs: list[Converter]) -> float:
    pos = sorted(c.position for c in convs)
    return min((b - a for a, b in zip(pos, pos[1:])), default=float("inf"))


def _moved(conv: Converter, new_pos: float, onet_links, plan, accesses, thermal, models):
    """Accesses of ``conv``'s links with the converter at ``new_pos``, or None."""
    trunk = plan.trunks[conv.trunk_id]
    out = {}
    for l in conv.links:
        old = accesses[(l, conv.trunk_id)]
        mod = trunk.along(old.mod_pos)
        det = trunk.along(old.det_pos)
        if conv.kind == "mod":
            mod = new_pos
        else:
            det = new_pos
        acc = access_at(onet_links[l], trunk, mod, det, thermal, models)
        if not acc.feasible:
            return None
        out[(l, conv.trunk_id)] = acc
    return out


def _reassign(link_id: int, a_map: dict, link_net: dict, plan: TrunkPlan, onet_links,
              accesses: dict, thermal, models) -> bool:
    cur = a_map[link_id]
    net = link_net[link_id]
    options = []
    for t in plan.trunks:
        if t.id == cur:
            continue
        nets = {link_net[l] for l, tt in a_map.items() if tt == t.id}
        if net not in nets and len(nets) >= t.capacity:
            continue
        acc = link_access(onet_links[link_id], t, thermal, models)
        mates = [l for l, tt in a_map.items() if tt == t.id and link_net[l] == net]
        if mates:
            # the net's modulator on this trunk is shared and may have been shifted
            shared = t.along(accesses[(mates[0], t.id)].mod_pos)
            acc = access_at(onet_links[link_id], t, shared, t.along(acc.det_pos),
                            thermal, models)
        if acc.feasible:
            options.append((acc.cost, t.id, acc))
    if not options:
        return False
    _, tid, acc = min(options, key=lambda o: (o[0], o[1]))
    a_map[link_id] = tid
    accesses[(link_id, tid)] = acc
    log.info("legalize: link %d moved from trunk %s to trunk %d", link_id, cur, tid)
    return True


def _legalize_trunk(convs, pitch, onet_links, plan, accesses, thermal, models):
    """Perturb converters on one trunk; returns the first converter that cannot move."""
    trunk = plan.trunks[convs[0].trunk_id] if convs else None
    placed: list[float] = []

    def clear(p):
        return all(abs(p - q) >= pitch - PITCH_EPS for q in placed)

    for conv in convs:
        if clear(conv.position):
            placed.append(conv.position)
            continue
        done = False
        for k in range(1, len(convs) + 2):
            for sign in (1, -1):
                cand = conv.position + sign * k * pitch
                if not trunk.lo <= cand <= trunk.hi or not clear(cand):
                    continue
                upd = _moved(conv, cand, onet_links, plan, accesses, thermal, models)
                if upd is None:
                    continue
                accesses.update(upd)
                placed.append(cand)
                done = True
                break
            if done:
                break
        if not done:
            return conv
    return None


def legalize(a: Assignment, accesses: dict, plan: TrunkPlan, models: DeviceModels,
             onet: OpticalNetlist, thermal: ThermalProfile,
             min_ring_pitch: float = 0.04) -> tuple[Assignment, dict]:
    """Spread converters at least ``min_ring_pitch`` apart on every trunk.

    Returns the (possibly changed) assignment and the access table with
    moved converter positions. Raises LegalizationError when a contended
    link can neither be shifted nor moved to another trunk with room.
    """
    accesses = dict(accesses)
    if min_ring_pitch <= 0:
        return a, accesses
    onet_links = {l.link_id: l for l in onet.links}
    a_map = dict(a.link_trunk)
    changed_any = False
    for _ in range(10 * max(1, len(onet.links)) + 10):
        cur = Assignment.from_links(a_map, onet, plan) if changed_any else a
        stuck = None
        for t, convs in converters(cur, accesses, plan).items():
            if min_spacing(convs) >= min_ring_pitch - PITCH_EPS:
                continue
            stuck = _legalize_trunk(convs, min_ring_pitch, onet_links, plan, accesses,
                                    thermal, models)
            if stuck is not None:
                break
        if stuck is None:
            return cur, accesses
        for l in stuck.links:
            if not _reassign(l, a_map, cur.link_net, plan, onet_links, accesses,
                             thermal, models):
                raise LegalizationError(
                    f"link {l} cannot be legalized on trunk {stuck.trunk_id} and no other "
                    f"feasible trunk has room", [l])
        changed_any = True
    raise LegalizationError("legalization did not converge", a.unassigned())
