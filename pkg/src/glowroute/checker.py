"""Independent validation of a routed assignment.

Everything here is recomputed from geometry, the thermal grid and the
device parameters; nothing is read back from the access table except the
converter positions, which are themselves checked to lie on the trunk.
"""

from __future__ import annotations

import math
from collections import defaultdict

from .ingest import ThermalProfile
from .oil import DeviceModels

TOL = 1e-9


def _tile_value(thermal: ThermalProfile, x: float, y: float) -> float:
    rows, cols = thermal.grid.shape
    c = min(max(int(x // thermal.tile), 0), cols - 1)
    r = min(max(int(y // thermal.tile), 0), rows - 1)
    return float(thermal.grid[r][c])


def _on_trunk(trunk, p) -> bool:
    if trunk.orientation == "H":
        along, across = p
    else:
        across, along = p
    return (abs(across - trunk.coord) <= TOL
            and trunk.lo - TOL <= along <= trunk.hi + TOL)


def _crosses(h, v) -> bool:
    return v.lo <= h.coord <= v.hi and h.lo <= v.coord <= h.hi


def check_assignment(a, plan, onet, accesses, thermal: ThermalProfile, models: DeviceModels,
                     min_ring_pitch: float | None = None) -> list[str]:
    """Return a list of human-readable violations (empty when legal)."""
    bad: list[str] = []
    links = {l.link_id: l for l in onet.links}
    trunks = {t.id: t for t in plan.trunks}

    # selection
    for lid in links:
        t = a.link_trunk.get(lid)
        if t is None:
            bad.append(f"selection: link {lid} unassigned")
        elif t not in trunks:
            bad.append(f"selection: link {lid} on unknown trunk {t}")
    extra = set(a.link_trunk) - set(links)
    if extra:
        bad.append(f"selection: unknown links {sorted(extra)}")

    # logical identities
    used = defaultdict(set)
    for lid, t in a.link_trunk.items():
        if t is not None and lid in links:
            used[t].add(links[lid].net_id)
    lam = {(n, t) for t, nets in used.items() for n in nets}
    if set(a.net_trunk) != lam:
        bad.append(f"identity: LAM flags {sorted(set(a.net_trunk) ^ lam)} disagree with links")
    lit = set(used)
    if set(a.trunk_active) != lit:
        bad.append(f"identity: W flags {sorted(set(a.trunk_active) ^ lit)} disagree with nets")
    hs = [t for t in plan.trunks if t.orientation == "H"]
    vs = [t for t in plan.trunks if t.orientation == "V"]
    x_on = {(h.id, v.id) for h in hs for v in vs
            if _crosses(h, v) and h.id in lit and v.id in lit}
    if set(a.crossing_active) != x_on:
        bad.append(f"identity: crossing flags {sorted(set(a.crossing_active) ^ x_on)} "
                   f"differ from W_i AND W_j")

    # capacity and channel uniqueness
    for t, nets in used.items():
        if t in trunks and len(nets) > trunks[t].capacity:
            bad.append(f"capacity: trunk {t} carries {len(nets)} nets > {trunks[t].capacity}")
        chans = [a.channels.get((n, t)) for n in nets]
        if None in chans or len(set(chans)) != len(chans):
            bad.append(f"capacity: trunk {t} channel indices missing or clashing")

    # per-link physics
    for lid, t in sorted((l, t) for l, t in a.link_trunk.items()
                         if t is not None and l in links and t in trunks):
        link, trunk = links[lid], trunks[t]
        acc = accesses[(lid, t)]
        mod, det = acc.mod_pos, acc.det_pos
        if not (_on_trunk(trunk, mod) and _on_trunk(trunk, det)):
            bad.append(f"geometry: link {lid} converters not on trunk {t}")
            continue
        d, s = link.driver_pos, link.sink_pos
        wl_e = abs(d[0] - mod[0]) + abs(d[1] - mod[1]) + abs(s[0] - det[0]) + abs(s[1] - det[1])
        wl_o = math.hypot(det[0] - mod[0], det[1] - mod[1])
        hpwl = abs(d[0] - s[0]) + abs(d[1] - s[1])
        delay = models.tau_e * wl_e + models.tau_o * wl_o + models.tau_conv
        budget = models.tau_e * hpwl
        if delay > budget + TOL * max(1.0, budget):
            bad.append(f"timing: link {lid} on trunk {t}: {delay:.6g} ps > {budget:.6g} ps")
        t_var = max(_tile_value(thermal, *mod), _tile_value(thermal, *det))
        if t_var > models.temp_threshold:
            bad.append(f"thermal: link {lid} on trunk {t}: dT {t_var} > threshold")
        if 2.0 * models.drift_sens * t_var > models.channel_spacing:
            bad.append(f"thermal: link {lid} on trunk {t}: ring drift aliases channels")
        loss_db = models.loss_mod_db + models.alpha_wg * wl_o / 10.0
        laser = models.p_det_sense * 10.0 ** (loss_db / 10.0)
        if laser > models.p_laser_max + TOL:
            bad.append(f"detection: link {lid} on trunk {t} needs {laser:.6g} mW")
        if abs(acc.wl_o - wl_o) > 1e-9 or abs(acc.wl_e - wl_e) > 1e-9:
            bad.append(f"accounting: link {lid} access lengths are stale")

    if min_ring_pitch:
        per_trunk = defaultdict(dict)
        for lid, t in a.link_trunk.items():
            if t is None or lid not in links:
                continue
            acc = accesses[(lid, t)]
            tr = trunks[t]
            along = (lambda p: p[0]) if tr.orientation == "H" else (lambda p: p[1])
            per_trunk[t][("mod", links[lid].net_id)] = along(acc.mod_pos)
            per_trunk[t][("det", lid)] = along(acc.det_pos)
        for t, devs in per_trunk.items():
            pos = sorted(devs.values())
            for p, q in zip(pos, pos[1:]):
                if q - p < min_ring_pitch - 1e-9:
                    bad.append(f"pitch: trunk {t} converters {q - p:.4g} mm apart")
                    break
    return bad
