"""Hand-built plans and optical netlists shared by the test modules."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from glowroute.bench import gen_thermal
from glowroute.ingest import Config, ThermalProfile
from glowroute.placement import Trunk, TrunkPlan, compute_accesses, link_access
from glowroute.preprocess import Link, OpticalNet, OpticalNetlist, PseudoPin, manhattan


def make_onet(width, height, nets) -> OpticalNetlist:
    """``nets`` is a list of (driver, [sinks]); links are numbered in order."""
    onets, links = [], []
    for nid, (d, sinks) in enumerate(nets):
        onets.append(OpticalNet(nid, PseudoPin(tuple(d), (0,)),
                                tuple(PseudoPin(tuple(s), (k + 1,)) for k, s in enumerate(sinks))))
        for s in sinks:
            links.append(Link(len(links), nid, tuple(d), tuple(s), manhattan(d, s)))
    return OpticalNetlist(float(width), float(height), tuple(onets), tuple(links))


def make_plan(width, height, specs, capacity=32) -> TrunkPlan:
    """``specs`` is a list of (orientation, coord, lo, hi); lo/hi default to the chip edge."""
    trunks = []
    for item in specs:
        orient, coord = item[0], item[1]
        lo = item[2] if len(item) > 2 else 0.0
        hi = item[3] if len(item) > 3 else (width if orient == "H" else height)
        trunks.append(Trunk(len(trunks), orient, float(coord), float(lo), float(hi), capacity))
    return TrunkPlan(float(width), float(height), tuple(trunks), next_round=99)


def grid_plan(width, coords, capacity) -> TrunkPlan:
    """len(coords) horizontal and as many vertical full-span trunks."""
    return make_plan(width, width, [("H", c) for c in coords] + [("V", c) for c in coords],
                     capacity)


def _feasible_count(link, plan, thermal, models):
    return sum(link_access(link, t, thermal, models).feasible for t in plan.trunks)


def random_links(rng, plan, thermal, models, nets, sinks_max, min_opts=1, min_len=6.0):
    """Random nets whose every link has at least ``min_opts`` feasible trunks."""
    w, h = plan.width, plan.height

    def pt():
        return (round(float(rng.uniform(0.5, w - 0.5)), 3),
                round(float(rng.uniform(0.5, h - 0.5)), 3))

    out = []
    for n in range(nets):
        d = pt()
        want = int(rng.integers(1, sinks_max + 1))
        sinks = []
        for _ in range(400):
            if len(sinks) == want:
                break
            s = pt()
            if manhattan(d, s) < min_len or any(manhattan(s, q) < 4.0 for q in sinks):
                continue
            trial = Link(0, n, d, s, manhattan(d, s))
            if _feasible_count(trial, plan, thermal, models) >= min_opts:
                sinks.append(s)
        if sinks:
            out.append((d, sinks))
    return make_onet(w, h, out)


def crossing_fixture(seed, width=20.0, coords=(6.0, 14.0), nets=6, capacity=3, peak=2.5):
    """2H x 2V full-span grid (4 crossings) with diagonal links that have trunk choices."""
    rng = np.random.default_rng(seed)
    cfg = replace(Config(), c_max=capacity, max_placement_revisions=0)
    thermal = gen_thermal(3, peak, 3.0, int(width), int(width), seed=seed)
    plan = grid_plan(width, coords, capacity)
    onet = random_links(rng, plan, thermal, cfg.models, nets, 3, min_opts=2)
    return plan, onet, compute_accesses(plan, onet, thermal, cfg.models), thermal, cfg


def small_instance(seed, width=16.0):
    """At most 3 trunks, 6 links and 4 nets, with random capacity and thermal field."""
    rng = np.random.default_rng(seed)
    n_trunks = int(rng.integers(1, 4))
    specs = []
    for _ in range(n_trunks):
        orient = "H" if rng.random() < 0.5 else "V"
        coord = round(float(rng.uniform(2.0, width - 2.0)), 2)
        if rng.random() < 0.3:
            lo = round(float(rng.uniform(0.0, width / 3)), 2)
            specs.append((orient, coord, lo, width))
        else:
            specs.append((orient, coord))
    capacity = int(rng.integers(1, 4))
    cfg = replace(Config(), c_max=capacity, max_placement_revisions=0)
    thermal = gen_thermal(int(rng.integers(0, 3)), 2.5, 3.0, int(width), int(width),
                          seed=seed)
    plan = make_plan(width, width, specs, capacity)
    onet = make_onet(width, width, [])
    for _ in range(50):
        cand = random_links(rng, plan, thermal, cfg.models, int(rng.integers(1, 5)), 2)
        if 0 < len(cand.links) <= 6:
            onet = cand
            break
    return plan, onet, compute_accesses(plan, onet, thermal, cfg.models), thermal, cfg


def flat_thermal(width, height, value=0.0, tile=1.0) -> ThermalProfile:
    prof = ThermalProfile.zeros(width, height, tile)
    return ThermalProfile(np.full(prof.grid.shape, float(value)), tile)
