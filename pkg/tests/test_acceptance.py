"""Acceptance criteria. Each test prints a single PASS/FAIL line (collected in the summary)."""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from glowroute.bench import CK1_NETS, CK1_PSEUDO_PINS, ck1_like, derive_netlist, gen_thermal
from glowroute.cat import cat_route
from glowroute.checker import check_assignment
from glowroute.flow import prepare, route_design
from glowroute.glow import InfeasibleLinkError, build_ilp, glow_route
from glowroute.ilp import brute_force
from glowroute.ingest import Config, Net, Netlist
from glowroute.oil import (DeviceModels, RingGeometry, channel_bandwidth, critical_length,
                           group_index, ring_q_factor, ring_thermal_penalty, thermal_drift)
from glowroute.placement import trunk_crossings
from glowroute.postroute import legalize
from glowroute.power import RoutingError
from glowroute.preprocess import build_optical_netlist

from helpers import crossing_fixture, small_instance

CFG = Config()
RTOL = 1e-9


def rel_close(a, b, rtol=RTOL):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def derived_instance(seed):
    rng = np.random.default_rng(seed)
    nl = derive_netlist(int(rng.integers(8, 31)), seed=seed)
    thermal = gen_thermal(int(rng.integers(0, 4)), float(rng.uniform(0.5, 3.0)), 2.5, 20, 20,
                          seed=seed)
    return nl, thermal


@pytest.fixture(scope="module")
def oracle_runs():
    """GLOW vs exhaustive enumeration on 200 small instances."""
    runs = []
    for seed in range(200):
        plan, onet, acc, thermal, cfg = small_instance(seed)
        t0 = time.perf_counter()
        try:
            res = glow_route(plan, onet, acc, cfg, thermal)
        except RoutingError:
            res = None
        elapsed = time.perf_counter() - t0
        try:
            bf = brute_force(build_ilp(plan, onet, acc, cfg.models, thermal).model)
        except InfeasibleLinkError:
            bf = None
        runs.append((seed, onet, res, bf, elapsed))
    return runs


@pytest.fixture(scope="module")
def same_plan_runs():
    """CAT with placement revisions, then GLOW on CAT's final trunk plan."""
    glow_cfg = replace(CFG, max_placement_revisions=0)
    runs = []
    seed = 0
    while len(runs) < 100 and seed < 400:
        nl, thermal = derived_instance(seed)
        seed += 1
        _, onet, _, plan, acc = prepare(nl, thermal, CFG)
        if plan is None:
            continue
        try:
            cat = cat_route(plan, onet, acc, CFG, thermal)
            glow = glow_route(cat.plan, onet, cat.accesses, glow_cfg, thermal)
        except RoutingError:
            continue
        runs.append((seed - 1, cat, glow))
    return runs


def test_ilp_matches_oracle(oracle_runs, verdict):
    solved = infeasible = mismatched = 0
    worst_t = 0.0
    for seed, onet, res, bf, elapsed in oracle_runs:
        worst_t = max(worst_t, elapsed)
        if res is None:
            infeasible += 1
            if bf is not None and bf.status != "infeasible":
                mismatched += 1
            continue
        solved += 1
        if bf is None or bf.status != "optimal" or not rel_close(res.objective, bf.objective):
            mismatched += 1
    ok = mismatched == 0 and worst_t < 1.0 and solved >= 100
    verdict("1 ILP vs oracle", ok,
            f"{len(oracle_runs)} instances, {solved} optimal, {infeasible} infeasible, "
            f"{mismatched} mismatches (rtol 1e-9), slowest {worst_t:.3f}s (< 1s)")
    assert ok


def test_glow_never_worse_than_cat(same_plan_runs, verdict):
    worse = [s for s, cat, glow in same_plan_runs
             if glow.report.p_total > cat.report.p_total * (1 + RTOL)]
    reductions = [1 - glow.report.p_total / cat.report.p_total for _, cat, glow in same_plan_runs]
    fixtures = []
    bad_shape = 0
    for seed in range(80):
        plan, onet, acc, thermal, cfg = crossing_fixture(seed)
        if len(plan.trunks) < 4 or len(trunk_crossings(plan)) < 4:
            bad_shape += 1
            continue
        try:
            cat = cat_route(plan, onet, acc, cfg, thermal)
            glow = glow_route(plan, onet, acc, cfg, thermal)
        except RoutingError:
            continue
        if glow.report.p_total > cat.report.p_total * (1 + RTOL):
            worse.append(f"fixture {seed}")
        fixtures.append(1 - glow.report.p_total / cat.report.p_total)
    mean_derived = float(np.mean(reductions))
    mean_fix = float(np.mean(fixtures))
    ok = (len(same_plan_runs) == 100 and not worse and bad_shape == 0
          and len(fixtures) >= 30 and mean_fix >= 0.10)
    verdict("2 GLOW <= CAT", ok,
            f"{len(same_plan_runs)} same-plan instances, {len(worse)} with GLOW > CAT, "
            f"mean reduction {mean_derived:.1%}; {len(fixtures)} crossing fixtures "
            f"(>= 4 trunks, >= 4 crossings) mean reduction {mean_fix:.1%} (>= 10%)")
    assert ok


def _check(tag, a, plan, onet, acc, thermal, cfg, pitch, bad):
    v = check_assignment(a, plan, onet, acc, thermal, cfg.models, pitch)
    bad.extend(f"{tag}: {x}" for x in v)


def _audit(tag, res, onet, thermal, cfg, bad):
    """Check a router result, then legalize and check again. Returns True if legalized."""
    _check(f"{tag} pre", res.assignment, res.plan, onet, res.accesses, thermal, cfg, None, bad)
    try:
        a, acc = legalize(res.assignment, res.accesses, res.plan, cfg.models, onet, thermal,
                          cfg.min_ring_pitch)
    except RoutingError:
        return False
    _check(f"{tag} post", a, res.plan, onet, acc, thermal, cfg, cfg.min_ring_pitch, bad)
    return True


def test_constraint_suite(verdict):
    bad: list[str] = []
    runs = checked = legal = 0
    kinds = {"small": 300, "crossing": 150, "derived": 50}
    for kind, count in kinds.items():
        for k in range(count):
            runs += 1
            if kind == "small":
                plan, onet, acc, thermal, cfg = small_instance(1000 + k)
            elif kind == "crossing":
                plan, onet, acc, thermal, cfg = crossing_fixture(500 + k)
            else:
                nl, thermal = derived_instance(2000 + k)
                cfg = CFG
                _, onet, _, plan, acc = prepare(nl, thermal, cfg)
                if plan is None:
                    continue
            for name, router in (("cat", cat_route), ("glow", glow_route)):
                try:
                    res = router(plan, onet, acc, cfg, thermal)
                except RoutingError:
                    continue
                checked += 1
                legal += _audit(f"{kind}{k} {name}", res, onet, thermal, cfg, bad)
    ok = not bad and runs == 500 and checked >= 500
    verdict("3 constraint suite", ok,
            f"{runs} runs, {checked} routed assignments checked before legalize, {legal} after; "
            f"{len(bad)} violations")
    assert ok, bad[:10]


def test_critical_length(verdict):
    got = critical_length(DeviceModels(tau_o=11.0, tau_e=37.0, tau_conv=96.2))
    ok = abs(got - 3.7) <= 1e-9
    verdict("4 critical length", ok, f"L_crit = {got!r} mm (3.7 +/- 1e-9)")
    assert ok


def _uniform_netlist(rng, n):
    nets = []
    for i in range(n):
        k = int(rng.integers(2, 8))
        pins = tuple((round(float(x), 3), round(float(y), 3))
                     for x, y in rng.uniform(0, 20, (k, 2)))
        nets.append(Net(i, int(rng.integers(k)), pins))
    return Netlist(20.0, 20.0, tuple(nets))


def test_clustering_bound(verdict):
    l_crit = critical_length(CFG.models)
    rng = np.random.default_rng(42)
    short = links = 0
    for k in range(100):
        if k % 2:
            nl = derive_netlist(int(rng.integers(5, 40)), seed=k)
        else:
            nl = _uniform_netlist(rng, int(rng.integers(5, 40)))
        onet, _ = build_optical_netlist(nl, l_crit)
        links += len(onet.links)
        short += sum(l.hpwl < l_crit for l in onet.links)
    ok = short == 0 and links > 0
    verdict("5 clustering bound", ok,
            f"100 netlists, {links} links, {short} with HPWL < L_crit (exact comparison)")
    assert ok


def test_power_identity(oracle_runs, same_plan_runs, verdict):
    results = [res for _, _, res, _, _ in oracle_runs if res is not None]
    results += [glow for _, _, glow in same_plan_runs]
    off = [r for r in results if not rel_close(r.objective, r.report.p_total)]
    parts = [r.report for r in results] + [cat.report for _, cat, _ in same_plan_runs]
    inexact = [p for p in parts
               if p.p_total != p.p_cross + p.p_trunk_thm + p.p_ring_thm + p.p_path + p.p_dynamic]
    ok = not off and not inexact and len(results) >= 200
    verdict("6 power identity", ok,
            f"{len(results)} solved ILPs, {len(off)} objective/p_total gaps > 1e-9 rel; "
            f"{len(parts)} reports, {len(inexact)} not the exact sum of their parts")
    assert ok


def test_ck1_scale(verdict):
    nl = ck1_like(seed=0)
    thermal = gen_thermal(3, 3.0, 3.0, 24, 24, seed=0)
    t0 = time.perf_counter()
    flow = route_design(nl, thermal, CFG, "glow")
    elapsed = time.perf_counter() - t0
    pins = sum(n.pin_count for n in flow.onet.nets)
    ok = (elapsed < 60 and flow.route.status == "optimal" and len(nl.nets) == CK1_NETS
          and pins == CK1_PSEUDO_PINS and len(flow.onet.links) == 60)
    verdict("7 CK1 scale", ok,
            f"{len(nl.nets)} nets, {pins} pseudo-pins, {len(flow.onet.links)} links, "
            f"{len(flow.plan.trunks)} trunks: {flow.route.status} in {elapsed:.2f}s (< 60s)")
    assert ok


def test_oil_suite(verdict):
    m = DeviceModels()
    q = ring_q_factor(RingGeometry(0.99, 0.99, 0.99, 31.416, 4.2), 1.55)
    r = math.sqrt(0.5) ** (2 / 3)
    q_half = ring_q_factor(RingGeometry(r, r, r, 10.0, 4.0), 1.55)
    alias = DeviceModels(drift_sens=0.125, channel_spacing=1.0)
    checks = {
        "Q 8.87e3": abs(q - 8.87e3) <= 1e-3 * 8.87e3,
        "Q 114.7": abs(q_half - 114.7) <= 0.05,
        "n_g const": abs(group_index(lambda l: 2.4, 1.55) - 2.4) <= 1e-8,
        "n_g affine": abs(group_index(lambda l: 3.0 + 0.5 * l, 1.55) - 3.0) <= 1e-8,
        "n_g zero": abs(group_index(lambda l: 1.7 * l, 1.55)) <= 1e-8,
        "bw 21.8": abs(channel_bandwidth(193.4, 8869) - 21.8) <= 0.05,
        "bw 19.34": abs(channel_bandwidth(193.4, 10000) - 19.34) <= 1e-9,
        "drift 1.8": abs(thermal_drift(15, m) - 1.8) <= 1e-12,
        "drift 0": thermal_drift(0, m) == 0.0,
        "alias edge": ring_thermal_penalty(4.0, alias)[0],
        "alias past": not ring_thermal_penalty(math.nextafter(4.0, 5.0), alias)[0],
        "alias 10C": not ring_thermal_penalty(10.0, m)[0],
    }
    failed = [k for k, v in checks.items() if not v]
    ok = not failed
    verdict("8 oil suite", ok, f"{len(checks) - len(failed)}/{len(checks)} examples hold"
            + (f"; failed {failed}" if failed else ""))
    assert ok
