from dataclasses import replace

import pytest

from glowroute.checker import check_assignment
from glowroute.glow import glow_route
from glowroute.ingest import Config
from glowroute.placement import compute_accesses
from glowroute.postroute import (LegalizationError, converters, legalize, min_spacing)
from glowroute.power import Assignment, RoutingError, compute_power

from helpers import crossing_fixture, flat_thermal, make_onet, make_plan

M = Config().models
PITCH = 0.04


def test_already_legal_is_identity():
    onet = make_onet(20, 10, [((1.0, 5.0), [(9.0, 5.0)]), ((11.0, 5.0), [(18.0, 5.0)])])
    plan = make_plan(20, 10, [("H", 5.0)])
    thermal = flat_thermal(20, 10)
    acc = compute_accesses(plan, onet, thermal, M)
    a = Assignment.from_links({0: 0, 1: 0}, onet, plan)
    out, acc2 = legalize(a, acc, plan, M, onet, thermal, PITCH)
    assert out == a and acc2 == acc


def test_coincident_converters_shift_by_one_pitch():
    # link 0's detector and net 1's modulator both land at x = 9
    onet = make_onet(20, 10, [((1.0, 5.0), [(9.0, 5.0)]), ((9.0, 5.0), [(17.0, 5.0)])])
    plan = make_plan(20, 10, [("H", 5.0)])
    thermal = flat_thermal(20, 10)
    acc = compute_accesses(plan, onet, thermal, M)
    a = Assignment.from_links({0: 0, 1: 0}, onet, plan)
    assert min_spacing(converters(a, acc, plan)[0]) == 0.0
    out, acc2 = legalize(a, acc, plan, M, onet, thermal, PITCH)
    assert out == a
    moved = [k for k in acc if acc[k] != acc2[k]]
    assert len(moved) == 1
    k = moved[0]
    assert abs(acc2[k].wl_o - acc[k].wl_o) <= PITCH + 1e-12
    shifts = [abs(p - q) for p, q in zip(acc2[k].mod_pos + acc2[k].det_pos,
                                         acc[k].mod_pos + acc[k].det_pos)]
    assert max(shifts) == pytest.approx(PITCH, abs=1e-12)
    assert min_spacing(converters(out, acc2, plan)[0]) >= PITCH - 1e-9
    assert check_assignment(out, plan, onet, acc2, thermal, M, PITCH) == []


def tight_fixture(capacity_alt):
    """Link 0 is 3.72 mm long on the trunk, so it has only 0.52 ps of timing slack.

    Net 1's modulator sits on link 0's detector. Shifting the detector by one
    pitch in either direction costs at least 1.04 ps, so link 0 has to leave
    trunk 0. Trunk 1 is coincident and already carries net 2.
    """
    onet = make_onet(20, 10, [((1.0, 5.0), [(4.72, 5.0)]), ((4.72, 5.0), [(15.0, 5.0)]),
                              ((10.0, 5.0), [(18.0, 5.0)])])
    plan = make_plan(20, 10, [("H", 5.0), ("H", 5.0)], capacity=2)
    plan = replace(plan, trunks=(plan.trunks[0], replace(plan.trunks[1], capacity=capacity_alt)))
    thermal = flat_thermal(20, 10)
    acc = compute_accesses(plan, onet, thermal, M)
    a = Assignment.from_links({0: 0, 1: 0, 2: 1}, onet, plan)
    return onet, plan, thermal, acc, a


def test_contended_link_moves_to_trunk_with_room():
    onet, plan, thermal, acc, a = tight_fixture(2)
    assert acc[(0, 0)].delay_budget - acc[(0, 0)].delay == pytest.approx(0.52, abs=1e-9)
    out, acc2 = legalize(a, acc, plan, M, onet, thermal, PITCH)
    assert out.link_trunk == {0: 1, 1: 0, 2: 1}
    assert check_assignment(out, plan, onet, acc2, thermal, M, PITCH) == []


def test_contended_link_with_full_alternative_fails():
    onet, plan, thermal, acc, a = tight_fixture(1)
    with pytest.raises(LegalizationError) as ei:
        legalize(a, acc, plan, M, onet, thermal, PITCH)
    assert ei.value.links == [0]
    assert isinstance(ei.value, RoutingError)


def test_zero_pitch_disables_legalization():
    onet, plan, thermal, acc, a = tight_fixture(1)
    out, acc2 = legalize(a, acc, plan, M, onet, thermal, 0.0)
    assert out == a and acc2 == acc


def test_routed_fixtures_legal_after_legalize():
    done = 0
    for seed in range(12):
        plan, onet, acc, thermal, cfg = crossing_fixture(seed)
        try:
            res = glow_route(plan, onet, acc, cfg, thermal)
            out, acc2 = legalize(res.assignment, res.accesses, plan, cfg.models, onet, thermal,
                                 cfg.min_ring_pitch)
        except RoutingError:
            continue
        assert check_assignment(out, plan, onet, acc2, thermal, cfg.models,
                                cfg.min_ring_pitch) == []
        before = res.report.p_total
        after = compute_power(out, plan, acc2, thermal, cfg.models).p_total
        if out == res.assignment:
            # only converter shifts: the change is the sum of the p_path deltas
            delta = sum(acc2[k].p_path - res.accesses[k].p_path for k in out.assigned())
            assert after - before == pytest.approx(delta, abs=1e-12)
        done += 1
    assert done >= 8
