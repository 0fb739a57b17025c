import dataclasses
import pickle

import pytest

from fogalloc.catalog import (
    NETWORK_TABLE,
    CatalogError,
    Demand,
    DeviceKind,
    Layout,
    Tier,
    build_catalog,
    default_catalog,
    make_scenario,
    scenario_with_loads,
    validate_scenario,
)


def test_processing_table_values():
    cat = default_catalog()
    ud = cat.processing[Tier.UD]
    assert (ud.capacity, ud.p_max) == (12.888, 18.0)
    rf = cat.processing[Tier.ROOM_FOG]
    assert (rf.capacity, rf.p_max) == (64.0, 65.0)
    cc = cat.processing[Tier.CLOUD]
    assert (cc.capacity, cc.p_max) == (1612.8, 1100.0)


def test_network_table_values():
    cat = default_catalog()
    ap = cat.network[DeviceKind.AP]
    assert (ap.capacity, ap.p_max, ap.p_idle) == (2.5, 7.2, 4.32)
    sp = cat.network[DeviceKind.SPINE_SWITCH]
    assert (sp.capacity, sp.p_max, sp.p_idle) == (1440.0, 660.0, 360.0)


def test_room_fog_idle_from_fraction():
    assert default_catalog().processing[Tier.ROOM_FOG].p_idle == pytest.approx(39.0, rel=1e-12)


def test_scalar_defaults():
    cat = default_catalog()
    assert cat.wavelength_capacity == 10.0
    assert cat.per_user_ap_rate == 2.5
    assert cat.drr == 0.05
    assert cat.capacity_margin == 0.0
    assert cat.idle_fraction_processing == 0.6


def test_network_idle_is_sixty_percent_except_printed_spine():
    # the spine switch row prints 360 W idle against 660 W max; kept as printed
    for kind, (p_max, p_idle, _) in NETWORK_TABLE.items():
        if kind is DeviceKind.SPINE_SWITCH:
            assert p_idle == 360.0
            continue
        assert p_idle == pytest.approx(0.6 * p_max, rel=1e-9), kind


def test_gateway_router_shares_core_router_values():
    cat = default_catalog()
    g, c = cat.network[DeviceKind.GATEWAY_ROUTER], cat.network[DeviceKind.CORE_ROUTER]
    assert (g.capacity, g.p_max, g.p_idle) == (c.capacity, c.p_max, c.p_idle)
    assert g.kind != c.kind


def test_passive_kind_draws_nothing():
    p = default_catalog().network[DeviceKind.PASSIVE]
    assert p.passive and p.p_max == 0 and p.p_idle == 0


def test_default_catalog_is_referentially_transparent():
    a, b = default_catalog(), default_catalog()
    assert a == b and hash(a) == hash(b)
    assert pickle.loads(pickle.dumps(a)) == a


def test_spec_invariants_rejected():
    with pytest.raises(CatalogError):
        build_catalog(processing={Tier.UD: (0.0, 18.0)})
    with pytest.raises(CatalogError):
        build_catalog(network={DeviceKind.AP: (7.2, 8.0, 2.5)})
    with pytest.raises(CatalogError):
        build_catalog(idle_fraction_processing=1.5)
    with pytest.raises(CatalogError):
        build_catalog(capacity_margin=1.0)
    with pytest.raises(CatalogError):
        build_catalog(drr=0.0)


def test_effective_capacity_and_scaling():
    cat = build_catalog(capacity_margin=0.01)
    assert cat.effective_capacity(cat.processing[Tier.ROOM_FOG]) == pytest.approx(63.36)
    scaled = default_catalog().scaled(3.0)
    assert scaled.processing[Tier.CLOUD].p_max == pytest.approx(3300.0)
    assert scaled.network[DeviceKind.OLT].p_idle == pytest.approx(540.0)
    with pytest.raises(CatalogError):
        default_catalog().scaled(0)


@pytest.mark.parametrize("load,rate", [(6, 0.3), (20, 1.0)])
def test_make_scenario_canonical(load, rate):
    s = make_scenario(load)
    assert len(s.demands) == 8
    for d in s.demands:
        assert d.rate == pytest.approx(rate, rel=1e-12)
        assert d.rate == 0.05 * d.load
    assert validate_scenario(s) == []


def test_make_scenario_single_room():
    s = make_scenario(10, layout=Layout(1, 2, 1))
    assert len(s.demands) == 1
    assert s.demands[0].load == 10 and s.demands[0].rate == pytest.approx(0.5)


def test_demanding_users_occupy_first_slots():
    s = make_scenario(6)
    assert s.demanding_users() == {(r, u) for r in range(4) for u in range(2)}


def test_make_scenario_rejects_bad_inputs():
    with pytest.raises(CatalogError):
        make_scenario(0)
    with pytest.raises(CatalogError):
        Layout(4, 2, 3)


def test_validate_rate_exceeded():
    s = make_scenario(6)
    bad = dataclasses.replace(s.demands[0], rate=3.0)
    s2 = dataclasses.replace(s, demands=(bad,) + s.demands[1:])
    codes = [(v.code, v.subject) for v in validate_scenario(s2)]
    assert codes == [("APRateExceeded", bad.id)]


def test_validate_duplicate_source():
    s = make_scenario(6)
    dup = Demand("dx", s.demands[1].source_user, 6.0, 0.3)
    s2 = dataclasses.replace(s, demands=(dup,) + s.demands[1:])
    assert "DuplicateSource" in {v.code for v in validate_scenario(s2)}


def test_validate_demand_count():
    s = make_scenario(6)
    s2 = dataclasses.replace(s, demands=s.demands[:-1])
    assert [v.code for v in validate_scenario(s2)] == ["DemandCount"]


def test_scenario_with_loads():
    s = scenario_with_loads([3, 4], layout=Layout(2, 3, 1))
    assert [d.load for d in s.demands] == [3.0, 4.0]
    assert [d.id for d in s.demands] == ["d1.1", "d2.1"]
    with pytest.raises(CatalogError):
        scenario_with_loads([3], layout=Layout(2, 3, 1))
    with pytest.raises(CatalogError):
        scenario_with_loads([3, -1], layout=Layout(2, 3, 1))
