import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fogalloc.catalog import NETWORK_TABLE, Layout, Tier, build_catalog, default_catalog, make_scenario, scenario_with_loads
from fogalloc.opt import (
    Infeasible,
    NotATie,
    TimeLimit,
    TooLarge,
    brute_force,
    canonicalize,
    check_feasibility,
    formulate,
    lp_bound,
    solve_exact,
    to_lp,
)
from fogalloc.power import evaluate
from fogalloc.topology import Architecture, build_topology, hosts

REDUCED = Layout(rooms=2, users_per_room=3, demanding_per_room=1)


def reduced(arch, loads, catalog=None, layout=REDUCED):
    return build_topology(scenario_with_loads(loads, catalog or default_catalog(), layout), arch)


# ------------------------------------------------------------ formulate

def test_assignment_variable_census(pon6):
    p = formulate(pon6)
    assert p.n_demands * p.n_hosts == 256
    assert len(p.names) == p.n_vars
    assert np.all(np.isfinite(p.c)) and np.all(p.c >= 0)
    assert p.A_ub.shape[1] == p.n_vars and p.A_eq.shape[1] == p.n_vars
    assert p.family_count("assign") == 8


def test_cloud_only_has_eight_assignment_variables():
    p = formulate(build_topology(make_scenario(6), Architecture.CLOUD))
    assert p.n_demands * p.n_hosts == 8
    sol = solve_exact(p)
    assert set(sol.allocation.values()) == {"CC"}


def test_minimal_scenario_capacity_rows():
    topo = build_topology(make_scenario(6, layout=Layout(1, 2, 1)), Architecture.PON)
    p = formulate(topo)
    assert p.family_count("node_capacity") == len(hosts(topo))


def test_demand_that_fits_nowhere():
    cat = build_catalog(processing={t: (5.0, 10.0) for t in Tier})
    with pytest.raises(Infeasible) as exc:
        formulate(build_topology(make_scenario(6, cat), Architecture.PON))
    assert exc.value.witness == "d1.1"


def test_jointly_infeasible_consistent_with_lp_bound():
    cat = build_catalog(processing={Tier.CLOUD: (100.0, 1100.0)})
    p = formulate(build_topology(make_scenario(20, cat), Architecture.CLOUD))
    with pytest.raises(Infeasible):
        solve_exact(p)
    with pytest.raises(Infeasible):
        lp_bound(p)


def test_lp_text(pon6):
    text = to_lp(formulate(build_topology(make_scenario(6, layout=Layout(1, 2, 1)), Architecture.PON)))
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    assert text.isascii()


def test_objective_of_matches_evaluate(pon6):
    p = formulate(pon6)
    assign = [p.host_ids.index("r1RF")] * 8
    assert p.objective_of(assign) == pytest.approx(179.7048, abs=1e-9)


# ------------------------------------------------------------ solve_exact

def test_pon_six_consolidates_on_first_room_fog(solved):
    _, _, sol = solved(Architecture.PON, 6)
    assert set(sol.allocation.values()) == {"r1RF"}
    assert sol.node_loads == {"r1RF": 48.0}
    assert sol.optimality.proven and sol.optimality.gap <= 1e-9 * sol.objective


@pytest.mark.parametrize("arch", [Architecture.PON, Architecture.SPINE_LEAF, Architecture.CLOUD])
@pytest.mark.parametrize("load", [6, 9, 13, 20])
def test_solution_invariants(solved, arch, load):
    topo, p, sol = solved(arch, load)
    assert set(sol.allocation) == set(p.demand_ids)
    assert check_feasibility(topo, None, sol.allocation) == []
    assert evaluate(topo, sol.allocation).total_w == pytest.approx(sol.objective, rel=1e-9)
    assert sum(sol.node_loads.values()) == pytest.approx(8 * load)
    assert lp_bound(p) <= sol.objective * (1 + 1e-9)


# objective values cross-checked with scipy's HiGHS MILP on the same model
REFERENCE = {
    (Architecture.PON, 9): 218.2873,
    (Architecture.PON, 10): 244.468,
    (Architecture.PON, 12): 252.8496,
    (Architecture.PON, 16): 269.6128,
    (Architecture.PON, 20): 334.376,
    (Architecture.SPINE_LEAF, 6): 1347.6012,
    (Architecture.SPINE_LEAF, 12): 1441.4425,
    (Architecture.SPINE_LEAF, 20): 1487.3627,
}


@pytest.mark.parametrize("key", sorted(REFERENCE, key=lambda k: (k[0].value, k[1])))
def test_reference_objectives(solved, key):
    assert solved(*key)[2].objective == pytest.approx(REFERENCE[key], abs=1e-4)


def test_time_limit_reports_incumbent_and_bound():
    p = formulate(build_topology(make_scenario(12), Architecture.PON))
    with pytest.raises(TimeLimit) as exc:
        solve_exact(p, time_limit=1e-9)
    err = exc.value
    assert err.bound <= 252.85
    if err.incumbent is not None:
        assert err.incumbent.objective >= err.bound
        assert err.incumbent.optimality.status == "time_limit"


def test_symmetry_breaking_keeps_canonical_optimum():
    for load in (9, 10, 16):
        p = formulate(build_topology(make_scenario(load), Architecture.PON))
        assert solve_exact(p).assignment == solve_exact(p, symmetry=False).assignment


def test_determinism(solved):
    topo, p, sol = solved(Architecture.PON, 10)
    again = solve_exact(formulate(build_topology(make_scenario(10), Architecture.PON)))
    assert again.allocation == sol.allocation and again.objective == sol.objective


@pytest.mark.parametrize("k", [0.5, 3.0])
def test_uniform_power_scaling(solved, k):
    for arch, load in ((Architecture.PON, 9), (Architecture.SPINE_LEAF, 13)):
        base = solved(arch, load)[2]
        topo = build_topology(make_scenario(load, default_catalog().scaled(k)), arch)
        sol = solve_exact(formulate(topo))
        assert sol.objective == pytest.approx(k * base.objective, rel=1e-9)
        assert sol.assignment == base.assignment


def test_room_permutation_invariance():
    layout = Layout(4, 8, 2)
    loads = [6, 11, 9, 3, 14, 8, 5, 12]
    perm = [2, 0, 3, 1]
    permuted = [x for r in perm for x in loads[2 * r: 2 * r + 2]]
    for arch in (Architecture.PON, Architecture.SPINE_LEAF):
        a = solve_exact(formulate(build_topology(scenario_with_loads(loads, layout=layout), arch)))
        b = solve_exact(formulate(build_topology(scenario_with_loads(permuted, layout=layout), arch)))
        assert a.objective == pytest.approx(b.objective, rel=1e-9)


def test_zero_idle_lp_bound_is_tight():
    cat = build_catalog(
        idle_fraction_processing=0.0,
        network={k: (p, 0.0, c) for k, (p, _, c) in NETWORK_TABLE.items()},
    )
    for load in (3, 7, 12):
        for arch in (Architecture.PON, Architecture.SPINE_LEAF):
            topo = reduced(arch, [load, load], cat)
            opt = brute_force(topo).objective
            assert lp_bound(formulate(topo)) == pytest.approx(opt, rel=1e-7)


# ------------------------------------------------------------ brute force

def test_brute_force_single_host():
    topo = build_topology(make_scenario(5, layout=Layout(1, 1, 1)), Architecture.CLOUD)
    sol = brute_force(topo)
    assert sol.allocation == {"d1.1": "CC"} and sol.stats["candidates"] == 1


def test_brute_force_candidate_count():
    topo = reduced(Architecture.PON, [6, 6])
    assert len(hosts(topo)) == 10
    assert brute_force(topo).stats["candidates"] == 100


def test_brute_force_guard(pon6):
    with pytest.raises(TooLarge):
        brute_force(pon6)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    st.sampled_from([Architecture.PON, Architecture.SPINE_LEAF, Architecture.CLOUD]),
    st.lists(st.floats(1, 20).map(lambda x: round(x, 3)), min_size=2, max_size=2),
    st.sampled_from([2, 3, 5]),
)
def test_oracle_equivalence(arch, loads, users):
    topo = reduced(arch, loads, layout=Layout(2, users, 1))
    exact = solve_exact(formulate(topo))
    oracle = brute_force(topo)
    assert exact.objective == pytest.approx(oracle.objective, rel=1e-9)
    assert exact.allocation == oracle.allocation


def test_brute_force_engines_agree():
    for arch in (Architecture.PON, Architecture.SPINE_LEAF):
        topo = build_topology(scenario_with_loads([7, 3, 12], layout=Layout(3, 3, 1)), arch)
        a = brute_force(topo, engine="literal")
        b = brute_force(topo, engine="kernel")
        assert a.allocation == b.allocation and a.objective == pytest.approx(b.objective, rel=1e-12)
        exact = solve_exact(formulate(topo))
        assert exact.allocation == a.allocation and exact.objective == pytest.approx(a.objective, rel=1e-9)


# ------------------------------------------------------------ feasibility & canonicalize

def test_node_over_capacity():
    topo = build_topology(make_scenario(12), Architecture.PON)
    ds = [d.id for d in topo.scenario.demands]
    alloc = {d: "r1RF" for d in ds[:6]} | {d: "r2RF" for d in ds[6:]}
    v = check_feasibility(topo, None, alloc)
    assert [(x.code, x.subject) for x in v] == [("NodeOverCapacity", "r1RF")]


def test_wavelength_over_capacity():
    # five 2.2 Gbps demands per room, each sent to a distinct UD in the other room
    cat = build_catalog(drr=0.25)
    topo = build_topology(make_scenario(8.8, cat, Layout(2, 10, 5)), Architecture.PON)
    alloc = {}
    for d in topo.scenario.demands:
        room, user = d.source_user
        alloc[d.id] = f"r{2 - room}UD{user + 6}"
    v = check_feasibility(topo, None, alloc)
    assert [x.code for x in v] == ["WavelengthOverCapacity"] * 2
    assert [x.subject for x in v] == ["λ_a", "λ_a"]
    assert [x.detail.split(":")[0] for x in v] == ["room 1", "room 2"]


def test_unassigned_and_unknown(pon6):
    v = check_feasibility(pon6, None, {"d1.1": "nowhere"})
    codes = {x.code for x in v}
    assert "Unassigned" in codes and "UnknownHost" in codes


def _sol(objective, assignment):
    from fogalloc.opt.solution import Optimality, Solution
    from fogalloc.power import PowerBreakdown

    return Solution({}, objective, PowerBreakdown(), Optimality("optimal", objective, 0.0), {}, assignment)


def test_canonicalize():
    a, b = _sol(100.0, (21, 21)), _sol(100.0 + 1e-12, (0, 0))
    assert canonicalize([a, b]) is b
    assert canonicalize([a]) is a
    with pytest.raises(NotATie):
        canonicalize([a, _sol(101.0, (0, 0))])


def test_canonical_among_room_fog_choices(pon6):
    p = formulate(pon6)
    from fogalloc.opt.solution import Optimality, make_solution

    sols = [
        make_solution(pon6, p, [p.host_ids.index(f"r{r}RF")] * 8, Optimality("optimal", 0, 0))
        for r in (4, 2, 1, 3)
    ]
    assert set(canonicalize(sols).allocation.values()) == {"r1RF"}
