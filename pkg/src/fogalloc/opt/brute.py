"""Exhaustive oracle for small instances.

Works from the topology and device specs directly, never from the MILP
matrices, so that agreement with :func:`solve_exact` means something.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import defaultdict

import numpy as np

from ..catalog import Scenario
from ..power import evaluate
from ..topology import Topology, hosts, path_for
from . import kernels
from .problem import Infeasible
from .solution import DEFAULT_TOLERANCE, Optimality, Solution, check_feasibility, node_loads

MAX_CANDIDATES = 10**7
# below this many candidates every assignment goes through check_feasibility + evaluate
LITERAL_LIMIT = 200_000


class TooLarge(Exception):
    pass


def brute_force(
    topology: Topology,
    scenario: Scenario | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    engine: str = "auto",
    time_limit: float | None = None,
) -> Solution:
    """Enumerate every assignment and return the canonical minimum.

    ``engine="literal"`` scores each candidate with ``power.evaluate``;
    ``engine="kernel"`` runs the same enumeration over precomputed per-pair
    costs in the search kernel and re-scores only the winner. ``"auto"``
    picks literal for small spaces.
    """
    scenario = scenario or topology.scenario
    if scenario is not topology.scenario:
        raise ValueError("scenario does not match the topology it was built from")
    host_ids = [h.id for h in hosts(topology)]
    demand_ids = [d.id for d in scenario.demands]
    candidates = len(host_ids) ** len(demand_ids)
    if candidates > MAX_CANDIDATES:
        raise TooLarge(f"{len(host_ids)}^{len(demand_ids)} = {candidates} assignments exceeds {MAX_CANDIDATES}")
    if engine == "auto":
        engine = "literal" if candidates <= LITERAL_LIMIT else "kernel"
    start = time.monotonic()
    if engine == "literal":
        assignment, feasible = _literal(topology, scenario, host_ids, demand_ids, tolerance)
    elif engine == "kernel":
        deadline = 0.0 if time_limit is None else start + time_limit
        assignment, feasible = _kernel(topology, scenario, host_ids, tolerance, deadline)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    allocation = {demand_ids[d]: host_ids[s] for d, s in enumerate(assignment)}
    breakdown = evaluate(topology, allocation)
    stats = {
        "candidates": candidates,
        "feasible": feasible,
        "engine": engine,
        "seconds": time.monotonic() - start,
    }
    return Solution(
        allocation=allocation,
        objective=breakdown.total_w,
        breakdown=breakdown,
        optimality=Optimality("optimal", breakdown.total_w, 0.0, tolerance),
        node_loads=node_loads(topology, allocation),
        assignment=tuple(assignment),
        stats=stats,
    )


def _literal(topology, scenario, host_ids, demand_ids, tolerance):
    scored = []
    for combo in itertools.product(range(len(host_ids)), repeat=len(demand_ids)):
        allocation = {demand_ids[d]: host_ids[s] for d, s in enumerate(combo)}
        if check_feasibility(topology, scenario, allocation):
            continue
        scored.append((combo, evaluate(topology, allocation).total_w))
    if not scored:
        raise Infeasible("no feasible allocation exists")
    best = min(obj for _, obj in scored)
    limit = best + tolerance * abs(best)
    # product() yields in lexicographic order, so the first hit is canonical
    for combo, obj in scored:
        if obj <= limit:
            return list(combo), len(scored)
    raise AssertionError("unreachable")


def _kernel(topology, scenario, host_ids, tolerance, deadline):
    lin, allowed, ptr, idx, w, cap, idle = pair_tables(topology, scenario)
    K = kernels.get()
    status, best, _, feasible = K.enumerate_assignments(lin, allowed, ptr, idx, w, cap, idle, math.inf, deadline)
    if status == kernels.STATUS_TIMEOUT:
        raise TimeoutError("brute force ran out of time")
    if status == kernels.STATUS_INFEASIBLE:
        raise Infeasible("no feasible allocation exists")
    limit = best + tolerance * abs(best)
    status, _, assign, _ = K.enumerate_assignments(lin, allowed, ptr, idx, w, cap, idle, limit, deadline)
    if status != kernels.STATUS_OK:
        raise TimeoutError("brute force ran out of time")
    return [int(s) for s in assign], int(feasible)


def pair_tables(topology: Topology, scenario: Scenario):
    """Per (demand, host) linear cost and resource weights, from specs and paths."""
    cat = scenario.catalog
    hs = hosts(topology)
    demands = list(scenario.demands)
    D, S = len(demands), len(hs)
    res_index: dict = {}
    cap: list[float] = []
    idle: list[float] = []

    def resource(key, capacity, p_idle):
        if key not in res_index:
            res_index[key] = len(cap)
            cap.append(capacity)
            idle.append(p_idle)
        return res_index[key]

    lin = np.zeros((D, S))
    ptr = np.zeros(D * S + 1, dtype=np.int64)
    idx: list[int] = []
    w: list[float] = []
    for d, dem in enumerate(demands):
        for s, h in enumerate(hs):
            spec = h.spec
            weights = defaultdict(float)
            weights[resource(("host", h.id), cat.effective_capacity(spec), spec.p_idle)] += dem.load
            cost = (spec.p_max - spec.p_idle) / spec.capacity * dem.load
            path = path_for(topology, dem, h.id)
            for dev, share in zip(path.devices, path.shares):
                dspec = topology.devices[dev].spec
                if dspec.passive:
                    continue
                weights[resource(("dev", dev), dspec.capacity, dspec.p_idle)] += dem.rate * share
                cost += (dspec.p_max - dspec.p_idle) / dspec.capacity * dem.rate * share
            if path.channel is not None:
                weights[resource(("chan", path.channel), topology.plan.capacity, 0.0)] += dem.rate
            lin[d, s] = cost
            for r in sorted(weights):
                idx.append(r)
                w.append(weights[r])
            ptr[d * S + s + 1] = len(idx)
    return (
        lin,
        np.ones((D, S), dtype=np.uint8),
        ptr,
        np.asarray(idx, dtype=np.int64),
        np.asarray(w, dtype=float),
        np.asarray(cap, dtype=float),
        np.asarray(idle, dtype=float),
    )
