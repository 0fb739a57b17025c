from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..catalog import Scenario, Violation
from ..power import PowerBreakdown, evaluate, within
from ..topology import Topology, hosts, path_for

DEFAULT_TOLERANCE = 1e-9


@dataclass
class Optimality:
    status: str  # optimal | time_limit
    bound: float
    gap: float
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def proven(self) -> bool:
        return self.status == "optimal"


@dataclass
class Solution:
    allocation: dict[str, str]  # demand id -> host id
    objective: float
    breakdown: PowerBreakdown
    optimality: Optimality
    node_loads: dict[str, float]
    assignment: tuple[int, ...] = ()  # host index per demand, in problem order
    stats: dict = field(default_factory=dict)

    def active_hosts(self) -> list[str]:
        return [h for h, load in self.node_loads.items() if load > 0]


def node_loads(topo: Topology, allocation: Mapping[str, str]) -> dict[str, float]:
    demands = {d.id: d for d in topo.scenario.demands}
    loads: dict[str, float] = {}
    for h in hosts(topo):
        loads[h.id] = 0.0
    for d_id, h_id in allocation.items():
        loads[h_id] = loads.get(h_id, 0.0) + demands[d_id].load
    return {h: v for h, v in loads.items() if v > 0}


def check_feasibility(topo: Topology, scenario: Scenario | None, allocation: Mapping[str, str]) -> list[Violation]:
    scenario = scenario or topo.scenario
    cat = scenario.catalog
    out: list[Violation] = []
    candidates = {h.id: h for h in hosts(topo)}
    demands = {d.id: d for d in scenario.demands}
    for d_id in demands:
        if d_id not in allocation:
            out.append(Violation("Unassigned", d_id))
    for d_id, h_id in allocation.items():
        if d_id not in demands:
            out.append(Violation("UnknownDemand", d_id))
        elif h_id not in candidates:
            out.append(Violation("UnknownHost", h_id, f"demand {d_id}"))
    if out:
        return out

    loads: dict[str, float] = defaultdict(float)
    traffic: dict[str, float] = defaultdict(float)
    channels: dict[tuple, float] = defaultdict(float)
    for d_id, h_id in allocation.items():
        d = demands[d_id]
        loads[h_id] += d.load
        path = path_for(topo, d, h_id)
        for dev, share in zip(path.devices, path.shares):
            traffic[dev] += d.rate * share
        if path.channel is not None:
            channels[path.channel] += d.rate
    for h_id, load in loads.items():
        cap = cat.effective_capacity(candidates[h_id].spec)
        if not within(load, cap):
            out.append(Violation("NodeOverCapacity", h_id, f"{load:g} > {cap:g} GFLOPs"))
    for dev, t in traffic.items():
        spec = topo.devices[dev].spec
        if not spec.passive and not within(t, spec.capacity):
            out.append(Violation("DeviceOverCapacity", dev, f"{t:g} > {spec.capacity:g} Gbps"))
    for (room, label), t in channels.items():
        if not within(t, topo.plan.capacity):
            out.append(
                Violation("WavelengthOverCapacity", label, f"room {room + 1}: {t:g} > {topo.plan.capacity:g} Gbps")
            )
    return out


class NotATie(ValueError):
    pass


def canonicalize(solutions: Sequence[Solution], tolerance: float = DEFAULT_TOLERANCE) -> Solution:
    """Pick the lexicographically smallest of several equal-objective solutions.

    Assignment vectors are compared as host indices in demand order, using
    the fixed host ordering of :func:`fogalloc.topology.hosts`.
    """
    if not solutions:
        raise ValueError("no candidate solutions")
    lo = min(s.objective for s in solutions)
    hi = max(s.objective for s in solutions)
    if hi - lo > tolerance * max(abs(lo), abs(hi), 1.0):
        raise NotATie(f"objectives differ by {hi - lo:g} W")
    return min(solutions, key=lambda s: s.assignment)


def make_solution(topo: Topology, problem, assignment: Sequence[int], optimality: Optimality, stats=None) -> Solution:
    allocation = {problem.demand_ids[d]: problem.host_ids[s] for d, s in enumerate(assignment)}
    return Solution(
        allocation=allocation,
        objective=problem.objective_of(assignment),
        breakdown=evaluate(topo, allocation),
        optimality=optimality,
        node_loads=node_loads(topo, allocation),
        assignment=tuple(int(s) for s in assignment),
        stats=dict(stats or {}),
    )
