"""Idle-plus-proportional power model and solver-independent evaluation."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .catalog import NetworkDeviceSpec, ProcessingSpec
from .topology import Topology, path_for

# relative slack on capacity comparisons; absorbs float summation order only
FEAS_RTOL = 1e-9


class OverCapacity(ValueError):
    def __init__(self, subject: str, amount: float, limit: float):
        super().__init__(f"{subject}: {amount:g} exceeds capacity {limit:g}")
        self.subject = subject
        self.amount = amount
        self.limit = limit


def within(amount: float, limit: float) -> bool:
    return amount <= limit * (1.0 + FEAS_RTOL)


def node_power(spec: ProcessingSpec, load: float, capacity_margin: float = 0.0) -> float:
    if load < 0:
        raise ValueError("load must be nonnegative")
    if not within(load, (1.0 - capacity_margin) * spec.capacity):
        raise OverCapacity(spec.id, load, (1.0 - capacity_margin) * spec.capacity)
    if load == 0:
        return 0.0
    return spec.p_idle + (spec.p_max - spec.p_idle) * load / spec.capacity


def device_power(spec: NetworkDeviceSpec, traffic: float) -> float:
    if traffic < 0:
        raise ValueError("traffic must be nonnegative")
    if spec.passive or traffic == 0:
        return 0.0
    if not within(traffic, spec.capacity):
        raise OverCapacity(spec.id, traffic, spec.capacity)
    return spec.p_idle + (spec.p_max - spec.p_idle) * traffic / spec.capacity


@dataclass
class PowerBreakdown:
    processing_w: float = 0.0
    network_w: float = 0.0
    total_w: float = 0.0
    per_node: dict[str, float] = field(default_factory=dict)
    per_device: dict[str, float] = field(default_factory=dict)


def loads_and_traffic(topo: Topology, allocation: Mapping[str, str]):
    """Per-host GFLOPs and per-device Gbps implied by ``allocation``.

    ``allocation`` maps demand id to host id.
    """
    demands = {d.id: d for d in topo.scenario.demands}
    loads: dict[str, float] = defaultdict(float)
    traffic: dict[str, float] = defaultdict(float)
    for d_id, h_id in allocation.items():
        d = demands[d_id]
        loads[h_id] += d.load
        path = path_for(topo, d, h_id)
        for dev, share in zip(path.devices, path.shares):
            traffic[dev] += d.rate * share
    return dict(loads), dict(traffic)


def evaluate(topo: Topology, allocation: Mapping[str, str]) -> PowerBreakdown:
    loads, traffic = loads_and_traffic(topo, allocation)
    margin = topo.catalog.capacity_margin
    out = PowerBreakdown()
    for h_id, load in loads.items():
        try:
            out.per_node[h_id] = node_power(topo.host(h_id).spec, load, margin)
        except OverCapacity as exc:
            raise OverCapacity(h_id, exc.amount, exc.limit) from None
    for dev_id, t in traffic.items():
        spec = topo.devices[dev_id].spec
        if spec.passive:
            continue
        try:
            out.per_device[dev_id] = device_power(spec, t)
        except OverCapacity as exc:
            raise OverCapacity(dev_id, exc.amount, exc.limit) from None
    out.processing_w = sum(out.per_node.values())
    out.network_w = sum(out.per_device.values())
    out.total_w = out.processing_w + out.network_w
    return out
