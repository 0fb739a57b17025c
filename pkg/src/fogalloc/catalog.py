"""Device specifications and scenario construction.

Every numeric parameter used by the optimizer lives here. Processing-node
idle power is not published alongside the capacity/max-power figures, so it
is derived as ``idle_fraction_processing * p_max``.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Mapping


class Tier(str, enum.Enum):
    UD = "UD"
    ROOM_FOG = "RoomFog"
    BUILDING_FOG = "BuildingFog"
    CAMPUS_FOG = "CampusFog"
    METRO_FOG = "MetroFog"
    CLOUD = "Cloud"


class DeviceKind(str, enum.Enum):
    AP = "AP"
    ONU = "ONU"
    OLT = "OLT"
    ETHERNET_SWITCH = "EthernetSwitch"
    AGGREGATION_SWITCH = "AggregationSwitch"
    EDGE_ROUTER = "EdgeRouter"
    OPTICAL_SWITCH = "OpticalSwitch"
    CORE_ROUTER = "CoreRouter"
    LEAF_SWITCH = "LeafSwitch"
    SPINE_SWITCH = "SpineSwitch"
    GATEWAY_ROUTER = "GatewayRouter"
    PASSIVE = "Passive"


class CatalogError(ValueError):
    """A catalog or scenario parameter breaks its invariants."""


@dataclass(frozen=True)
class ProcessingSpec:
    id: str
    tier: Tier
    capacity: float  # GFLOPS
    p_max: float  # W
    p_idle: float  # W

    def __post_init__(self):
        if not self.capacity > 0:
            raise CatalogError(f"{self.id}: capacity must be positive, got {self.capacity}")
        if not 0 <= self.p_idle <= self.p_max:
            raise CatalogError(f"{self.id}: need 0 <= p_idle <= p_max, got {self.p_idle}, {self.p_max}")


@dataclass(frozen=True)
class NetworkDeviceSpec:
    id: str
    kind: DeviceKind
    capacity: float  # Gbps
    p_max: float  # W
    p_idle: float  # W

    def __post_init__(self):
        if self.kind is DeviceKind.PASSIVE:
            if self.p_max != 0 or self.p_idle != 0:
                raise CatalogError(f"{self.id}: passive devices draw no power")
        elif not self.capacity > 0:
            raise CatalogError(f"{self.id}: capacity must be positive, got {self.capacity}")
        if not 0 <= self.p_idle <= self.p_max:
            raise CatalogError(f"{self.id}: need 0 <= p_idle <= p_max, got {self.p_idle}, {self.p_max}")

    @property
    def passive(self) -> bool:
        return self.kind is DeviceKind.PASSIVE


# (capacity GFLOPS, max power W)
PROCESSING_TABLE: dict[Tier, tuple[float, float]] = {
    Tier.UD: (12.888, 18.0),
    Tier.ROOM_FOG: (64.0, 65.0),
    Tier.BUILDING_FOG: (99.0, 305.0),
    Tier.CAMPUS_FOG: (121.6, 350.0),
    Tier.METRO_FOG: (403.2, 750.0),
    Tier.CLOUD: (1612.8, 1100.0),
}

# (max power W, idle power W, capacity Gbps)
NETWORK_TABLE: dict[DeviceKind, tuple[float, float, float]] = {
    DeviceKind.AP: (7.2, 4.32, 2.5),
    DeviceKind.ONU: (15.0, 9.0, 10.0),
    DeviceKind.OLT: (300.0, 180.0, 160.0),
    DeviceKind.ETHERNET_SWITCH: (435.0, 261.0, 240.0),
    DeviceKind.AGGREGATION_SWITCH: (435.0, 261.0, 240.0),
    DeviceKind.EDGE_ROUTER: (750.0, 450.0, 480.0),
    DeviceKind.OPTICAL_SWITCH: (63.2, 37.92, 100.0),
    DeviceKind.CORE_ROUTER: (344.0, 206.4, 3200.0),
    DeviceKind.LEAF_SWITCH: (508.0, 304.8, 480.0),
    DeviceKind.SPINE_SWITCH: (660.0, 360.0, 1440.0),
    DeviceKind.GATEWAY_ROUTER: (344.0, 206.4, 3200.0),
}

DEFAULT_IDLE_FRACTION = 0.6


@dataclass(frozen=True)
class DeviceCatalog:
    processing: Mapping[Tier, ProcessingSpec]
    network: Mapping[DeviceKind, NetworkDeviceSpec]
    idle_fraction_processing: float = DEFAULT_IDLE_FRACTION
    wavelength_capacity: float = 10.0  # Gbps per PON channel
    per_user_ap_rate: float = 2.5  # Gbps
    drr: float = 0.05  # Gbps per GFLOPs
    capacity_margin: float = 0.0

    def __post_init__(self):
        # plain dicts keep the catalog picklable for worker processes
        object.__setattr__(self, "processing", dict(self.processing))
        object.__setattr__(self, "network", dict(self.network))
        if not 0 <= self.idle_fraction_processing <= 1:
            raise CatalogError("idle_fraction_processing must lie in [0, 1]")
        if not 0 <= self.capacity_margin < 1:
            raise CatalogError("capacity_margin must lie in [0, 1)")
        for name in ("drr", "per_user_ap_rate", "wavelength_capacity"):
            if not getattr(self, name) > 0:
                raise CatalogError(f"{name} must be positive")
        missing = set(Tier) - set(self.processing)
        if missing:
            raise CatalogError(f"missing processing tiers: {sorted(t.value for t in missing)}")
        missing = set(DeviceKind) - set(self.network)
        if missing:
            raise CatalogError(f"missing network kinds: {sorted(k.value for k in missing)}")

    def __hash__(self):
        return hash((
            tuple(self.processing.items()),
            tuple(self.network.items()),
            self.idle_fraction_processing,
            self.wavelength_capacity,
            self.per_user_ap_rate,
            self.drr,
            self.capacity_margin,
        ))

    def effective_capacity(self, spec: ProcessingSpec) -> float:
        return (1.0 - self.capacity_margin) * spec.capacity

    def scaled(self, factor: float) -> "DeviceCatalog":
        """Copy with every power figure multiplied by ``factor``."""
        if not factor > 0:
            raise CatalogError("scale factor must be positive")
        proc = {
            t: dataclasses.replace(s, p_max=s.p_max * factor, p_idle=s.p_idle * factor)
            for t, s in self.processing.items()
        }
        net = {
            k: dataclasses.replace(s, p_max=s.p_max * factor, p_idle=s.p_idle * factor)
            for k, s in self.network.items()
        }
        return dataclasses.replace(self, processing=proc, network=net)


def _processing_specs(idle_fraction, table=PROCESSING_TABLE):
    return {
        tier: ProcessingSpec(tier.value, tier, cap, p_max, idle_fraction * p_max)
        for tier, (cap, p_max) in table.items()
    }


def _network_specs(table=NETWORK_TABLE):
    specs = {
        kind: NetworkDeviceSpec(kind.value, kind, cap, p_max, p_idle)
        for kind, (p_max, p_idle, cap) in table.items()
    }
    specs[DeviceKind.PASSIVE] = NetworkDeviceSpec("Passive", DeviceKind.PASSIVE, 0.0, 0.0, 0.0)
    return specs


def default_catalog() -> DeviceCatalog:
    return DeviceCatalog(
        processing=_processing_specs(DEFAULT_IDLE_FRACTION),
        network=_network_specs(),
    )


def build_catalog(
    *,
    processing: Mapping[Tier, tuple[float, float]] | None = None,
    network: Mapping[DeviceKind, tuple[float, float, float]] | None = None,
    **params,
) -> DeviceCatalog:
    """Catalog from (possibly partial) table overrides.

    ``processing`` maps tier -> (capacity, p_max); ``network`` maps kind ->
    (p_max, p_idle, capacity). Keyword ``params`` set the scalar fields.
    """
    idle_fraction = params.get("idle_fraction_processing", DEFAULT_IDLE_FRACTION)
    ptable = dict(PROCESSING_TABLE)
    ptable.update(processing or {})
    ntable = dict(NETWORK_TABLE)
    ntable.update(network or {})
    return DeviceCatalog(
        processing=_processing_specs(idle_fraction, ptable),
        network=_network_specs(ntable),
        **params,
    )


@dataclass(frozen=True)
class Layout:
    rooms: int = 4
    users_per_room: int = 8
    demanding_per_room: int = 2

    def __post_init__(self):
        if self.rooms < 1 or self.users_per_room < 1 or self.demanding_per_room < 0:
            raise CatalogError(f"invalid layout {self}")
        if self.demanding_per_room > self.users_per_room:
            raise CatalogError(
                f"demanding_per_room ({self.demanding_per_room}) exceeds users_per_room ({self.users_per_room})"
            )


@dataclass(frozen=True)
class Demand:
    id: str
    source_user: tuple[int, int]  # (room, user), zero-based
    load: float  # GFLOPs
    rate: float  # Gbps


@dataclass(frozen=True)
class Scenario:
    rooms: int
    users_per_room: int
    demanding_per_room: int
    demands: tuple[Demand, ...]
    catalog: DeviceCatalog = field(default_factory=default_catalog)

    @property
    def layout(self) -> Layout:
        return Layout(self.rooms, self.users_per_room, self.demanding_per_room)

    def demanding_users(self) -> set[tuple[int, int]]:
        return {d.source_user for d in self.demands}


def make_scenario(per_task_load: float, catalog: DeviceCatalog | None = None, layout: Layout | None = None) -> Scenario:
    catalog = catalog or default_catalog()
    layout = layout or Layout()
    if not per_task_load > 0:
        raise CatalogError(f"per-task load must be positive, got {per_task_load}")
    rate = catalog.drr * per_task_load
    demands = tuple(
        Demand(f"d{r + 1}.{u + 1}", (r, u), float(per_task_load), rate)
        for r in range(layout.rooms)
        for u in range(layout.demanding_per_room)
    )
    return Scenario(layout.rooms, layout.users_per_room, layout.demanding_per_room, demands, catalog)


def scenario_with_loads(loads, catalog: DeviceCatalog | None = None, layout: Layout | None = None) -> Scenario:
    """Scenario with one load per demand, listed room-major."""
    catalog = catalog or default_catalog()
    layout = layout or Layout()
    slots = [(r, u) for r in range(layout.rooms) for u in range(layout.demanding_per_room)]
    loads = [float(x) for x in loads]
    if len(loads) != len(slots):
        raise CatalogError(f"expected {len(slots)} loads, got {len(loads)}")
    if any(not x > 0 for x in loads):
        raise CatalogError("loads must be positive")
    demands = tuple(Demand(f"d{r + 1}.{u + 1}", (r, u), x, catalog.drr * x) for (r, u), x in zip(slots, loads))
    return Scenario(layout.rooms, layout.users_per_room, layout.demanding_per_room, demands, catalog)


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    detail: str = ""

    def __str__(self):
        return f"{self.code}({self.subject})" + (f": {self.detail}" if self.detail else "")


def validate_scenario(s: Scenario) -> list[Violation]:
    out = []
    if s.demanding_per_room > s.users_per_room:
        out.append(Violation("DemandingExceedsUsers", "layout", f"{s.demanding_per_room} > {s.users_per_room}"))
    if len(s.demands) != s.rooms * s.demanding_per_room:
        out.append(Violation("DemandCount", "layout", f"{len(s.demands)} != {s.rooms} x {s.demanding_per_room}"))
    seen = set()
    ids = set()
    for d in s.demands:
        r, u = d.source_user
        if not (0 <= r < s.rooms and 0 <= u < s.users_per_room):
            out.append(Violation("SourceOutOfRange", d.id, str(d.source_user)))
        if d.source_user in seen:
            out.append(Violation("DuplicateSource", d.id, str(d.source_user)))
        seen.add(d.source_user)
        if d.id in ids:
            out.append(Violation("DuplicateDemandId", d.id))
        ids.add(d.id)
        if d.rate > s.catalog.per_user_ap_rate:
            out.append(Violation("APRateExceeded", d.id, f"{d.rate} > {s.catalog.per_user_ap_rate} Gbps"))
        if not d.load > 0:
            out.append(Violation("NonPositiveLoad", d.id))
    return out
