"""Device graphs for the PON, Spine-and-Leaf and cloud-only architectures.

Every (demand, host) pair has exactly one route, so paths are precomputed
from the construction rules instead of searched for. Flow conservation and
wavelength continuity therefore hold by construction.

Identifiers are 1-based to match the room labels used in reports
(``r1RF`` is the room fog of the first room); ``Demand.source_user`` stays
zero-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from .catalog import (
    DeviceCatalog,
    DeviceKind,
    NetworkDeviceSpec,
    ProcessingSpec,
    Scenario,
    Tier,
    validate_scenario,
)


class Architecture(str, enum.Enum):
    PON = "PonBased"
    SPINE_LEAF = "SpineLeaf"
    CLOUD = "CloudOnly"

    @classmethod
    def parse(cls, value: "str | Architecture") -> "Architecture":
        if isinstance(value, cls):
            return value
        aliases = {"pon": cls.PON, "sl": cls.SPINE_LEAF, "cloud": cls.CLOUD}
        key = str(value)
        try:
            return cls(key)
        except ValueError:
            try:
                return aliases[key.lower()]
            except KeyError:
                raise ValueError(f"unknown architecture {value!r}") from None


class TopologyError(ValueError):
    pass


class UnknownHost(TopologyError, KeyError):
    pass


class NotApplicable(TopologyError):
    pass


INTRA = "λ_intra"
OLT_CHANNEL = "λ_olt"


def _inter_label(offset: int) -> str:
    return f"λ_{chr(ord('a') + offset - 1)}"


@dataclass(frozen=True)
class DeviceInstance:
    id: str
    spec: NetworkDeviceSpec
    location: str

    @property
    def kind(self) -> DeviceKind:
        return self.spec.kind

    @property
    def passive(self) -> bool:
        return self.spec.passive


@dataclass(frozen=True)
class HostInstance:
    id: str
    spec: ProcessingSpec
    location: str
    attach_path_stub: tuple[str, ...]
    room: int | None = None  # zero-based
    user: int | None = None  # zero-based, UD hosts only

    @property
    def tier(self) -> Tier:
        return self.spec.tier


@dataclass(frozen=True)
class Path:
    devices: tuple[str, ...]
    shares: tuple[float, ...]  # fraction of the flow carried by each device
    wavelength: str | None = None
    channel: tuple[int, str] | None = None  # (source room, label) PON channel instance

    def __post_init__(self):
        if len(self.devices) != len(self.shares):
            raise TopologyError("devices and shares differ in length")

    def __iter__(self):
        return iter(self.devices)

    def __len__(self):
        return len(self.devices)


@dataclass(frozen=True)
class WavelengthPlan:
    """Channel label per (source room, destination room or ``"OLT"``)."""

    channels: dict
    capacity: float

    def label(self, source_room: int, destination) -> str:
        return self.channels[(source_room, destination)]

    @property
    def labels(self) -> set[str]:
        return set(self.channels.values())


def cyclic_plan(rooms: int, capacity: float) -> WavelengthPlan:
    # AWGR cyclic routing: channel offset k reaches room (source + k) mod rooms
    channels = {}
    for src in range(rooms):
        channels[(src, src)] = INTRA
        channels[(src, "OLT")] = OLT_CHANNEL
        for k in range(1, rooms):
            channels[(src, (src + k) % rooms)] = _inter_label(k)
    return WavelengthPlan(channels, capacity)


@dataclass
class Topology:
    architecture: Architecture
    scenario: Scenario
    devices: dict[str, DeviceInstance] = field(default_factory=dict)
    all_hosts: list[HostInstance] = field(default_factory=list)
    edges: set[frozenset] = field(default_factory=set)
    egress: str | None = None
    upstream: dict[str, tuple[str, ...]] = field(default_factory=dict)  # host id -> chain after egress
    n_core: int = 0
    allow_self_processing: bool = False
    plan: WavelengthPlan | None = None
    _path_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def catalog(self) -> DeviceCatalog:
        return self.scenario.catalog

    @property
    def graph(self) -> Architecture:
        """The physical fabric; cloud-only placement rides on the PON graph."""
        return Architecture.SPINE_LEAF if self.architecture is Architecture.SPINE_LEAF else Architecture.PON

    def host(self, host_id: str) -> HostInstance:
        for h in self.all_hosts:
            if h.id == host_id:
                return h
        raise UnknownHost(host_id)

    def host_ids(self) -> list[str]:
        return [h.id for h in hosts(self)]

    def _add_device(self, dev_id: str, kind: DeviceKind, location: str):
        if dev_id in self.devices:
            raise TopologyError(f"duplicate device id {dev_id}")
        self.devices[dev_id] = DeviceInstance(dev_id, self.catalog.network[kind], location)

    def _link(self, a: str, b: str):
        self.edges.add(frozenset((a, b)))

    def neighbors(self, node_id: str) -> list[str]:
        out = []
        for e in self.edges:
            if node_id in e:
                out.extend(x for x in e if x != node_id)
        return sorted(out)

    def count(self, kind: DeviceKind) -> int:
        return sum(1 for d in self.devices.values() if d.kind is kind)


def ap_id(room: int, user: int) -> str:
    return f"r{room + 1}AP{user + 1}"


def onu_id(room: int, user: int) -> str:
    return f"r{room + 1}ONU{user + 1}"


def rf_id(room: int) -> str:
    return f"r{room + 1}RF"


def ud_id(room: int, user: int) -> str:
    return f"r{room + 1}UD{user + 1}"


def leaf_id(room: int) -> str:
    return f"r{room + 1}LEAF"


def _check(scenario: Scenario):
    problems = validate_scenario(scenario)
    if problems:
        raise TopologyError("invalid scenario: " + "; ".join(map(str, problems)))


def _room_hosts(topo: Topology, room: int, rf_stub: tuple[str, ...], ud_stub):
    s = topo.scenario
    cat = topo.catalog
    loc = f"room{room + 1}"
    topo.all_hosts.append(HostInstance(rf_id(room), cat.processing[Tier.ROOM_FOG], loc, rf_stub, room))
    for u in range(s.users_per_room):
        topo.all_hosts.append(
            HostInstance(ud_id(room, u), cat.processing[Tier.UD], loc, ud_stub(u), room, u)
        )


def build_pon(scenario: Scenario, architecture: Architecture = Architecture.PON) -> Topology:
    _check(scenario)
    topo = Topology(architecture, scenario)
    topo.plan = cyclic_plan(scenario.rooms, scenario.catalog.wavelength_capacity)
    topo._add_device("AWGR1", DeviceKind.PASSIVE, "building")
    topo._add_device("AWGR2", DeviceKind.PASSIVE, "building")
    topo._add_device("OLT", DeviceKind.OLT, "building")
    topo._link("AWGR2", "OLT")
    for r in range(scenario.rooms):
        loc = f"room{r + 1}"
        spl, cpl = f"r{r + 1}SPL", f"r{r + 1}CPL"
        topo._add_device(spl, DeviceKind.PASSIVE, loc)
        topo._add_device(cpl, DeviceKind.PASSIVE, loc)
        for awgr in ("AWGR1", "AWGR2"):
            topo._link(spl, awgr)
            topo._link(cpl, awgr)
        for u in range(scenario.users_per_room):
            topo._add_device(ap_id(r, u), DeviceKind.AP, loc)
            topo._add_device(onu_id(r, u), DeviceKind.ONU, loc)
            topo._link(ap_id(r, u), onu_id(r, u))
            topo._link(onu_id(r, u), spl)
            topo._link(onu_id(r, u), cpl)
        rf_onu = f"r{r + 1}ONU_RF"
        topo._add_device(rf_onu, DeviceKind.ONU, loc)
        topo._link(rf_onu, spl)
        topo._link(rf_onu, cpl)
        topo._link(rf_id(r), rf_onu)
        for u in range(scenario.users_per_room):
            topo._link(ud_id(r, u), ap_id(r, u))
        _room_hosts(
            topo, r, (rf_onu,), lambda u, r=r: (ap_id(r, u), onu_id(r, u))
        )
    topo.all_hosts.append(HostInstance("BF", scenario.catalog.processing[Tier.BUILDING_FOG], "building", ("OLT",)))
    topo._link("BF", "OLT")
    topo.egress = "OLT"
    topo.upstream["BF"] = ()
    return topo


def build_spine_leaf(scenario: Scenario) -> Topology:
    _check(scenario)
    topo = Topology(Architecture.SPINE_LEAF, scenario)
    topo._add_device("SPINE1", DeviceKind.SPINE_SWITCH, "building")
    topo._add_device("SPINE2", DeviceKind.SPINE_SWITCH, "building")
    topo._add_device("GW", DeviceKind.GATEWAY_ROUTER, "building")
    topo._link("SPINE1", "GW")
    topo._link("SPINE2", "GW")
    for r in range(scenario.rooms):
        loc = f"room{r + 1}"
        leaf = leaf_id(r)
        topo._add_device(leaf, DeviceKind.LEAF_SWITCH, loc)
        topo._link(leaf, "SPINE1")
        topo._link(leaf, "SPINE2")
        for u in range(scenario.users_per_room):
            topo._add_device(ap_id(r, u), DeviceKind.AP, loc)
            topo._link(ap_id(r, u), leaf)
            topo._link(ud_id(r, u), ap_id(r, u))
        topo._link(rf_id(r), leaf)
        _room_hosts(topo, r, (leaf,), lambda u, r=r: (ap_id(r, u),))
    topo.all_hosts.append(HostInstance("BF", scenario.catalog.processing[Tier.BUILDING_FOG], "building", ("GW",)))
    topo._link("BF", "GW")
    topo.egress = "GW"
    topo.upstream["BF"] = ()
    return topo


def build_upstream(topo: Topology, n_core: int = 1) -> Topology:
    """Append campus, metro, core and datacenter levels above the egress."""
    if topo.egress is None or topo.n_core:
        raise TopologyError("build_upstream needs a fresh building topology")
    if n_core < 1:
        raise TopologyError("n_core must be at least 1")
    cat = topo.catalog
    chain: list[str] = []

    def hop(dev_id, kind, location):
        topo._add_device(dev_id, kind, location)
        topo._link(chain[-1] if chain else topo.egress, dev_id)
        chain.append(dev_id)

    hop("ETH_CAMPUS", DeviceKind.ETHERNET_SWITCH, "campus")
    topo.all_hosts.append(HostInstance("CF", cat.processing[Tier.CAMPUS_FOG], "campus", ("ETH_CAMPUS",)))
    topo._link("CF", "ETH_CAMPUS")
    topo.upstream["CF"] = tuple(chain)
    hop("AGG", DeviceKind.AGGREGATION_SWITCH, "metro")
    hop("EDGE", DeviceKind.EDGE_ROUTER, "metro")
    topo.all_hosts.append(HostInstance("MF", cat.processing[Tier.METRO_FOG], "metro", ("EDGE",)))
    topo._link("MF", "EDGE")
    topo.upstream["MF"] = tuple(chain)
    for i in range(1, n_core + 1):
        hop(f"OS{i}", DeviceKind.OPTICAL_SWITCH, "core")
        hop(f"CR{i}", DeviceKind.CORE_ROUTER, "core")
    hop("ETH_DC", DeviceKind.ETHERNET_SWITCH, "datacenter")
    topo.all_hosts.append(HostInstance("CC", cat.processing[Tier.CLOUD], "datacenter", ("ETH_DC",)))
    topo._link("CC", "ETH_DC")
    topo.upstream["CC"] = tuple(chain)
    topo.n_core = n_core
    topo._path_cache.clear()
    return topo


def build_topology(
    scenario: Scenario,
    architecture: Architecture | str = Architecture.PON,
    n_core: int = 1,
    allow_self_processing: bool = False,
) -> Topology:
    architecture = Architecture.parse(architecture)
    if architecture is Architecture.SPINE_LEAF:
        topo = build_spine_leaf(scenario)
    else:
        topo = build_pon(scenario, architecture)
    topo.allow_self_processing = allow_self_processing
    return build_upstream(topo, n_core)


def hosts(topo: Topology, architecture: Architecture | str | None = None) -> list[HostInstance]:
    """Candidate hosts in the fixed global order used for tie-breaking.

    Order: per room the room fog then its user devices, then BF, CF, MF, CC.
    """
    architecture = topo.architecture if architecture is None else Architecture.parse(architecture)
    if architecture is Architecture.CLOUD:
        return [h for h in topo.all_hosts if h.tier is Tier.CLOUD]
    demanding = topo.scenario.demanding_users()
    return [
        h
        for h in topo.all_hosts
        if not (h.tier is Tier.UD and (h.room, h.user) in demanding and not topo.allow_self_processing)
    ]


def wavelength_plan(topo: Topology) -> WavelengthPlan:
    if topo.graph is not Architecture.PON or topo.plan is None:
        raise NotApplicable("wavelength plans exist only on the PON graph")
    return topo.plan


def _pon_route(topo: Topology, room: int, user: int, host: HostInstance) -> tuple[list[str], str | None, tuple | None]:
    src = [ap_id(room, user), onu_id(room, user)]
    plan = topo.plan
    if host.room is not None:
        dst = host.room
        label = plan.label(room, dst)
        tail = [f"r{room + 1}SPL", "AWGR1", f"r{dst + 1}CPL"]
        if host.tier is Tier.ROOM_FOG:
            end = [f"r{dst + 1}ONU_RF"]
        else:
            end = [onu_id(dst, host.user), ap_id(dst, host.user)]
        return src + tail + end, label, (room, label)
    label = plan.label(room, "OLT")
    devs = src + [f"r{room + 1}SPL", "AWGR2", "OLT"] + list(topo.upstream[host.id])
    return devs, label, (room, label)


def _sl_route(topo: Topology, room: int, user: int, host: HostInstance) -> list[tuple[str, float]]:
    src = [(ap_id(room, user), 1.0), (leaf_id(room), 1.0)]
    spines = [("SPINE1", 0.5), ("SPINE2", 0.5)]
    if host.room is not None:
        dst = host.room
        mid = [] if dst == room else spines + [(leaf_id(dst), 1.0)]
        end = [] if host.tier is Tier.ROOM_FOG else [(ap_id(dst, host.user), 1.0)]
        return src + mid + end
    return src + spines + [("GW", 1.0)] + [(d, 1.0) for d in topo.upstream[host.id]]


def path_for(topo: Topology, demand, host: HostInstance | str) -> Path:
    host_id = host if isinstance(host, str) else host.id
    key = (demand.source_user, host_id)
    cached = topo._path_cache.get(key)
    if cached is not None:
        return cached
    if host_id not in {h.id for h in hosts(topo)}:
        raise UnknownHost(host_id)
    h = topo.host(host_id)
    room, user = demand.source_user
    if h.tier is Tier.UD and (h.room, h.user) == (room, user):
        path = Path((), ())  # local processing on the demanding device
    elif topo.graph is Architecture.PON:
        devs, label, channel = _pon_route(topo, room, user, h)
        path = Path(tuple(devs), (1.0,) * len(devs), label, channel)
    else:
        hops = _sl_route(topo, room, user, h)
        path = Path(tuple(d for d, _ in hops), tuple(s for _, s in hops))
    topo._path_cache[key] = path
    return path


def active_devices(topo: Topology, path: Path) -> list[str]:
    """Powered devices on a path, passive elements dropped."""
    return [d for d in path.devices if not topo.devices[d].passive]


def dump(topo: Topology) -> str:
    """Plain-text adjacency listing.

    One line per node, tab-separated: id, kind, location, comma-separated
    neighbor ids. Hosts are listed with their tier as the kind.
    """
    lines = []
    nodes: Iterable = [(d.id, d.kind.value, d.location) for d in topo.devices.values()]
    nodes = list(nodes) + [(h.id, h.tier.value, h.location) for h in topo.all_hosts]
    for node_id, kind, location in nodes:
        lines.append("\t".join((node_id, kind, location, ",".join(topo.neighbors(node_id)))))
    return "\n".join(lines) + "\n"
