"""Energy-optimal allocation of processing demands across fog and cloud tiers."""

from .catalog import (
    DeviceCatalog,
    DeviceKind,
    Layout,
    Scenario,
    Tier,
    build_catalog,
    default_catalog,
    make_scenario,
    scenario_with_loads,
    validate_scenario,
)
from .power import PowerBreakdown, device_power, evaluate, node_power
from .topology import Architecture, build_topology, hosts, path_for

__version__ = "0.1.0"

__all__ = [
    "Architecture",
    "DeviceCatalog",
    "DeviceKind",
    "Layout",
    "PowerBreakdown",
    "Scenario",
    "Tier",
    "build_catalog",
    "build_topology",
    "default_catalog",
    "device_power",
    "evaluate",
    "hosts",
    "make_scenario",
    "node_power",
    "path_for",
    "scenario_with_loads",
    "validate_scenario",
]
