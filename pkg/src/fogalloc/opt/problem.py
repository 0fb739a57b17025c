"""Path-based MILP for the placement problem.

Variables (all binary): ``x[d, s]`` assigns demand ``d`` to host ``s``,
``a[s]`` activates host ``s`` and ``y[e]`` activates powered device ``e``.
Routes are fixed per (demand, host), so there are no flow variables.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..catalog import Scenario
from ..power import within
from ..topology import HostInstance, Topology, hosts, path_for


class Infeasible(Exception):
    def __init__(self, message: str, witness: str | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class Row:
    family: str  # assign | node_capacity | device_capacity | wavelength | link_host | link_device
    subject: str


@dataclass
class MilpProblem:
    topology: Topology
    demand_ids: list[str]
    host_ids: list[str]
    device_ids: list[str]
    c: np.ndarray
    A_ub: sparse.csr_matrix
    b_ub: np.ndarray
    A_eq: sparse.csr_matrix
    b_eq: np.ndarray
    ub: np.ndarray  # per-variable upper bound (0 where a pair can never fit)
    ub_rows: list[Row] = field(default_factory=list)
    eq_rows: list[Row] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    @property
    def n_demands(self) -> int:
        return len(self.demand_ids)

    @property
    def n_hosts(self) -> int:
        return len(self.host_ids)

    @property
    def n_vars(self) -> int:
        return self.c.size

    def x(self, d: int, s: int) -> int:
        return d * self.n_hosts + s

    def a(self, s: int) -> int:
        return self.n_demands * self.n_hosts + s

    def y(self, e: int) -> int:
        return self.n_demands * self.n_hosts + self.n_hosts + e

    def family_count(self, family: str) -> int:
        return sum(1 for r in self.ub_rows + self.eq_rows if r.family == family)

    def complete(self, assignment) -> np.ndarray:
        """Full 0/1 vector for ``assignment`` (host index per demand)."""
        v = np.zeros(self.n_vars)
        for d, s in enumerate(assignment):
            v[self.x(d, s)] = 1.0
        # activation variables follow from the assignment
        v[self.a(0) :] = (self.activation_incidence @ v[: self.a(0)] > 0.5).astype(float)
        return v

    def objective_of(self, assignment) -> float:
        return float(self.c @ self.complete(assignment))

    @property
    def activation_incidence(self) -> sparse.csr_matrix:
        """0/1 incidence from assignment variables to activation variables."""
        if not hasattr(self, "_incidence"):
            self._incidence = _activation_incidence(self)
        return self._incidence


def _activation_incidence(p: MilpProblem) -> sparse.csr_matrix:
    n_x = p.n_demands * p.n_hosts
    rows, cols = [], []
    topo = p.topology
    demands = topo.scenario.demands
    dev_index = {e: i for i, e in enumerate(p.device_ids)}
    for d, dem in enumerate(demands):
        for s, h in enumerate(p.host_ids):
            rows.append(s)
            cols.append(p.x(d, s))
            for dev in path_for(topo, dem, h).devices:
                if dev in dev_index:
                    rows.append(p.n_hosts + dev_index[dev])
                    cols.append(p.x(d, s))
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (rows, cols)), shape=(p.n_hosts + len(p.device_ids), n_x))


def _fits_alone(topo: Topology, demand, host: HostInstance) -> bool:
    cat = topo.catalog
    if not within(demand.load, cat.effective_capacity(host.spec)):
        return False
    path = path_for(topo, demand, host.id)
    for dev, share in zip(path.devices, path.shares):
        spec = topo.devices[dev].spec
        if not spec.passive and not within(demand.rate * share, spec.capacity):
            return False
    if path.channel is not None and not within(demand.rate, topo.plan.capacity):
        return False
    return True


def formulate(topology: Topology, scenario: Scenario | None = None) -> MilpProblem:
    scenario = scenario or topology.scenario
    if scenario is not topology.scenario:
        raise ValueError("scenario does not match the topology it was built from")
    cat = scenario.catalog
    demands = list(scenario.demands)
    hs = hosts(topology)
    D, S = len(demands), len(hs)

    # powered devices reachable by any candidate path, in topology order
    used = set()
    paths = {}
    for d, dem in enumerate(demands):
        for s, h in enumerate(hs):
            p = path_for(topology, dem, h.id)
            paths[d, s] = p
            used.update(dev for dev in p.devices if not topology.devices[dev].passive)
    device_ids = [e for e in topology.devices if e in used]
    dev_index = {e: i for i, e in enumerate(device_ids)}
    E = len(device_ids)
    n = D * S + S + E

    def xi(d, s):
        return d * S + s

    c = np.zeros(n)
    ub = np.ones(n)
    names = [f"x[{dem.id},{h.id}]" for dem in demands for h in hs]
    names += [f"a[{h.id}]" for h in hs] + [f"y[{e}]" for e in device_ids]

    for s, h in enumerate(hs):
        spec = h.spec
        c[D * S + s] = spec.p_idle
        slope = (spec.p_max - spec.p_idle) / spec.capacity
        for d, dem in enumerate(demands):
            c[xi(d, s)] += slope * dem.load
    for e, dev in enumerate(device_ids):
        spec = topology.devices[dev].spec
        c[D * S + S + e] = spec.p_idle
    for (d, s), p in paths.items():
        for dev, share in zip(p.devices, p.shares):
            if dev in dev_index:
                spec = topology.devices[dev].spec
                c[xi(d, s)] += (spec.p_max - spec.p_idle) / spec.capacity * demands[d].rate * share

    for d, dem in enumerate(demands):
        fits = False
        for s, h in enumerate(hs):
            if _fits_alone(topology, dem, h):
                fits = True
            else:
                ub[xi(d, s)] = 0.0
        if not fits:
            raise Infeasible(f"demand {dem.id} ({dem.load:g} GFLOPs) fits no host", dem.id)

    ub_r, ub_c, ub_v, b_ub, ub_rows = [], [], [], [], []

    def add_row(entries, rhs, row):
        i = len(b_ub)
        for col, val in entries:
            ub_r.append(i)
            ub_c.append(col)
            ub_v.append(val)
        b_ub.append(rhs)
        ub_rows.append(row)

    # processing capacity, tied to host activation
    for s, h in enumerate(hs):
        cap = cat.effective_capacity(h.spec)
        entries = [(xi(d, s), dem.load) for d, dem in enumerate(demands)]
        add_row(entries + [(D * S + s, -cap)], 0.0, Row("node_capacity", h.id))

    # device capacity, tied to device activation
    dev_terms = defaultdict(list)
    chan_terms = defaultdict(list)
    for (d, s), p in paths.items():
        for dev, share in zip(p.devices, p.shares):
            if dev in dev_index:
                dev_terms[dev].append((xi(d, s), demands[d].rate * share))
        if p.channel is not None:
            chan_terms[p.channel].append((xi(d, s), demands[d].rate))
    for e, dev in enumerate(device_ids):
        cap = topology.devices[dev].spec.capacity
        add_row(dev_terms[dev] + [(D * S + S + e, -cap)], 0.0, Row("device_capacity", dev))

    # shared PON channels, one row per (source room, label) instance
    for key in sorted(chan_terms, key=lambda k: (k[0], k[1])):
        add_row(chan_terms[key], topology.plan.capacity, Row("wavelength", f"r{key[0] + 1}:{key[1]}"))

    # valid inequalities x <= a, x <= y; they tighten the relaxation only
    for s, h in enumerate(hs):
        for d in range(D):
            if ub[xi(d, s)] > 0:
                add_row([(xi(d, s), 1.0), (D * S + s, -1.0)], 0.0, Row("link_host", f"{demands[d].id}->{h.id}"))
    for (d, s), p in paths.items():
        if ub[xi(d, s)] == 0:
            continue
        for dev in dict.fromkeys(p.devices):
            if dev in dev_index:
                add_row(
                    [(xi(d, s), 1.0), (D * S + S + dev_index[dev], -1.0)],
                    0.0,
                    Row("link_device", f"{demands[d].id}->{hs[s].id}@{dev}"),
                )

    A_ub = sparse.csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), n))
    eq_r, eq_c = [], []
    for d in range(D):
        for s in range(S):
            eq_r.append(d)
            eq_c.append(xi(d, s))
    A_eq = sparse.csr_matrix((np.ones(len(eq_r)), (eq_r, eq_c)), shape=(D, n))
    eq_rows = [Row("assign", dem.id) for dem in demands]

    return MilpProblem(
        topology=topology,
        demand_ids=[dem.id for dem in demands],
        host_ids=[h.id for h in hs],
        device_ids=device_ids,
        c=c,
        A_ub=A_ub,
        b_ub=np.asarray(b_ub, dtype=float),
        A_eq=A_eq,
        b_eq=np.ones(D),
        ub=ub,
        ub_rows=ub_rows,
        eq_rows=eq_rows,
        names=names,
    )


def _lp_name(name: str) -> str:
    out = []
    for ch in name:
        out.append(ch if ch.isascii() and (ch.isalnum() or ch in "_.") else "_")
    return "".join(out)


def to_lp(problem: MilpProblem) -> str:
    """CPLEX LP text for cross-checking with third-party solvers."""
    names = [_lp_name(nm) for nm in problem.names]

    def expr(coefs):
        parts = []
        for j, v in coefs:
            if v == 0:
                continue
            sign = "-" if v < 0 else "+"
            parts.append(f"{sign} {abs(v):.17g} {names[j]}")
        text = " ".join(parts) or "0"
        return text[2:] if text.startswith("+ ") else text

    lines = ["\\ energy-minimizing placement", "Minimize", " obj: " + expr(enumerate(problem.c)), "Subject To"]
    A = problem.A_eq.tocsr()
    for i, row in enumerate(problem.eq_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        coefs = zip(A.indices[lo:hi], A.data[lo:hi])
        lines.append(f" {_lp_name(row.family)}_{i}: {expr(coefs)} = {problem.b_eq[i]:.17g}")
    A = problem.A_ub.tocsr()
    for i, row in enumerate(problem.ub_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        coefs = zip(A.indices[lo:hi], A.data[lo:hi])
        lines.append(f" {_lp_name(row.family)}_{i}: {expr(coefs)} <= {problem.b_ub[i]:.17g}")
    lines.append("Bounds")
    for j in np.flatnonzero(problem.ub == 0):
        lines.append(f" {names[j]} = 0")
    lines.append("Binaries")
    for k in range(0, len(names), 8):
        lines.append(" " + " ".join(names[k : k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"
