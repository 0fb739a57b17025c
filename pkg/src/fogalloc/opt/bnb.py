"""Exact solver: depth-first branch and bound over assignments.

The MILP has a special shape: once the assignment ``x`` is fixed, every
activation variable is forced (a host or device is on iff something routes
through it). The search therefore branches on demand placements only and
prices activations exactly as it goes. The bound for the unplaced demands
charges each one its cheapest placement, with the idle power of anything it
would newly switch on spread in proportion to its share of the load that
could still reach that element.

Two passes give the canonical answer: the first proves the optimal value,
the second walks assignments in lexicographic order and stops at the first
one within tolerance of it.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .problem import Infeasible, MilpProblem
from .solution import DEFAULT_TOLERANCE, Optimality, Solution, make_solution

# pruning slack while proving the optimum; far below the reporting tolerance
PROVE_RTOL = 1e-12


class TimeLimit(Exception):
    def __init__(self, incumbent: Solution | None, bound: float):
        gap = float("inf") if incumbent is None else incumbent.objective - bound
        super().__init__(f"time limit reached; gap {gap:g} W")
        self.incumbent = incumbent
        self.bound = bound
        self.gap = gap


@dataclass
class KernelData:
    lin: np.ndarray  # (D, S) per-placement linear cost
    allowed: np.ndarray  # (D, S) uint8
    ptr: np.ndarray
    idx: np.ndarray
    w: np.ndarray
    cap: np.ndarray
    idle: np.ndarray
    amort_den: np.ndarray  # (D + 1, R)
    cls_prev: np.ndarray  # previous interchangeable host, -1 if none
    host_res: np.ndarray  # resource index of each host

    def args(self):
        return (self.lin, self.allowed, self.ptr, self.idx, self.w, self.cap, self.idle,
                self.amort_den, self.cls_prev, self.host_res)


def kernel_data(problem: MilpProblem, symmetry: bool = True) -> KernelData:
    D, S = problem.n_demands, problem.n_hosts
    n_x = D * S
    A = problem.A_ub.tocsr()
    resources = []  # (cap, idle)
    entries = defaultdict(dict)  # pair -> {resource: weight}
    host_res = np.zeros(S, dtype=np.int64)
    for i, row in enumerate(problem.ub_rows):
        if row.family in ("link_host", "link_device"):
            continue  # implied by pricing activations from the weights
        lo, hi = A.indptr[i], A.indptr[i + 1]
        cols, vals = A.indices[lo:hi], A.data[lo:hi]
        act = [(c, v) for c, v in zip(cols, vals) if c >= n_x]
        r = len(resources)
        if act:
            (col, coef), = act
            resources.append((-coef + problem.b_ub[i], problem.c[col]))
            if row.family == "node_capacity":
                host_res[col - n_x] = r
        else:
            resources.append((problem.b_ub[i], 0.0))
        for c, v in zip(cols, vals):
            if c < n_x and v > 0:
                entries[c][r] = entries[c].get(r, 0.0) + v

    R = len(resources)
    cap = np.array([r[0] for r in resources], dtype=float)
    idle = np.array([r[1] for r in resources], dtype=float)
    ptr = np.zeros(n_x + 1, dtype=np.int64)
    idx, w = [], []
    for p in range(n_x):
        items = sorted(entries.get(p, {}).items())
        idx.extend(r for r, _ in items)
        w.extend(v for _, v in items)
        ptr[p + 1] = len(idx)
    idx = np.asarray(idx, dtype=np.int64)
    w = np.asarray(w, dtype=float)
    lin = problem.c[:n_x].reshape(D, S).copy()
    allowed = (problem.ub[:n_x].reshape(D, S) > 0).astype(np.uint8)

    # most weight each demand could put on each resource, summed over the suffix
    maxw = np.zeros((D, R))
    for d in range(D):
        for s in range(S):
            p = d * S + s
            for k in range(ptr[p], ptr[p + 1]):
                maxw[d, idx[k]] = max(maxw[d, idx[k]], w[k])
    amort_den = np.zeros((D + 1, R))
    for k in range(D - 1, -1, -1):
        amort_den[k] = amort_den[k + 1] + maxw[k]
    amort_den = np.minimum(amort_den, cap)

    cls_prev = np.full(S, -1, dtype=np.int64)
    if symmetry:
        cls_prev = _interchangeable(D, S, lin, allowed, ptr, idx, w, cap, idle)
    return KernelData(lin, allowed, ptr, idx, w, cap, idle, amort_den, cls_prev, host_res)


def _r(v: float) -> float:
    return float(f"{v:.12g}")


def _interchangeable(D, S, lin, allowed, ptr, idx, w, cap, idle) -> np.ndarray:
    """Link each host to the previous host it can swap with at no cost.

    Two hosts are interchangeable when every demand sees the same cost and
    the same shared resources through them, and their private resources
    (used by no other host) match one-to-one.
    """
    users = defaultdict(set)
    for d in range(D):
        for s in range(S):
            p = d * S + s
            for k in range(ptr[p], ptr[p + 1]):
                users[idx[k]].add(s)
    signatures = []
    for s in range(S):
        shared = []
        private = defaultdict(lambda: [0.0] * D)
        for d in range(D):
            p = d * S + s
            row = []
            for k in range(ptr[p], ptr[p + 1]):
                r = idx[k]
                if users[r] == {s}:
                    private[r][d] = _r(w[k])
                else:
                    row.append((int(r), _r(w[k])))
            shared.append(tuple(row))
        priv = sorted((_r(cap[r]), _r(idle[r]), tuple(ws)) for r, ws in private.items())
        signatures.append((
            tuple(_r(v) for v in lin[:, s]),
            tuple(int(v) for v in allowed[:, s]),
            tuple(shared),
            tuple(priv),
        ))
    cls_prev = np.full(S, -1, dtype=np.int64)
    last = {}
    for s, sig in enumerate(signatures):
        if sig in last:
            cls_prev[s] = last[sig]
        last[sig] = s
    return cls_prev


def lp_bound(problem: MilpProblem) -> float:
    """Objective of the continuous relaxation; a lower bound on the optimum."""
    res = linprog(
        problem.c,
        A_ub=problem.A_ub,
        b_ub=problem.b_ub,
        A_eq=problem.A_eq,
        b_eq=problem.b_eq,
        bounds=np.column_stack((np.zeros(problem.n_vars), problem.ub)),
        method="highs",
    )
    if res.status == 2:
        raise Infeasible("linear relaxation is infeasible")
    if res.status != 0:
        raise RuntimeError(f"LP relaxation failed: {res.message}")
    return float(res.fun)


def solve_exact(
    problem: MilpProblem,
    time_limit: float | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    kernel: str | None = None,
    symmetry: bool = True,
) -> Solution:
    start = time.monotonic()
    deadline = 0.0 if time_limit is None else start + time_limit
    K = kernels.get(kernel)
    data = kernel_data(problem, symmetry=symmetry)
    topo = problem.topology

    status, best_obj, best, nodes = K.branch_and_bound(
        *data.args(), np.inf, 0, PROVE_RTOL, deadline, 0
    )
    stats = {"nodes": int(nodes), "kernel": K.__name__.rsplit(".", 1)[-1]}

    def timed_out(incumbent_assign, incumbent_obj):
        stats["seconds"] = time.monotonic() - start
        try:
            bound = lp_bound(problem)
        except Infeasible:
            bound = float("inf")
        incumbent = None
        if incumbent_assign is not None and np.all(np.asarray(incumbent_assign) >= 0) and np.isfinite(incumbent_obj):
            opt = Optimality("time_limit", bound, incumbent_obj - bound, tolerance)
            incumbent = make_solution(topo, problem, incumbent_assign, opt, stats)
        return TimeLimit(incumbent, bound)

    if status == kernels.STATUS_TIMEOUT:
        raise timed_out(best, best_obj)
    if status == kernels.STATUS_INFEASIBLE:
        raise Infeasible("no feasible allocation exists", _witness(data, problem))

    cutoff = best_obj + tolerance * abs(best_obj)
    status, _, canon, nodes2 = K.branch_and_bound(*data.args(), cutoff, 1, PROVE_RTOL, deadline, 0)
    stats["nodes"] += int(nodes2)
    if status == kernels.STATUS_TIMEOUT:
        raise timed_out(best, best_obj)
    if status != kernels.STATUS_OK:
        raise RuntimeError("canonical pass lost the optimum")
    stats["seconds"] = time.monotonic() - start
    opt = Optimality("optimal", float(best_obj), 0.0, tolerance)
    sol = make_solution(topo, problem, canon, opt, stats)
    sol.optimality.gap = max(0.0, sol.objective - best_obj)
    return sol


def _witness(data: KernelData, problem: MilpProblem) -> str | None:
    """Demand with the fewest admissible hosts; a hint, not a proof."""
    if not problem.n_demands:
        return None
    counts = data.allowed.sum(axis=1)
    return problem.demand_ids[int(np.argmin(counts))]
