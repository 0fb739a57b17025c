"""Pure-Python search kernels; same contract as the compiled ``_search``.

Problem data arrives flattened: for pair ``p = d * S + s`` the resources it
loads are ``idx[ptr[p]:ptr[p + 1]]`` with weights ``w[...]``. A resource is
a host, a powered device or a shared channel; it draws ``idle[r]`` once any
weight sits on it and may carry at most ``cap[r]``.
"""

from __future__ import annotations

import math
import time

import numpy as np

FEAS_RTOL = 1e-9
STATUS_OK = 0
STATUS_INFEASIBLE = 1
STATUS_TIMEOUT = 2
STATUS_TOO_MANY = 3

_CHECK_EVERY = 256


class _State:
    def __init__(self, D, S, ptr, idx, w, cap, idle):
        self.D, self.S = D, S
        self.ptr, self.idx, self.w = ptr, idx, w
        self.cap = cap * (1.0 + FEAS_RTOL)
        self.idle = idle
        self.load = np.zeros(cap.size)
        self.count = np.zeros(cap.size, dtype=np.int64)

    def pair(self, d, s):
        p = d * self.S + s
        lo, hi = self.ptr[p], self.ptr[p + 1]
        return self.idx[lo:hi], self.w[lo:hi]

    def fits(self, d, s):
        r, w = self.pair(d, s)
        return bool(np.all(self.load[r] + w <= self.cap[r]))

    def opening_cost(self, d, s):
        r, _ = self.pair(d, s)
        return float(self.idle[r][self.count[r] == 0].sum())

    def push(self, d, s):
        r, w = self.pair(d, s)
        self.load[r] += w
        self.count[r] += 1

    def pop(self, d, s):
        r, w = self.pair(d, s)
        self.load[r] -= w
        self.count[r] -= 1


def _objective(lin, assign, st: _State) -> float:
    total = 0.0
    for d, s in enumerate(assign):
        total += lin[d, s]
    for r in range(st.idle.size):
        if st.count[r] > 0:
            total += st.idle[r]
    return total


def _dense(D, S, R, ptr, idx, w):
    W = np.zeros((D, S, R))
    for d in range(D):
        for s in range(S):
            p = d * S + s
            for k in range(ptr[p], ptr[p + 1]):
                W[d, s, idx[k]] += w[k]
    return W


def branch_and_bound(lin, allowed, ptr, idx, w, cap, idle, amort_den, cls_prev, host_res,
                     cutoff, lex, prune_rtol, deadline, node_limit):
    """Depth-first search over demand-to-host assignments.

    ``lex == 0``: minimize; a node is cut when its bound reaches the
    incumbent minus ``prune_rtol`` of it. ``lex == 1``: visit hosts in index
    order and return the first complete assignment whose objective is at
    most ``cutoff``.

    Returns ``(status, objective, assignment, nodes)``.
    """
    lin = np.asarray(lin, dtype=float)
    D, S = lin.shape
    R = cap.size
    st = _State(D, S, ptr, idx, w, cap, idle)
    W = _dense(D, S, R, ptr, idx, w)
    allowed = np.asarray(allowed, dtype=bool)
    assign = np.full(D, -1, dtype=np.int64)
    best = {"obj": float(cutoff) if lex else math.inf, "assign": None}
    limit = float(cutoff)
    nodes = 0

    def lower_bound(k):
        if k >= D:
            return 0.0
        inactive = (st.count == 0).astype(float)
        rate = np.where(amort_den[k] > 0, idle * inactive / np.where(amort_den[k] > 0, amort_den[k], 1.0), 0.0)
        Wk = W[k:]
        resid = st.cap - st.load
        fit = np.all(Wk <= resid, axis=2) & allowed[k:]
        cost = lin[k:] + Wk @ rate
        cost = np.where(fit, cost, np.inf)
        per_demand = cost.min(axis=1)
        return float(per_demand.sum())

    def threshold():
        if lex:
            return limit
        b = best["obj"]
        return b - prune_rtol * abs(b) if math.isfinite(b) else min(b, limit)

    class _Stop(Exception):
        pass

    def visit(k, cost):
        nonlocal nodes
        nodes += 1
        if nodes % _CHECK_EVERY == 0:
            if deadline > 0 and time.monotonic() > deadline:
                raise _Stop(STATUS_TIMEOUT)
            if node_limit > 0 and nodes > node_limit:
                raise _Stop(STATUS_TOO_MANY)
        if k == D:
            obj = _objective(lin, assign, st)
            if lex:
                if obj <= limit:
                    best["obj"], best["assign"] = obj, assign.copy()
                    raise _Stop(STATUS_OK)
            elif obj < threshold():
                best["obj"], best["assign"] = obj, assign.copy()
            return
        lb = lower_bound(k)
        if lex:
            if cost + lb > limit:
                return
        elif cost + lb >= threshold():
            return
        children = []
        for s in range(S):
            if not allowed[k, s]:
                continue
            hr = host_res[s]
            prev = cls_prev[s]
            if st.count[hr] == 0 and prev >= 0 and st.count[host_res[prev]] == 0:
                continue
            if not st.fits(k, s):
                continue
            children.append((lin[k, s] + st.opening_cost(k, s), s))
        if not lex:
            children.sort(key=lambda t: t[0])
        for inc, s in children:
            st.push(k, s)
            assign[k] = s
            visit(k + 1, cost + inc)
            assign[k] = -1
            st.pop(k, s)

    status = STATUS_OK
    try:
        visit(0, 0.0)
    except _Stop as stop:
        status = stop.args[0]
    if status == STATUS_OK and best["assign"] is None:
        status = STATUS_INFEASIBLE
    out = best["assign"] if best["assign"] is not None else np.full(D, -1, dtype=np.int64)
    obj = best["obj"] if best["assign"] is not None else math.inf
    return status, obj, out, nodes


def enumerate_assignments(lin, allowed, ptr, idx, w, cap, idle, accept, deadline):
    """Visit every assignment in lexicographic order.

    With ``accept`` finite, stop at the first feasible assignment whose
    objective is at most ``accept``. Otherwise return the minimum.
    Returns ``(status, objective, assignment, feasible_count)``.
    """
    lin = np.asarray(lin, dtype=float)
    D, S = lin.shape
    st = _State(D, S, ptr, idx, w, cap, idle)
    allowed = np.asarray(allowed, dtype=bool)
    best_obj, best = math.inf, None
    feasible = 0
    assign = np.zeros(D, dtype=np.int64)
    visited = 0

    def rec(k):
        nonlocal best_obj, best, feasible, visited
        if k == D:
            visited += 1
            if visited % (_CHECK_EVERY * 64) == 0 and deadline > 0 and time.monotonic() > deadline:
                raise TimeoutError
            feasible += 1
            obj = _objective(lin, assign, st)
            if math.isfinite(accept):
                if obj <= accept:
                    best_obj, best = obj, assign.copy()
                    return True
            elif obj < best_obj:
                best_obj, best = obj, assign.copy()
            return False
        for s in range(S):
            if not allowed[k, s] or not st.fits(k, s):
                continue
            st.push(k, s)
            assign[k] = s
            done = rec(k + 1)
            st.pop(k, s)
            if done:
                return True
        return False

    try:
        rec(0)
    except TimeoutError:
        return STATUS_TIMEOUT, best_obj, best, feasible
    if best is None:
        return STATUS_INFEASIBLE, math.inf, np.full(D, -1, dtype=np.int64), feasible
    return STATUS_OK, best_obj, best, feasible
