# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernels. Contract identical to ``_search_py``."""

import time

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite

cnp.import_array()

cdef double FEAS_RTOL = 1e-9
cdef long long CHECK_EVERY = 256

STATUS_OK = 0
STATUS_INFEASIBLE = 1
STATUS_TIMEOUT = 2
STATUS_TOO_MANY = 3


cdef class _Kernel:
    cdef int D, S, R
    cdef double[:, ::1] lin
    cdef unsigned char[:, ::1] allowed
    cdef long long[::1] ptr
    cdef long long[::1] idx
    cdef double[::1] w
    cdef double[::1] cap
    cdef double[::1] idle
    cdef double[:, ::1] den
    cdef long long[::1] cls_prev
    cdef long long[::1] host_res
    cdef double[::1] load
    cdef long long[::1] count
    cdef long long[::1] assign
    cdef long long[::1] best_assign
    cdef double[:, ::1] child_inc
    cdef long long[:, ::1] child_s
    cdef double best_obj, limit, prune_rtol, deadline
    cdef long long nodes, node_limit
    cdef int lex, status, has_best

    def __init__(self, lin, allowed, ptr, idx, w, cap, idle, den, cls_prev, host_res):
        self.lin = np.ascontiguousarray(lin, dtype=np.float64)
        self.D = self.lin.shape[0]
        self.S = self.lin.shape[1]
        self.allowed = np.ascontiguousarray(allowed, dtype=np.uint8)
        self.ptr = np.ascontiguousarray(ptr, dtype=np.int64)
        self.idx = np.ascontiguousarray(idx, dtype=np.int64)
        self.w = np.ascontiguousarray(w, dtype=np.float64)
        self.cap = np.ascontiguousarray(cap, dtype=np.float64) * (1.0 + FEAS_RTOL)
        self.R = self.cap.shape[0]
        self.idle = np.ascontiguousarray(idle, dtype=np.float64)
        self.den = np.ascontiguousarray(den, dtype=np.float64)
        self.cls_prev = np.ascontiguousarray(cls_prev, dtype=np.int64)
        self.host_res = np.ascontiguousarray(host_res, dtype=np.int64)
        self.load = np.zeros(self.R)
        self.count = np.zeros(self.R, dtype=np.int64)
        self.assign = np.full(self.D, -1, dtype=np.int64)
        self.best_assign = np.full(self.D, -1, dtype=np.int64)
        self.child_inc = np.zeros((self.D + 1, self.S))
        self.child_s = np.zeros((self.D + 1, self.S), dtype=np.int64)
        self.nodes = 0
        self.has_best = 0

    cdef inline bint fits(self, int d, int s):
        cdef long long p = d * self.S + s
        cdef long long k
        cdef long long r
        for k in range(self.ptr[p], self.ptr[p + 1]):
            r = self.idx[k]
            if self.load[r] + self.w[k] > self.cap[r]:
                return False
        return True

    cdef inline double opening(self, int d, int s):
        cdef long long p = d * self.S + s
        cdef long long k
        cdef double total = 0.0
        for k in range(self.ptr[p], self.ptr[p + 1]):
            if self.count[self.idx[k]] == 0:
                total += self.idle[self.idx[k]]
        return total

    cdef inline void push(self, int d, int s):
        cdef long long p = d * self.S + s
        cdef long long k
        for k in range(self.ptr[p], self.ptr[p + 1]):
            self.load[self.idx[k]] += self.w[k]
            self.count[self.idx[k]] += 1

    cdef inline void pop(self, int d, int s):
        cdef long long p = d * self.S + s
        cdef long long k
        for k in range(self.ptr[p], self.ptr[p + 1]):
            self.load[self.idx[k]] -= self.w[k]
            self.count[self.idx[k]] -= 1

    cdef double objective(self):
        cdef double total = 0.0
        cdef int d, r
        for d in range(self.D):
            total += self.lin[d, self.assign[d]]
        for r in range(self.R):
            if self.count[r] > 0:
                total += self.idle[r]
        return total

    cdef double lower_bound(self, int k):
        cdef double total = 0.0
        cdef double best, c, dn
        cdef int d, s
        cdef long long p, j, r
        cdef bint ok
        for d in range(k, self.D):
            best = INFINITY
            for s in range(self.S):
                if not self.allowed[d, s]:
                    continue
                p = d * self.S + s
                c = self.lin[d, s]
                ok = True
                for j in range(self.ptr[p], self.ptr[p + 1]):
                    r = self.idx[j]
                    if self.w[j] > self.cap[r] - self.load[r]:
                        ok = False
                        break
                    if self.count[r] == 0:
                        dn = self.den[k, r]
                        if dn > 0:
                            c += self.idle[r] * self.w[j] / dn
                if ok and c < best:
                    best = c
            if best == INFINITY:
                return INFINITY
            total += best
        return total

    cdef double threshold(self):
        if self.lex:
            return self.limit
        if self.has_best:
            return self.best_obj - self.prune_rtol * fabs(self.best_obj)
        return self.limit

    cdef int visit(self, int k, double cost) except -1:
        # returns 1 to unwind the whole search
        cdef double obj, lb, inc
        cdef int s, n, i, j, prev, hr
        cdef long long ts
        self.nodes += 1
        if self.nodes % CHECK_EVERY == 0:
            if self.deadline > 0 and time.monotonic() > self.deadline:
                self.status = STATUS_TIMEOUT
                return 1
            if self.node_limit > 0 and self.nodes > self.node_limit:
                self.status = STATUS_TOO_MANY
                return 1
        if k == self.D:
            obj = self.objective()
            if self.lex:
                if obj <= self.limit:
                    self.best_obj = obj
                    self.best_assign[:] = self.assign
                    self.has_best = 1
                    return 1
            elif obj < self.threshold():
                self.best_obj = obj
                self.best_assign[:] = self.assign
                self.has_best = 1
            return 0
        lb = self.lower_bound(k)
        if self.lex:
            if cost + lb > self.limit:
                return 0
        elif cost + lb >= self.threshold():
            return 0
        n = 0
        for s in range(self.S):
            if not self.allowed[k, s]:
                continue
            hr = self.host_res[s]
            prev = self.cls_prev[s]
            if self.count[hr] == 0 and prev >= 0 and self.count[self.host_res[prev]] == 0:
                continue
            if not self.fits(k, s):
                continue
            inc = self.lin[k, s] + self.opening(k, s)
            # stable insertion by increment when minimizing, index order otherwise
            i = n
            if not self.lex:
                while i > 0 and self.child_inc[k, i - 1] > inc:
                    self.child_inc[k, i] = self.child_inc[k, i - 1]
                    self.child_s[k, i] = self.child_s[k, i - 1]
                    i -= 1
            self.child_inc[k, i] = inc
            self.child_s[k, i] = s
            n += 1
        for j in range(n):
            s = <int>self.child_s[k, j]
            inc = self.child_inc[k, j]
            self.push(k, s)
            self.assign[k] = s
            if self.visit(k + 1, cost + inc):
                return 1
            self.assign[k] = -1
            self.pop(k, s)
        return 0


def branch_and_bound(lin, allowed, ptr, idx, w, cap, idle, amort_den, cls_prev, host_res,
                     double cutoff, int lex, double prune_rtol, double deadline, long long node_limit):
    cdef _Kernel kern = _Kernel(lin, allowed, ptr, idx, w, cap, idle, amort_den, cls_prev, host_res)
    kern.limit = cutoff
    kern.lex = lex
    kern.prune_rtol = prune_rtol
    kern.deadline = deadline
    kern.node_limit = node_limit
    kern.status = STATUS_OK
    kern.best_obj = cutoff if lex else INFINITY
    kern.visit(0, 0.0)
    status = kern.status
    if status == STATUS_OK and not kern.has_best:
        status = STATUS_INFEASIBLE
    if kern.has_best:
        return status, kern.best_obj, np.asarray(kern.best_assign).copy(), kern.nodes
    return status, INFINITY, np.full(kern.D, -1, dtype=np.int64), kern.nodes


cdef class _Enumerator:
    cdef _Kernel kern
    cdef double accept, deadline, best_obj
    cdef long long feasible
    cdef int timed_out, has_best
    cdef long long[::1] best_assign

    cdef int rec(self, int k) except -1:
        cdef _Kernel kern = self.kern
        cdef double obj
        cdef int s
        if k == kern.D:
            self.feasible += 1
            if self.feasible % (CHECK_EVERY * 64) == 0 and self.deadline > 0 and time.monotonic() > self.deadline:
                self.timed_out = 1
                return 1
            obj = kern.objective()
            if isfinite(self.accept):
                if obj <= self.accept:
                    self.best_obj = obj
                    self.best_assign[:] = kern.assign
                    self.has_best = 1
                    return 1
            elif obj < self.best_obj:
                self.best_obj = obj
                self.best_assign[:] = kern.assign
                self.has_best = 1
            return 0
        for s in range(kern.S):
            if not kern.allowed[k, s] or not kern.fits(k, s):
                continue
            kern.push(k, s)
            kern.assign[k] = s
            if self.rec(k + 1):
                return 1
            kern.pop(k, s)
        return 0


def enumerate_assignments(lin, allowed, ptr, idx, w, cap, idle, double accept, double deadline):
    D = np.asarray(lin).shape[0]
    R = np.asarray(cap).shape[0]
    S = np.asarray(lin).shape[1]
    cdef _Enumerator en = _Enumerator()
    en.kern = _Kernel(lin, allowed, ptr, idx, w, cap, idle, np.zeros((D + 1, R)),
                      np.full(S, -1, dtype=np.int64), np.zeros(S, dtype=np.int64))
    en.accept = accept
    en.deadline = deadline
    en.best_obj = INFINITY
    en.best_assign = np.full(D, -1, dtype=np.int64)
    en.rec(0)
    if en.timed_out:
        return STATUS_TIMEOUT, en.best_obj, np.asarray(en.best_assign).copy(), en.feasible
    if not en.has_best:
        return STATUS_INFEASIBLE, INFINITY, np.full(D, -1, dtype=np.int64), en.feasible
    return STATUS_OK, en.best_obj, np.asarray(en.best_assign).copy(), en.feasible
