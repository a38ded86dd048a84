# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled walk kernels.

Mirror of ``_pykernel``: same signatures, same consumption of raw PCG64
words, hence identical paths for identical generator states.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, pow, expm1, log1p
from libc.stdint cimport uint64_t, int64_t
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()

KIND_SIMPLE = 0
KIND_TABLE = 1
KIND_STABLE = 2

cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef extern from *:
    """
    static inline int idla_popcount(unsigned long long x) {
        return __builtin_popcountll(x);
    }
    """
    int idla_popcount(unsigned long long x) nogil


cdef struct Src:
    bitgen_t *bg
    uint64_t bits
    int nbits


cdef inline uint64_t raw(Src *s) noexcept nogil:
    return s.bg.next_uint64(s.bg.state)


cdef bitgen_t *_bitgen(object bitgen) except NULL:
    capsule = bitgen.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef struct LawC:
    int kind
    int n
    double alpha
    double inv_alpha
    long long cutoff
    int64_t *values
    double *prob
    int64_t *alias


cdef class KernelLaw:
    """Flat sampling tables for one increment law (see ``_pykernel``)."""

    cdef LawC c
    cdef object _values, _prob, _alias

    def __init__(self, kind, values, prob, alias, alpha=0.0, cutoff=0):
        self._values = np.ascontiguousarray(values, dtype=np.int64)
        self._prob = np.ascontiguousarray(prob, dtype=np.float64)
        self._alias = np.ascontiguousarray(alias, dtype=np.int64)
        self.c.kind = int(kind)
        self.c.n = self._values.shape[0]
        self.c.alpha = float(alpha)
        self.c.inv_alpha = -1.0 / self.c.alpha if self.c.alpha > 0 else 0.0
        self.c.cutoff = int(cutoff)
        self.c.values = <int64_t *> cnp.PyArray_DATA(self._values)
        self.c.prob = <double *> cnp.PyArray_DATA(self._prob)
        self.c.alias = <int64_t *> cnp.PyArray_DATA(self._alias)

    @property
    def kind(self):
        return self.c.kind

    @property
    def alpha(self):
        return self.c.alpha

    @property
    def cutoff(self):
        return self.c.cutoff


cdef inline long long stable_tail(LawC *law, Src *s) noexcept nogil:
    cdef double u, x, w
    cdef long long j
    while True:
        u = <double> ((raw(s) >> 11) + 1) * TWO_M53
        x = law.cutoff * pow(u, law.inv_alpha)
        j = <long long> ceil(x)
        w = <double> (raw(s) >> 11) * TWO_M53
        if j <= law.cutoff:
            continue
        if w * <double> j * expm1(-law.alpha * log1p(-1.0 / <double> j)) < law.alpha:
            return j


cdef inline long long step(LawC *law, Src *s) noexcept nogil:
    cdef uint64_t r1, r2
    cdef int idx
    cdef long long v
    if law.kind == 0:
        if s.nbits == 0:
            s.bits = raw(s)
            s.nbits = 64
        s.nbits -= 1
        return 1 if (s.bits >> s.nbits) & 1 else -1
    r1 = raw(s)
    r2 = raw(s)
    idx = <int> ((<double> (r1 >> 11) * TWO_M53) * law.n)
    if <double> (r2 >> 11) * TWO_M53 >= law.prob[idx]:
        idx = <int> law.alias[idx]
    v = law.values[idx]
    if law.kind == 1:
        return v
    if v == 0:
        v = stable_tail(law, s)
    return v if r2 & 1 else -v


cdef inline long long batch(Src *s) noexcept nogil:
    return 2 * idla_popcount(raw(s)) - 64


cdef inline void init_src(Src *s, object bitgen) except *:
    s.bg = _bitgen(bitgen)
    s.bits = 0
    s.nbits = 0


def sample_n(KernelLaw law, object bitgen, long long n):
    cdef Src s
    init_src(&s, bitgen)
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef long long i
    with nogil:
        for i in range(n):
            o[i] = step(&law.c, &s)
    return out


def walk_exit(KernelLaw law, object bitgen, long long start, long long a,
              long long b, long long cap, bint trace=False):
    cdef Src s
    init_src(&s, bitgen)
    cdef long long pos = start
    cdef long long steps = 0
    cdef bint done = True
    cdef bint simple = law.c.kind == 0 and not trace
    cdef vector[long long] path
    if trace:
        path.push_back(pos)
    with nogil:
        while a <= pos <= b:
            if steps >= cap:
                done = False
                break
            if (simple and s.nbits == 0 and pos - 64 >= a and pos + 64 <= b
                    and steps + 64 <= cap):
                pos += batch(&s)
                steps += 64
                continue
            pos += step(&law.c, &s)
            steps += 1
            if trace:
                path.push_back(pos)
    return pos, steps, done, (list(path) if trace else None)


def walk_hit(KernelLaw law, object bitgen, long long start, long long target,
             long long a, long long b, long long cap, bint trace=False):
    cdef Src s
    init_src(&s, bitgen)
    cdef long long pos = start
    cdef long long steps = 0
    cdef int status
    cdef bint simple = law.c.kind == 0 and not trace
    cdef vector[long long] path
    if trace:
        path.push_back(pos)
    with nogil:
        while True:
            if pos == target:
                status = 1
                break
            if pos < a or pos > b:
                status = 0
                break
            if steps >= cap:
                status = -1
                break
            if (simple and s.nbits == 0 and pos - 64 >= a and pos + 64 <= b
                    and (pos - target > 64 or target - pos > 64)
                    and steps + 64 <= cap):
                pos += batch(&s)
                steps += 64
                continue
            pos += step(&law.c, &s)
            steps += 1
            if trace:
                path.push_back(pos)
    return pos, steps, status, (list(path) if trace else None)


def first_passage(KernelLaw law, object bitgen, long long start,
                  long long level, long long cap, bint trace=False):
    cdef Src s
    init_src(&s, bitgen)
    cdef long long pos = start
    cdef long long steps = 0
    cdef bint done = True
    cdef bint simple = law.c.kind == 0 and not trace
    cdef vector[long long] path
    if trace:
        path.push_back(pos)
    with nogil:
        while pos <= level:
            if steps >= cap:
                done = False
                break
            if simple and s.nbits == 0 and pos + 64 <= level and steps + 64 <= cap:
                pos += batch(&s)
                steps += 64
                continue
            pos += step(&law.c, &s)
            steps += 1
            if trace:
                path.push_back(pos)
    return pos, steps, done, (list(path) if trace else None)


def ladder_heights(KernelLaw law, object bitgen, long long count, long long cap):
    cdef Src s
    init_src(&s, bitgen)
    heights = np.zeros(count, dtype=np.int64)
    durations = np.zeros(count, dtype=np.int64)
    cdef int64_t[::1] h = heights
    cdef int64_t[::1] d = durations
    cdef bint simple = law.c.kind == 0
    cdef long long pos = 0, top = 0, steps, k = 0
    cdef bint done = True
    with nogil:
        while k < count:
            steps = 0
            while pos <= top:
                if steps >= cap:
                    done = False
                    break
                if simple and s.nbits == 0 and pos + 64 <= top and steps + 64 <= cap:
                    pos += batch(&s)
                    steps += 64
                    continue
                pos += step(&law.c, &s)
                steps += 1
            if not done:
                break
            h[k] = pos - top
            d[k] = steps
            top = pos
            k += 1
    if not done:
        return heights[:k], durations[:k], False
    return heights, durations, True


cdef class ClusterCore:
    """Occupied-site store for the aggregate (see ``_pykernel.ClusterCore``)."""

    cdef public long long lo
    cdef public long long hi
    cdef public long long m
    cdef unordered_set[long long] out

    def __init__(self):
        self.lo = 0
        self.hi = 0
        self.m = 0

    cdef inline bint _has(self, long long x) noexcept nogil:
        return (self.lo <= x <= self.hi) or self.out.count(x) > 0

    def contains(self, long long x):
        return self._has(x)

    def outside_sites(self):
        return sorted(self.out)

    def n_outside(self):
        return self.out.size()

    def inner_radius(self):
        return min(-self.lo, self.hi)

    cdef void _add(self, long long site) noexcept nogil:
        self.m += 1
        if site == self.hi + 1:
            self.hi = site
            while self.out.count(self.hi + 1):
                self.hi += 1
                self.out.erase(self.hi)
        elif site == self.lo - 1:
            self.lo = site
            while self.out.count(self.lo - 1):
                self.lo -= 1
                self.out.erase(self.lo)
        else:
            self.out.insert(site)

    def add(self, long long site):
        if self._has(site):
            raise ValueError("site %d already occupied" % site)
        self._add(site)

    def dispatch(self, KernelLaw law, object bitgen, long long cap):
        cdef Src s
        init_src(&s, bitgen)
        cdef long long pos = 0, steps = 0
        cdef bint done = True
        cdef bint simple = law.c.kind == 0
        with nogil:
            while self._has(pos):
                if steps >= cap:
                    done = False
                    break
                if (simple and s.nbits == 0 and pos - 64 >= self.lo
                        and pos + 64 <= self.hi and steps + 64 <= cap):
                    pos += batch(&s)
                    steps += 64
                    continue
                pos += step(&law.c, &s)
                steps += 1
            if done:
                self._add(pos)
        return pos, steps, done

    def dispatch_recorded(self, KernelLaw law, object bitgen, long long radius,
                          long long cap):
        cdef Src s
        init_src(&s, bitgen)
        cdef long long pos = 0
        cdef long long tau = -1
        cdef bint done = True
        cdef vector[long long] path
        path.push_back(0)
        with nogil:
            while True:
                if tau < 0 and not self._has(pos):
                    tau = path.size() - 1
                if tau >= 0 and (pos < -radius or pos > radius):
                    break
                if <long long> path.size() - 1 >= cap:
                    done = False
                    break
                pos += step(&law.c, &s)
                path.push_back(pos)
            if done:
                self._add(path[tau])
        return list(path), tau, done
