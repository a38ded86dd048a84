"""Pure-Python walk kernels.

Reference implementation of the hot loops.  Every function here consumes the
raw 64-bit output of a numpy ``PCG64`` bit generator in exactly the same order
as the compiled kernel, so both backends produce identical paths for the same
generator state.

Raw words are read in chunks for speed; unused words are handed back to the
generator on exit by rewinding it (``advance`` modulo 2**128), so the generator
state after a call does not depend on the chunk size.
"""

import math

import numpy as np

KIND_SIMPLE = 0
KIND_TABLE = 1
KIND_STABLE = 2

_TWO_M53 = 1.0 / 9007199254740992.0
_MOD128 = 1 << 128
_STOP = 0
_HIT = 1
_RUNNING = -1


class KernelLaw:
    """Flat sampling tables for one increment law.

    Parameters
    ----------
    kind : int
        One of ``KIND_SIMPLE``, ``KIND_TABLE``, ``KIND_STABLE``.
    values : array_like of int
        Alias-table outcomes.  For the stable kind these are magnitudes
        ``1..K`` followed by a sentinel ``0`` marking the tail bucket.
    prob, alias : array_like
        Vose alias table.
    alpha : float
        Tail index (stable kind only).
    cutoff : int
        Table cutoff ``K`` (stable kind only).
    """

    def __init__(self, kind, values, prob, alias, alpha=0.0, cutoff=0):
        self.kind = int(kind)
        self.values = [int(v) for v in values]
        self.prob = [float(p) for p in prob]
        self.alias = [int(a) for a in alias]
        self.n = len(self.values)
        self.alpha = float(alpha)
        self.cutoff = int(cutoff)
        self.inv_alpha = -1.0 / self.alpha if self.alpha > 0 else 0.0


class _Raw:
    __slots__ = ("bg", "buf", "i", "chunk", "bits", "nbits")

    def __init__(self, bitgen):
        self.bg = bitgen
        self.buf = []
        self.i = 0
        self.chunk = 8
        self.bits = 0
        self.nbits = 0

    def next(self):
        if self.i == len(self.buf):
            self.buf = self.bg.random_raw(self.chunk).tolist()
            self.i = 0
            if self.chunk < 4096:
                self.chunk *= 2
        r = self.buf[self.i]
        self.i += 1
        return r

    def close(self):
        unused = len(self.buf) - self.i
        if unused:
            self.bg.advance(_MOD128 - unused)
        self.buf = []
        self.i = 0


def _step(law, src):
    kind = law.kind
    if kind == KIND_SIMPLE:
        if src.nbits == 0:
            src.bits = src.next()
            src.nbits = 64
        src.nbits -= 1
        return 1 if (src.bits >> src.nbits) & 1 else -1
    r1 = src.next()
    r2 = src.next()
    idx = int(((r1 >> 11) * _TWO_M53) * law.n)
    if (r2 >> 11) * _TWO_M53 >= law.prob[idx]:
        idx = law.alias[idx]
    v = law.values[idx]
    if kind == KIND_TABLE:
        return v
    if v == 0:
        v = _stable_tail(law, src)
    return v if r2 & 1 else -v


def _stable_tail(law, src):
    alpha = law.alpha
    K = law.cutoff
    while True:
        u = ((src.next() >> 11) + 1) * _TWO_M53
        x = K * (u ** law.inv_alpha)
        j = math.ceil(x)
        w = (src.next() >> 11) * _TWO_M53
        if j <= K:
            continue
        if w * j * math.expm1(-alpha * math.log1p(-1.0 / j)) < alpha:
            return j


def _batch(src):
    # 64 simple steps from one aligned word; net displacement only
    return 2 * src.next().bit_count() - 64


def sample_n(law, bitgen, n):
    src = _Raw(bitgen)
    out = np.empty(int(n), dtype=np.int64)
    try:
        for i in range(int(n)):
            out[i] = _step(law, src)
    finally:
        src.close()
    return out


def walk_exit(law, bitgen, start, a, b, cap, trace=False):
    """Run until the walk leaves ``[a, b]``.

    Returns ``(pos, steps, done, path)``; ``done`` is False when ``cap`` steps
    elapsed first.  ``path`` is a list of visited sites when ``trace`` is set.
    """
    src = _Raw(bitgen)
    pos = int(start)
    steps = 0
    path = [pos] if trace else None
    simple = law.kind == KIND_SIMPLE and not trace
    try:
        while a <= pos <= b:
            if steps >= cap:
                return pos, steps, False, path
            if (simple and src.nbits == 0 and pos - 64 >= a and pos + 64 <= b
                    and steps + 64 <= cap):
                pos += _batch(src)
                steps += 64
                continue
            pos += _step(law, src)
            steps += 1
            if trace:
                path.append(pos)
    finally:
        src.close()
    return pos, steps, True, path


def walk_hit(law, bitgen, start, target, a, b, cap, trace=False):
    """Run until the walk hits ``target`` or leaves ``[a, b]``.

    Returns ``(pos, steps, status, path)`` with status 1 for a hit, 0 for an
    exit and -1 when the cap was reached.
    """
    src = _Raw(bitgen)
    pos = int(start)
    steps = 0
    path = [pos] if trace else None
    simple = law.kind == KIND_SIMPLE and not trace
    try:
        while True:
            if pos == target:
                return pos, steps, _HIT, path
            if pos < a or pos > b:
                return pos, steps, _STOP, path
            if steps >= cap:
                return pos, steps, _RUNNING, path
            if (simple and src.nbits == 0 and pos - 64 >= a and pos + 64 <= b
                    and abs(pos - target) > 64 and steps + 64 <= cap):
                pos += _batch(src)
                steps += 64
                continue
            pos += _step(law, src)
            steps += 1
            if trace:
                path.append(pos)
    finally:
        src.close()


def first_passage(law, bitgen, start, level, cap, trace=False):
    """Run until the walk is strictly above ``level``."""
    src = _Raw(bitgen)
    pos = int(start)
    steps = 0
    path = [pos] if trace else None
    simple = law.kind == KIND_SIMPLE and not trace
    try:
        while pos <= level:
            if steps >= cap:
                return pos, steps, False, path
            if (simple and src.nbits == 0 and pos + 64 <= level
                    and steps + 64 <= cap):
                pos += _batch(src)
                steps += 64
                continue
            pos += _step(law, src)
            steps += 1
            if trace:
                path.append(pos)
    finally:
        src.close()
    return pos, steps, True, path


def ladder_heights(law, bitgen, count, cap):
    """Successive strict ascending ladder heights of one path from 0.

    Returns ``(heights, durations, done)``.  ``cap`` bounds each ladder epoch;
    on a cap hit the arrays hold the completed epochs only.
    """
    src = _Raw(bitgen)
    count = int(count)
    heights = np.zeros(count, dtype=np.int64)
    durations = np.zeros(count, dtype=np.int64)
    simple = law.kind == KIND_SIMPLE
    pos = 0
    top = 0
    try:
        for k in range(count):
            steps = 0
            while pos <= top:
                if steps >= cap:
                    return heights[:k], durations[:k], False
                if (simple and src.nbits == 0 and pos + 64 <= top
                        and steps + 64 <= cap):
                    pos += _batch(src)
                    steps += 64
                    continue
                pos += _step(law, src)
                steps += 1
            heights[k] = pos - top
            durations[k] = steps
            top = pos
    finally:
        src.close()
    return heights, durations, True


class ClusterCore:
    """Occupied-site store for the aggregate.

    The maximal occupied interval ``[lo, hi]`` containing the origin is kept
    explicitly; occupied sites outside it live in a hash set.
    """

    def __init__(self):
        self.lo = 0
        self.hi = 0
        self.m = 0
        self._out = set()

    def contains(self, x):
        return self.lo <= x <= self.hi or x in self._out

    def outside_sites(self):
        return sorted(self._out)

    def n_outside(self):
        return len(self._out)

    def inner_radius(self):
        return min(-self.lo, self.hi)

    def add(self, site):
        if self.lo <= site <= self.hi or site in self._out:
            raise ValueError("site %d already occupied" % site)
        self.m += 1
        if site == self.hi + 1:
            self.hi = site
            while self.hi + 1 in self._out:
                self.hi += 1
                self._out.discard(self.hi)
        elif site == self.lo - 1:
            self.lo = site
            while self.lo - 1 in self._out:
                self.lo -= 1
                self._out.discard(self.lo)
        else:
            self._out.add(site)

    def dispatch(self, law, bitgen, cap):
        """Walk from 0 until the first unoccupied site and occupy it.

        Returns ``(site, steps, done)``.  On a cap hit nothing is added and
        ``site`` is the walker's current position.
        """
        src = _Raw(bitgen)
        pos = 0
        steps = 0
        simple = law.kind == KIND_SIMPLE
        out = self._out
        try:
            while True:
                lo = self.lo
                hi = self.hi
                if not (lo <= pos <= hi or pos in out):
                    break
                if steps >= cap:
                    return pos, steps, False
                if (simple and src.nbits == 0 and pos - 64 >= lo
                        and pos + 64 <= hi and steps + 64 <= cap):
                    pos += _batch(src)
                    steps += 64
                    continue
                pos += _step(law, src)
                steps += 1
        finally:
            src.close()
        self.add(pos)
        return pos, steps, True

    def dispatch_recorded(self, law, bitgen, radius, cap):
        """Dispatch one walker and keep walking until it has settled and left
        ``[-radius, radius]``.

        Returns ``(path, tau, done)`` where ``path`` lists every visited site
        from the origin and ``path[tau]`` is the settled site.  The extension
        beyond ``tau`` does not alter the aggregate.
        """
        src = _Raw(bitgen)
        pos = 0
        path = [0]
        tau = -1
        try:
            while True:
                if tau < 0 and not self.contains(pos):
                    tau = len(path) - 1
                if tau >= 0 and (pos < -radius or pos > radius):
                    break
                if len(path) - 1 >= cap:
                    return path, tau, False
                pos += _step(law, src)
                path.append(pos)
        finally:
            src.close()
        self.add(path[tau])
        return path, tau, True
