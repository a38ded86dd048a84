"""The IDLA aggregate.

Walkers are released one at a time from the origin; each one occupies the
first site it lands on outside the current aggregate.  The aggregate keeps
the inner radius r_m (largest r with [-r, r] fully occupied) and the coverage
times sigma_x = min{m : r_m >= x}, logged for every x the inner radius
crosses.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from . import _backend
from .increments import require_admissible
from .rng import as_bitgen
from .walker import DEFAULT_STEP_CAP, CapExceeded

RELEASE_CHECK_EVERY = 2 ** 10


class BudgetExceeded(RuntimeError):
    """Global step budget of a run exhausted; carries the partial cluster."""

    def __init__(self, message, cluster=None, steps=None):
        super().__init__(message)
        self.cluster = cluster
        self.steps = steps


class InvariantViolation(AssertionError):
    pass


@dataclass
class RecordedWalk:
    """Path of one walker in recording mode.

    ``path[tau]`` is the settled site; the path continues past ``tau`` until
    the walker has left ``[-radius, radius]``.
    """

    index: int
    path: np.ndarray
    tau: int


class Cluster:
    """Occupied sites, walker count, inner radius and coverage log.

    Parameters
    ----------
    debug : bool
        Check all invariants after every dispatch instead of every 2**10.
    record_radius : int, optional
        Enable recording mode: every walker path is stored and extended
        until it leaves ``[-record_radius, record_radius]``.
    backend : str, optional
        Kernel backend name ('compiled' or 'python').
    """

    def __init__(self, debug=False, record_radius=None, backend=None):
        self._kern = _backend.get(backend)
        self.backend = backend
        self.core = self._kern.ClusterCore()
        self.debug = debug
        self.check_every = 1 if debug else RELEASE_CHECK_EVERY
        self.inner_radius = 0
        self.coverage_log: Dict[int, int] = {0: 0}
        self.total_steps = 0
        self.record_radius = None if record_radius is None else int(record_radius)
        self.recorded: List[RecordedWalk] = []

    @property
    def m(self):
        return self.core.m

    @property
    def occupied(self):
        return set(range(self.core.lo, self.core.hi + 1)) | set(self.core.outside_sites())

    @property
    def block(self):
        """Maximal occupied interval containing the origin."""
        return self.core.lo, self.core.hi

    def __contains__(self, x):
        return self.core.contains(int(x))

    def __len__(self):
        return self.core.hi - self.core.lo + 1 + self.core.n_outside()

    def is_interval(self):
        return self.core.n_outside() == 0

    def sigma(self, x):
        return self.coverage_log.get(int(x))

    def _after_insert(self):
        r = self.core.inner_radius()
        if r > self.inner_radius:
            for x in range(self.inner_radius + 1, r + 1):
                self.coverage_log[x] = self.core.m
            self.inner_radius = r
        if self.core.m % self.check_every == 0:
            self.check_invariants()

    def check_invariants(self):
        m = self.core.m
        lo, hi = self.core.lo, self.core.hi
        if not lo <= 0 <= hi:
            raise InvariantViolation("origin not occupied")
        if len(self) != m + 1:
            raise InvariantViolation("|occupied| = %d != m + 1 = %d" % (len(self), m + 1))
        r = self.inner_radius
        if r != min(-lo, hi) or (r + 1) in self and -(r + 1) in self:
            raise InvariantViolation("inner radius %d inconsistent with block [%d, %d]" % (r, lo, hi))
        if 2 * r > m:
            raise InvariantViolation("r_m = %d > m/2 = %g" % (r, m / 2))
        if max(self.coverage_log) != r:
            raise InvariantViolation("coverage log ends at %d, r_m = %d" % (max(self.coverage_log), r))

    def dispatch(self, law, rng, step_cap=DEFAULT_STEP_CAP):
        """Release one walker; return the settled site."""
        bg = as_bitgen(rng)
        kl = law.kernel_law(self.backend)
        if self.record_radius is None:
            site, steps, done = self.core.dispatch(kl, bg, int(step_cap))
            if not done:
                raise CapExceeded("walker %d unsettled after %d steps" % (self.m + 1, steps),
                                  position=site, steps=steps, m=self.m)
        else:
            path, tau, done = self.core.dispatch_recorded(kl, bg, self.record_radius,
                                                          int(step_cap))
            steps = len(path) - 1
            if not done:
                raise CapExceeded("recorded walker %d unfinished after %d steps"
                                  % (self.m + 1, steps), position=path[-1],
                                  steps=steps, m=self.m)
            site = path[tau]
            self.recorded.append(RecordedWalk(self.m, np.asarray(path, dtype=np.int64), tau))
        self.total_steps += steps
        self._after_insert()
        return site


def new_cluster(debug=False, record_radius=None, backend=None):
    """Aggregate holding only the origin; m = 0, r_0 = 0, sigma_0 = 0."""
    return Cluster(debug=debug, record_radius=record_radius, backend=backend)


def dispatch_one(cluster, law, rng, step_cap=DEFAULT_STEP_CAP):
    require_admissible(law)
    return cluster.dispatch(law, rng, step_cap)


@dataclass
class RunResult:
    trajectory: List[Tuple[int, int]]
    coverage: Dict[int, int]
    m_total: int
    total_steps: int
    contiguous_throughout: bool = field(default=True)


def run(cluster, law, m_total, rng, checkpoints=None, step_cap=DEFAULT_STEP_CAP,
        step_budget=None, track_contiguity=False):
    """Dispatch walkers until ``cluster.m == m_total``.

    Parameters
    ----------
    checkpoints : iterable of int, optional
        Values of m at which r_m is recorded (``m_total`` is always added).
    step_budget : int, optional
        Global bound on the total number of walk steps of the run.
    track_contiguity : bool
        Record whether the aggregate stayed an interval after every dispatch.

    Returns
    -------
    RunResult
    """
    require_admissible(law)
    m_total = int(m_total)
    if m_total < 1:
        raise ValueError("m_total must be at least 1")
    marks = sorted(set(int(c) for c in (checkpoints or ())) | {m_total})
    bg = as_bitgen(rng)
    traj = []
    contiguous = True
    i = 0
    while i < len(marks) and marks[i] <= cluster.m:
        if marks[i] == cluster.m:
            traj.append((marks[i], cluster.inner_radius))
        i += 1
    while cluster.m < m_total:
        cluster.dispatch(law, bg, step_cap)
        if track_contiguity and not cluster.is_interval():
            contiguous = False
        if step_budget is not None and cluster.total_steps > step_budget:
            raise BudgetExceeded("step budget %d exhausted at m = %d" % (step_budget, cluster.m),
                                 cluster=cluster, steps=cluster.total_steps)
        if i < len(marks) and cluster.m == marks[i]:
            traj.append((cluster.m, cluster.inner_radius))
            i += 1
    cluster.check_invariants()
    return RunResult(traj, dict(cluster.coverage_log), m_total, cluster.total_steps, contiguous)


def run_until_covered(cluster, law, x, rng, step_cap=DEFAULT_STEP_CAP, step_budget=None):
    """Dispatch until r_m >= x; return sigma_x."""
    require_admissible(law)
    bg = as_bitgen(rng)
    while cluster.inner_radius < x:
        cluster.dispatch(law, bg, step_cap)
        if step_budget is not None and cluster.total_steps > step_budget:
            raise BudgetExceeded("step budget %d exhausted before r_m reached %d" % (step_budget, x),
                                 cluster=cluster, steps=cluster.total_steps)
    return cluster.coverage_log[int(x)]


def check_inversion(trajectory, coverage):
    """True iff (sigma_x <= m) <=> (r_m >= x) for all logged x and checkpoints."""
    for m, r in trajectory:
        for x, s in coverage.items():
            if (s <= m) != (r >= x):
                return False
    return True


def lost_particles(cluster, x, A):
    """Number of occupied sites strictly outside [-A x, A x]."""
    if A <= 1:
        raise ValueError("A must exceed 1")
    edge = math.floor(A * x)
    lo, hi = cluster.block
    n = max(0, hi - edge) + max(0, -edge - lo)
    n += sum(1 for z in cluster.core.outside_sites() if abs(z) > A * x)
    return n
