"""Single walks under stopping rules.

Three stopping rules are provided: exit from a closed interval, hitting a
target before exiting an interval, and first passage strictly above a level.
All of them take an explicit random stream and a per-walk step cap; reaching
the cap raises :class:`CapExceeded` (the walks are recurrent, so a cap hit
signals a bug or an inadmissible law rather than a rare event to censor).
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from . import _backend
from .increments import require_admissible
from .rng import as_bitgen

DEFAULT_STEP_CAP = 10 ** 10


class Verdict(enum.Enum):
    EXITED_LEFT = "ExitedLeft"
    EXITED_RIGHT = "ExitedRight"
    HIT_TARGET = "HitTarget"


class CapExceeded(RuntimeError):
    """Step cap reached before the stopping rule fired.

    Attributes
    ----------
    position : int
        Site of the walker when the cap was hit.
    steps : int
        Steps taken.
    state : dict
        Any further partial state of the caller.
    """

    def __init__(self, message, position=None, steps=None, **state):
        super().__init__(message)
        self.position = position
        self.steps = steps
        self.state = state


@dataclass(frozen=True)
class WalkOutcome:
    terminal_site: int
    steps: int
    verdict: Optional[Verdict]
    overshoot: int
    path: Optional[Tuple[int, ...]] = None


def _interval(interval):
    a, b = interval
    # non-integer endpoints are rounded towards the interior
    a = math.ceil(a)
    b = math.floor(b)
    if a > b:
        raise ValueError("empty interval [%r, %r]" % tuple(interval))
    return int(a), int(b)


def ruin_interval(N, c):
    """Integer sites of [-cN, N]."""
    return _interval((-c * N, N))


def run_until_exit(law, start, interval, rng, step_cap=DEFAULT_STEP_CAP,
                   trace=False, backend=None):
    """Walk from ``start`` until the first time it is outside ``interval``.

    Parameters
    ----------
    law : IncrementLaw
    start : int
    interval : (a, b)
        Closed interval; non-integer endpoints are rounded to the interior.
    rng : Generator, bit generator or int seed
    step_cap : int
    trace : bool
        Keep the full path in ``WalkOutcome.path``.

    Returns
    -------
    WalkOutcome
        A start outside the interval exits with zero steps.
    """
    require_admissible(law)
    a, b = _interval(interval)
    kern = _backend.get(backend)
    pos, steps, done, path = kern.walk_exit(law.kernel_law(backend), as_bitgen(rng),
                                            int(start), a, b, int(step_cap), trace)
    if not done:
        raise CapExceeded("exit from [%d, %d] not reached in %d steps" % (a, b, steps),
                          position=pos, steps=steps)
    if pos > b:
        verdict, over = Verdict.EXITED_RIGHT, pos - b
    else:
        verdict, over = Verdict.EXITED_LEFT, a - pos
    return WalkOutcome(pos, steps, verdict, over, tuple(path) if trace else None)


def run_hit_or_exit(law, start, target, interval, rng, step_cap=DEFAULT_STEP_CAP,
                    trace=False, backend=None):
    """Walk from ``start`` until it hits ``target`` or leaves ``interval``.

    A walk started on the target hits it at time 0.  Overshoot is 0 for a hit.
    """
    require_admissible(law)
    a, b = _interval(interval)
    if not a <= target <= b:
        raise ValueError("target %r outside [%d, %d]" % (target, a, b))
    kern = _backend.get(backend)
    pos, steps, status, path = kern.walk_hit(law.kernel_law(backend), as_bitgen(rng),
                                             int(start), int(target), a, b,
                                             int(step_cap), trace)
    if status < 0:
        raise CapExceeded("target %d not resolved in %d steps" % (target, steps),
                          position=pos, steps=steps)
    path = tuple(path) if trace else None
    if status == 1:
        return WalkOutcome(pos, steps, Verdict.HIT_TARGET, 0, path)
    if pos > b:
        return WalkOutcome(pos, steps, Verdict.EXITED_RIGHT, pos - b, path)
    return WalkOutcome(pos, steps, Verdict.EXITED_LEFT, a - pos, path)


def first_passage(law, start, level, rng, step_cap=DEFAULT_STEP_CAP, trace=False,
                  backend=None):
    """Walk until strictly above ``level``; returns the full WalkOutcome."""
    require_admissible(law)
    if level < start:
        raise ValueError("level %r below start %r" % (level, start))
    kern = _backend.get(backend)
    pos, steps, done, path = kern.first_passage(law.kernel_law(backend), as_bitgen(rng),
                                                int(start), int(level),
                                                int(step_cap), trace)
    if not done:
        raise CapExceeded("level %d not passed in %d steps" % (level, steps),
                          position=pos, steps=steps)
    return WalkOutcome(pos, steps, Verdict.EXITED_RIGHT, pos - int(level),
                       tuple(path) if trace else None)


def first_passage_over(law, start, level, rng, step_cap=DEFAULT_STEP_CAP,
                       backend=None):
    """Overshoot S_rho - y >= 1 at the first time rho the walk exceeds ``level``."""
    return first_passage(law, start, level, rng, step_cap, backend=backend).overshoot


def overshoots_along_path(path, levels):
    """Overshoot over each level in ``levels`` read off a single path.

    ``path`` must start at or below every level and end above all of them.
    """
    out = {}
    pending = sorted(set(int(y) for y in levels))
    i = 0
    top = None
    for x in path:
        if top is None or x > top:
            top = x
            while i < len(pending) and pending[i] < x:
                out[pending[i]] = x - pending[i]
                i += 1
            if i == len(pending):
                break
    if i < len(pending):
        raise ValueError("path never exceeds level %d" % pending[i])
    return out
