import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idla1d import walker
from idla1d.increments import IncrementLaw, preset
from idla1d.rng import replica_stream
from idla1d.walker import CapExceeded, Verdict


def harmonic(law, a, b, boundary, pinned=None):
    """Solve h(x) = E h(x + X) on [a, b] with h = boundary(x) outside and h(x) = v
    at pinned sites; an exact linear-algebra oracle for finite tables."""
    sites = list(range(a, b + 1))
    idx = {x: i for i, x in enumerate(sites)}
    A = np.eye(len(sites))
    rhs = np.zeros(len(sites))
    for x in sites:
        i = idx[x]
        if pinned and x in pinned:
            rhs[i] = pinned[x]
            continue
        for k, q in zip(law.support, law.probs):
            y = x + k
            if y in idx:
                A[i, idx[y]] -= q
            else:
                rhs[i] += q * boundary(y)
    return dict(zip(sites, np.linalg.solve(A, rhs)))


def within(freq, p, n, k=4.5):
    return abs(freq - p) <= k * math.sqrt(max(p * (1 - p), 1e-12) / n)


@pytest.mark.parametrize("name", ["simple", "two_step", "skip_free"])
def test_exit_right_vs_linear_system(name):
    law = preset(name)
    a, b = -7, 5
    h = harmonic(law, a, b, lambda y: 1.0 if y > b else 0.0)
    n = 20000
    bg = replica_stream(1, 0)
    right = sum(walker.run_until_exit(law, 0, (a, b), bg).verdict is Verdict.EXITED_RIGHT
                for _ in range(n))
    assert within(right / n, h[0], n)


def test_simple_walk_exit_closed_form():
    # exit from [-a, b] on the right w.p. (a + 1) / (a + b + 2)
    law = preset("simple")
    h = harmonic(law, -4, 9, lambda y: 1.0 if y > 9 else 0.0)
    assert h[0] == pytest.approx(5 / 15)


@pytest.mark.parametrize("name", ["two_step", "skip_free"])
def test_hit_before_exit_vs_linear_system(name):
    law = preset(name)
    a, b = -6, 6
    g = harmonic(law, a, b, lambda y: 0.0, pinned={0: 1.0})
    n = 20000
    bg = replica_stream(2, 0)
    hits = sum(walker.run_hit_or_exit(law, 3, 0, (a, b), bg).verdict is Verdict.HIT_TARGET
               for _ in range(n))
    assert within(hits / n, g[3], n)


def test_exit_outcome_fields():
    law = preset("stable", 1.5)
    o = walker.run_until_exit(law, 0, (-20, 20), 5, trace=True)
    assert o.path[0] == 0 and o.path[-1] == o.terminal_site
    assert o.steps == len(o.path) - 1
    assert all(-20 <= x <= 20 for x in o.path[:-1])
    if o.verdict is Verdict.EXITED_RIGHT:
        assert o.overshoot == o.terminal_site - 20 >= 1
    else:
        assert o.overshoot == -20 - o.terminal_site >= 1


def test_start_outside_exits_immediately():
    o = walker.run_until_exit(preset("simple"), 10, (-3, 3), 0)
    assert o.steps == 0 and o.verdict is Verdict.EXITED_RIGHT and o.terminal_site == 10


def test_start_on_target_hits_at_zero():
    o = walker.run_hit_or_exit(preset("two_step"), 0, 0, (-3, 3), 0)
    assert o.steps == 0 and o.verdict is Verdict.HIT_TARGET and o.overshoot == 0


def test_target_outside_interval_rejected():
    with pytest.raises(ValueError):
        walker.run_hit_or_exit(preset("two_step"), 0, 10, (-3, 3), 0)


def test_noninteger_interval_rounded_inward():
    assert walker.ruin_interval(10, 0.55) == (-5, 10)
    with pytest.raises(ValueError):
        walker.run_until_exit(preset("simple"), 0, (0.2, 0.8), 0)


def test_cap_exceeded_carries_state():
    with pytest.raises(CapExceeded) as exc:
        walker.run_until_exit(preset("two_step"), 0, (-10 ** 6, 10 ** 6), 0, step_cap=100)
    assert exc.value.steps == 100
    assert exc.value.position is not None


def test_inadmissible_law_rejected():
    from idla1d.increments import InadmissibleLaw
    with pytest.raises(InadmissibleLaw):
        walker.run_until_exit(IncrementLaw.table([-2, 2], [0.5, 0.5]), 0, (-5, 5), 0)


@pytest.mark.parametrize("name", ["simple", "two_step", "stable"])
def test_first_passage_path(name):
    law = preset(name, 1.5)
    o = walker.first_passage(law, 0, 25, 3, trace=True)
    assert o.terminal_site > 25 and o.overshoot == o.terminal_site - 25
    assert max(o.path[:-1]) <= 25
    assert o.path[-1] == o.terminal_site and o.steps == len(o.path) - 1


def test_first_passage_over_matches_traced_path():
    law = preset("two_step")
    path = walker.first_passage(law, 0, 60, replica_stream(4, 0), trace=True).path
    along = walker.overshoots_along_path(path, range(61))
    for y in (0, 7, 33, 60):
        assert walker.first_passage_over(law, 0, y, replica_stream(4, 0)) == along[y]


def test_skip_free_overshoot_is_one():
    law = preset("skip_free")
    for i in range(50):
        assert walker.first_passage_over(law, 0, 40, replica_stream(5, i)) == 1


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=60), st.integers(0, 10))
def test_overshoots_along_path_bruteforce(steps, top):
    path = [0] + list(np.cumsum(steps))
    path.append(max(path) + top + 1)
    levels = list(range(0, max(path)))
    got = walker.overshoots_along_path(path, levels)
    for y in levels:
        first = next(x for x in path if x > y)
        assert got[y] == first - y


def test_overshoots_along_path_requires_crossing():
    with pytest.raises(ValueError):
        walker.overshoots_along_path([0, 1, 2], [5])
