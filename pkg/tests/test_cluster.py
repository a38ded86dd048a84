import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idla1d import cluster as cl
from idla1d.harness import idla_diagnostics, overfilling_check
from idla1d.increments import preset
from idla1d.rng import replica_stream

LAWS = ["simple", "two_step", "skip_free", "stable"]


def test_germ():
    c = cl.new_cluster()
    assert c.m == 0 and len(c) == 1 and 0 in c
    assert c.inner_radius == 0 and c.sigma(0) == 0 and c.is_interval()


@pytest.mark.parametrize("name", LAWS)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_invariants_debug_mode(name, seed):
    c = cl.new_cluster(debug=True)
    res = cl.run(c, preset(name, 1.5), 60, seed, checkpoints=(10, 30), track_contiguity=True)
    assert len(c.occupied) == 61
    assert [m for m, _ in res.trajectory] == [10, 30, 60]
    assert all(2 * r <= m for m, r in res.trajectory)
    assert cl.check_inversion(res.trajectory, res.coverage)
    if name == "simple":
        assert res.contiguous_throughout
    r = c.inner_radius
    assert all(x in c for x in range(-r, r + 1))
    assert not (r + 1 in c and -(r + 1) in c)


@pytest.mark.parametrize("name", LAWS)
def test_coverage_times_increasing(name):
    c = cl.new_cluster()
    res = cl.run(c, preset(name, 1.5), 400, 7)
    xs = sorted(res.coverage)
    assert xs == list(range(len(xs)))
    sig = [res.coverage[x] for x in xs]
    assert sig == sorted(sig)
    assert all(s >= 2 * x for x, s in res.coverage.items())


def test_first_walker_law():
    # the first walker of the simple walk settles on +1 or -1 with probability 1/2
    n = 4000
    right = 0
    for i in range(n):
        c = cl.new_cluster()
        right += cl.dispatch_one(c, preset("simple"), replica_stream(3, i)) == 1
    assert abs(right / n - 0.5) < 4.5 * math.sqrt(0.25 / n)


def test_run_deterministic():
    a = cl.run(cl.new_cluster(), preset("stable", 1.5), 300, 11, checkpoints=(100,))
    b = cl.run(cl.new_cluster(), preset("stable", 1.5), 300, 11, checkpoints=(100,))
    assert a.trajectory == b.trajectory and a.coverage == b.coverage


def test_backend_parity_cluster():
    from idla1d import _backend
    if "compiled" not in _backend.available():
        pytest.skip("compiled kernel not built")
    runs = [cl.run(cl.new_cluster(backend=b), preset("two_step"), 200, 5) for b in ("compiled", "python")]
    assert runs[0].coverage == runs[1].coverage and runs[0].total_steps == runs[1].total_steps


def test_budget_exceeded():
    with pytest.raises(cl.BudgetExceeded) as exc:
        cl.run(cl.new_cluster(), preset("two_step"), 500, 1, step_budget=1000)
    assert exc.value.cluster.m < 500 and exc.value.steps > 1000


def test_run_until_covered():
    c = cl.new_cluster()
    s = cl.run_until_covered(c, preset("two_step"), 20, 3)
    assert c.inner_radius >= 20 and s == c.sigma(20) and s >= 40


def test_lost_particles_bruteforce():
    c = cl.new_cluster()
    cl.run(c, preset("stable", 1.5), 300, 8)
    for x, A in ((5, 2.0), (10, 1.5), (30, 3.0)):
        brute = sum(1 for z in c.occupied if abs(z) > A * x)
        assert cl.lost_particles(c, x, A) == brute
    with pytest.raises(ValueError):
        cl.lost_particles(c, 5, 1.0)


def _recorded(law, m, seed, radius):
    c = cl.new_cluster(record_radius=radius)
    cl.run(c, preset(law, 1.5), m, seed)
    return c


def test_recorded_walks_consistent():
    c = _recorded("stable", 80, 2, 12)
    occupied_before = {0}
    for w in c.recorded:
        assert w.path[0] == 0
        site = w.path[w.tau]
        assert site not in occupied_before
        assert all(int(z) in occupied_before for z in w.path[:w.tau])
        assert np.abs(w.path[-1]) > 12 or w.tau == len(w.path) - 1
        occupied_before.add(int(site))
    assert occupied_before == c.occupied


@pytest.mark.parametrize("law", ["two_step", "stable"])
def test_diagnostics_identities(law):
    x, s = 4, 2.5
    c = _recorded(law, 120, 9, math.ceil(s * x))
    for m in (0, 20, 60):
        for k in (1, 10, 40):
            before = set()
            for w in c.recorded[:m]:
                before.add(int(w.path[w.tau]))
            after = before | {int(w.path[w.tau]) for w in c.recorded[m:m + k]}
            for t in range(-12, 13):
                if t == 0:
                    continue
                npl, nmi, ntot, kp, km = idla_diagnostics(c, m, k, t, x, s)
                assert ntot == npl + nmi
                # a site outside the aggregate at m is added in (m, m+k] exactly
                # when some walker reaches it before leaving the aggregate
                if t not in before:
                    assert (t in after) == (ntot > 0)
                assert 0 <= kp <= k and 0 <= km <= k


def test_diagnostics_window_checks():
    c = _recorded("two_step", 10, 1, 10)
    with pytest.raises(ValueError):
        idla_diagnostics(c, 5, 10, 3, 4, 2.0)
    with pytest.raises(ValueError):
        idla_diagnostics(c, 0, 5, 3, 4, 3.0)


@pytest.mark.parametrize("seed", range(4))
def test_overfilling_implication(seed):
    x, u, s = 3, 1.5, 2.0
    c = _recorded("two_step", 150, seed, math.ceil(s * x))
    seen = 0
    for k in (5, 15, 40, 80):
        if c.sigma(x) + k > len(c.recorded):
            continue
        premise, conclusion = overfilling_check(c, x, k, u, s)
        assert conclusion or not premise
        seen += premise
    assert seen > 0
