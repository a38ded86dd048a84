"""The compiled and pure-Python kernels produce identical paths."""

import numpy as np
import pytest

from idla1d import _backend
from idla1d.increments import IncrementLaw, preset

pytestmark = pytest.mark.skipif("compiled" not in _backend.available(),
                                reason="compiled kernel not built")

LAWS = [preset("simple"), preset("two_step"), preset("skip_free"), preset("stable", 1.5),
        IncrementLaw.stable(1.2, table_cutoff=4)]
IDS = ["simple", "two_step", "skip_free", "stable", "stable-cutoff4"]


def _both(law, fn, seed=3):
    out = []
    for name in ("compiled", "python"):
        bg = np.random.PCG64(seed)
        res = fn(_backend.get(name), law.kernel_law(name), bg)
        out.append((res, bg.state))
    return out


def _same(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    if isinstance(a, (tuple, list)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return a == b


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_sample_n(law):
    (a, sa), (b, sb) = _both(law, lambda k, kl, bg: k.sample_n(kl, bg, 5000))
    assert np.array_equal(a, b)
    assert sa == sb


@pytest.mark.parametrize("law", LAWS, ids=IDS)
@pytest.mark.parametrize("trace", [False, True])
def test_walk_exit(law, trace):
    (a, sa), (b, sb) = _both(law, lambda k, kl, bg: k.walk_exit(kl, bg, 3, -40, 90, 10 ** 7, trace))
    assert _same(a, b) and sa == sb


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_walk_hit(law):
    (a, sa), (b, sb) = _both(law, lambda k, kl, bg: k.walk_hit(kl, bg, 20, 0, -50, 50, 10 ** 7, True))
    assert _same(a, b) and sa == sb


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_first_passage(law):
    (a, sa), (b, sb) = _both(law, lambda k, kl, bg: k.first_passage(kl, bg, 0, 30, 10 ** 8, True))
    assert _same(a, b) and sa == sb


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_ladder_heights(law):
    (a, sa), (b, sb) = _both(law, lambda k, kl, bg: k.ladder_heights(kl, bg, 50, 10 ** 8))
    assert _same(a, b) and sa == sb


def test_cap_hit_same_state():
    law = preset("two_step")
    (a, sa), (b, sb) = _both(law, lambda k, kl, bg: k.walk_exit(kl, bg, 0, -10 ** 6, 10 ** 6, 1000))
    assert _same(a, b) and sa == sb
    assert a[2] is False or a[2] == 0


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_cluster_dispatch(law):
    def run(k, kl, bg):
        core = k.ClusterCore()
        sites = [core.dispatch(kl, bg, 10 ** 8) for _ in range(150)]
        return sites, (core.lo, core.hi, sorted(core.outside_sites()), core.m)
    (a, sa), (b, sb) = _both(law, run)
    assert _same(a, b) and sa == sb


@pytest.mark.parametrize("law", LAWS, ids=IDS)
def test_cluster_recorded(law):
    def run(k, kl, bg):
        core = k.ClusterCore()
        return [core.dispatch_recorded(kl, bg, 12, 10 ** 8) for _ in range(60)]
    (a, sa), (b, sb) = _both(law, run)
    assert _same(a, b) and sa == sb
