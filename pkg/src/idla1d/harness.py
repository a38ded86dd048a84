"""Experiment orchestration, estimators and result documents.

Replica ``i`` of an experiment with master seed ``s`` draws only from
``rng.replica_stream(s, i)``; shared objects (a ladder-height pool, a chain
test) draw from ``rng.aux_stream(s, k)``.  Replica results are folded in index
order, so the result document does not depend on execution order or on the
number of worker processes.

A result document is a JSON-serialisable dict::

    kind, version, backend, config, results, table, verdicts, passed, timing

``timing`` holds wall-clock times and is the only part that varies between
runs of the same configuration; :func:`canonical_json` drops it.
"""

import csv
import dataclasses
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from . import _backend, cluster as cl, ladder, theory, walker
from .increments import load_law, require_admissible
from .rng import aux_stream, replica_stream

KINDS = ("idla", "gambler", "hitprob", "overshoot", "ladder", "theory")
OVERSHOOT_METHODS = ("direct", "renewal", "ladder-law")

# additive slack of compare() per experiment kind
DEFAULT_SLACK = {"idla": 0.0, "gambler": 0.0, "hitprob": 0.02, "overshoot": 0.01,
                 "ladder": 0.0, "theory": 0.0}


def code_version():
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # pragma: no cover - not installed
        return "0+unknown"


class ConfigError(ValueError):
    pass


class ReplicaFailure(RuntimeError):
    """One or more replicas hit a step cap; ``failures`` lists them by index."""

    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures


# -- configuration ---------------------------------------------------------

@lru_cache(maxsize=64)
def _cached_law(spec, alpha):
    # laws are immutable; caching keeps their sampling tables across replicas
    return load_law(spec, alpha)


def _tuple(v, cast=float):
    if v is None:
        return ()
    if isinstance(v, (str, bytes)) or not hasattr(v, "__iter__"):
        v = (v,)
    return tuple(cast(x) for x in v)


@dataclass
class ExperimentConfig:
    """Parameters of one experiment.

    Only the fields used by ``kind`` matter; the rest keep their defaults.
    ``y`` is the start fraction for ``hitprob`` and the level(s) for
    ``overshoot``.  ``u`` lists the scaled thresholds of the overshoot tail.
    """

    kind: str
    law: str = "simple"
    alpha: float = 1.5
    m: int = 1000
    N: int = 500
    x: int = 1
    y: Tuple[float, ...] = (0.5,)
    c: float = 1.0
    u: Tuple[float, ...] = (1.0,)
    s: float = 2.0
    w: Optional[float] = None
    A: float = 2.0
    B: Optional[float] = None
    replicas: int = 100
    seed: int = 0
    step_cap: int = walker.DEFAULT_STEP_CAP
    step_budget: Optional[int] = None
    checkpoints: Tuple[int, ...] = ()
    method: str = "direct"
    slack: Optional[float] = None
    pool_size: int = 20000
    ladder_cutoff: int = 2 ** 18
    heights: int = 10000
    spitzer_terms: int = 2000
    chains: int = 20000
    tv_tolerance: float = 0.05
    workers: int = 1
    backend: Optional[str] = None
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        self.y = _tuple(self.y)
        self.u = _tuple(self.u)
        self.checkpoints = _tuple(self.checkpoints, int)

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError("kind must be one of %s" % (KINDS,))
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.step_cap < 1:
            raise ConfigError("step_cap must be positive")
        if self.kind == "theory" or self.law == "stable":
            if not 1.0 < self.alpha < 2.0:
                raise ConfigError("alpha must lie in (1, 2)")
        if self.kind != "theory":
            try:
                law = self.make_law()
            except (ValueError, OSError) as exc:
                raise ConfigError("cannot load law %r: %s" % (self.law, exc)) from exc
            require_admissible(law)
        if self.kind == "idla" and self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.kind in ("gambler", "hitprob"):
            if self.N < 1 or self.c <= 0:
                raise ConfigError("need N >= 1 and c > 0")
        if self.kind == "hitprob" and not all(0.0 <= v <= 1.0 for v in self.y):
            raise ConfigError("hitprob start fraction y must lie in [0, 1]")
        if self.kind == "overshoot":
            if self.method not in OVERSHOOT_METHODS:
                raise ConfigError("method must be one of %s" % (OVERSHOOT_METHODS,))
            if not self.y or any(v < 0 or v != int(v) for v in self.y):
                raise ConfigError("overshoot levels y must be nonnegative integers")
            if any(v <= 0 for v in self.u):
                raise ConfigError("thresholds u must be positive")
            top = max(self.y) * (1.0 + max(self.u, default=0.0))
            if self.method == "ladder-law" and self.ladder_cutoff <= top:
                raise ConfigError("ladder_cutoff must exceed y (1 + max u) = %g" % top)
        return self

    def make_law(self):
        return _cached_law(self.law, self.alpha)

    @property
    def slack_value(self):
        return DEFAULT_SLACK[self.kind] if self.slack is None else float(self.slack)

    def to_dict(self):
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        d.pop("workers")
        d.pop("out")
        return d


# -- estimators and verdicts -------------------------------------------------

@dataclass(frozen=True)
class EstimateWithError:
    """Point estimate, standard error and replica count.

    ``se`` is None when it cannot be estimated (a single replica).
    """

    estimate: float
    se: Optional[float]
    replicas: int
    tallies: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_bernoulli(cls, successes, n):
        """Frequency with binomial SE sqrt(p (1 - p) / n)."""
        n = int(n)
        if n < 1:
            raise ValueError("need at least one trial")
        p = successes / n
        se = math.sqrt(p * (1.0 - p) / n) if n > 1 else None
        return cls(p, se, n, {"successes": int(successes), "trials": n})

    @classmethod
    def from_samples(cls, values):
        """Sample mean with SE = sample standard deviation / sqrt(n)."""
        v = np.asarray(values, dtype=np.float64)
        if v.size < 1:
            raise ValueError("need at least one sample")
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
        return cls(float(v.mean()), se, int(v.size),
                   {"min": float(v.min()), "max": float(v.max())})

    def to_dict(self):
        return {"estimate": self.estimate, "se": self.se, "replicas": self.replicas,
                "tallies": self.tallies}


@dataclass(frozen=True)
class Comparison:
    """Verdict of :func:`compare`; ``z`` is None when the SE is unavailable."""

    label: str
    passed: bool
    estimate: float
    se: Optional[float]
    theory: float
    slack: float
    z: Optional[float]

    def to_dict(self):
        return dict(dataclasses.asdict(self), type="comparison")


@dataclass(frozen=True)
class Check:
    """Pass/fail verdict of a property other than an estimate-vs-value test."""

    label: str
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return {"type": "check", "label": self.label, "passed": bool(self.passed),
                "detail": self.detail}


def compare(est, theory_value, slack=0.0, label=""):
    """Pass iff |estimate - theory| <= 3 SE + slack.

    Without an SE (one replica) only the absolute slack is used.
    """
    theory_value = float(theory_value)
    diff = abs(est.estimate - theory_value)
    if est.se is None:
        return Comparison(label, bool(diff <= slack), est.estimate, None, theory_value,
                          float(slack), None)
    if est.se > 0:
        z = diff / est.se
    else:
        z = 0.0 if diff == 0 else None
    return Comparison(label, bool(diff <= 3.0 * est.se + slack), est.estimate, est.se,
                      theory_value, float(slack), z)


# -- replica execution ---------------------------------------------------------

def _call(args):
    fn, config, i = args
    try:
        return i, fn(config, i, replica_stream(config.seed, i)), None
    except walker.CapExceeded as exc:
        return i, None, {"replica": i, "message": str(exc), "position": exc.position,
                         "steps": exc.steps}
    except cl.BudgetExceeded as exc:
        return i, None, {"replica": i, "message": str(exc), "steps": exc.steps}


def map_replicas(fn, config, indices=None, workers=None):
    """Run ``fn(config, i, bitgen)`` for every replica; results in index order.

    Raises
    ------
    ReplicaFailure
        After all replicas have run, if any hit a step cap or budget.
    """
    indices = range(config.replicas) if indices is None else indices
    jobs = [(fn, config, i) for i in indices]
    workers = config.workers if workers is None else workers
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_call, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        out = [_call(j) for j in jobs]
    out.sort(key=lambda r: r[0])
    failures = [f for _, _, f in out if f is not None]
    if failures:
        raise ReplicaFailure("%d replica(s) failed: %s" % (len(failures), failures[0]["message"]),
                             failures)
    return [r for _, r, _ in out]


# -- diagnostics -------------------------------------------------------------

def _first_index(mask):
    i = int(np.argmax(mask))
    return i if mask[i] else None


def idla_diagnostics(cluster, m, k, t, x, s):
    """(N_plus, N_minus, N_total, K_plus, K_minus) over walkers j in (m, m+k].

    For walker j with path S, settling step tau and exit step e from [-x, x]:

    * N_plus counts S_e > x and T_t <= tau; N_minus counts S_e < -x and T_t <= tau.
    * K_plus counts S_e > x and T_t before the exit from [-x, s x];
      K_minus counts S_e < -x and T_t before the exit from [-s x, x].

    T_t is the first visit to ``t`` (infinite if none).  Needs a recorded run
    with ``record_radius >= ceil(s x)``.
    """
    m, k, x = int(m), int(k), int(x)
    if s <= 1 or x < 1:
        raise ValueError("need s > 1 and x >= 1")
    if cluster.record_radius is None or cluster.record_radius < math.ceil(s * x):
        raise ValueError("recording radius must be at least ceil(s x) = %d" % math.ceil(s * x))
    if m < 0 or k < 1 or m + k > len(cluster.recorded):
        raise ValueError("window (%d, %d] exceeds the %d recorded walkers"
                         % (m, m + k, len(cluster.recorded)))
    n_plus = n_minus = k_plus = k_minus = 0
    for w in cluster.recorded[m:m + k]:
        p = w.path
        e = _first_index(np.abs(p) > x)
        hit = _first_index(p == t)
        hit = math.inf if hit is None else hit
        right = p[e] > x
        if hit <= w.tau:
            if right:
                n_plus += 1
            else:
                n_minus += 1
        if right:
            out = _first_index((p < -x) | (p > s * x))
            k_plus += hit < out
        else:
            out = _first_index((p > x) | (p < -s * x))
            k_minus += hit < out
    return n_plus, n_minus, n_plus + n_minus, int(k_plus), int(k_minus)


def overfilling_check(cluster, x, k, u, s):
    """Premise and conclusion of the over-filling implication on a recorded run.

    premise: min over t in (x, u x] of min(K_plus(t), K_minus(-t)) over the
    walkers in (sigma_x, sigma_x + k] is at least ceil((s - 1) x).
    conclusion: sigma_{u x} <= sigma_x + k.

    Returns
    -------
    premise, conclusion : bool
    """
    if not s > u > 1:
        raise ValueError("need s > u > 1")
    sx = cluster.sigma(x)
    if sx is None:
        raise ValueError("sigma_%d not reached" % x)
    need = math.ceil((s - 1) * x)
    premise = True
    for t in range(int(x) + 1, int(math.floor(u * x)) + 1):
        kp = idla_diagnostics(cluster, sx, k, t, x, s)[3]
        km = idla_diagnostics(cluster, sx, k, -t, x, s)[4]
        if min(kp, km) < need:
            premise = False
            break
    target = int(math.floor(u * x))
    sux = cluster.sigma(target)
    conclusion = sux is not None and sux <= sx + k
    return premise, conclusion


# -- theory values (cached) --------------------------------------------------

@lru_cache(maxsize=None)
def _growth(alpha):
    return theory.growth_constants(alpha)


def _law_alpha(law):
    return law.tail_index


# -- experiments -------------------------------------------------------------

def _idla_replica(config, i, bg):
    law = config.make_law()
    c = cl.new_cluster(backend=config.backend)
    res = cl.run(c, law, config.m, bg, checkpoints=config.checkpoints,
                 step_cap=config.step_cap, step_budget=config.step_budget,
                 track_contiguity=True)
    return {"replica": i, "seed": [config.seed, i], "m_total": res.m_total,
            "checkpoints": [[int(m), int(r)] for m, r in res.trajectory],
            "coverage": [[int(x), int(s)] for x, s in sorted(res.coverage.items())],
            "total_steps": int(res.total_steps),
            "contiguous": bool(res.contiguous_throughout),
            "inversion": bool(cl.check_inversion(res.trajectory, res.coverage))}


def _run_idla(config):
    law = config.make_law()
    reps = map_replicas(_idla_replica, config)
    marks = [m for m, _ in reps[0]["checkpoints"]]
    results = {"replicas": reps, "r_over_m": {}}
    table = []
    for j, m in enumerate(marks):
        est = EstimateWithError.from_samples([r["checkpoints"][j][1] / m for r in reps])
        results["r_over_m"][str(m)] = est.to_dict()
        table.append({"quantity": "r_m/m", "parameter": "m=%d" % m, "estimate": est.estimate,
                      "se": est.se, "replicas": est.replicas})
    xmin = max(1, int(config.x))
    ratios = [s / x for r in reps for x, s in r["coverage"] if x >= xmin]
    results["sigma_over_x"] = {"x_min": xmin,
                               "min": min(ratios) if ratios else None,
                               "max": max(ratios) if ratios else None}
    verdicts = [
        Check("r_m <= m/2", all(2 * r <= m for rep in reps for m, r in rep["checkpoints"])),
        Check("sigma_x >= 2x", all(s >= 2 * x for rep in reps for x, s in rep["coverage"])),
        Check("inversion sigma_x <= m iff r_m >= x", all(rep["inversion"] for rep in reps)),
    ]
    if law.kind == "simple":
        verdicts.append(Check("interval after every dispatch",
                              all(rep["contiguous"] for rep in reps)))
    if law.kind == "stable":
        ca, Cp, Cpp, cp = _growth(law.alpha)
        final = results["r_over_m"][str(config.m)]["estimate"]
        verdicts.append(Check("c_alpha <= mean r_m/m <= c'_alpha", ca <= final <= cp,
                              {"c_alpha": ca, "c_alpha_prime": cp, "mean": final}))
        results["growth_constants"] = {"c_alpha": ca, "C_alpha_prime": Cp,
                                       "C_alpha_double_prime": Cpp, "c_alpha_prime": cp}
    return results, table, verdicts


def _gambler_replica(config, i, bg):
    law = config.make_law()
    o = walker.run_until_exit(law, 0, walker.ruin_interval(config.N, config.c), bg,
                              config.step_cap, backend=config.backend)
    return o.verdict is walker.Verdict.EXITED_RIGHT, o.steps


def _run_gambler(config):
    law = config.make_law()
    reps = map_replicas(_gambler_replica, config)
    est = EstimateWithError.from_bernoulli(sum(r for r, _ in reps), len(reps))
    limit = float(theory.gambler_limit(_law_alpha(law), config.c))
    v = compare(est, limit, config.slack_value, "exit-right frequency vs gambler limit")
    results = {"exit_right": est.to_dict(), "theory": limit,
               "total_steps": int(sum(s for _, s in reps))}
    table = [{"quantity": "P(exit right)", "parameter": "N=%d;c=%g" % (config.N, config.c),
              "estimate": est.estimate, "se": est.se, "replicas": est.replicas,
              "theory": limit, "passed": v.passed}]
    return results, table, [v]


def _hit_replica(config, i, bg):
    law = config.make_law()
    y = config.y[0]
    o = walker.run_hit_or_exit(law, int(math.floor(y * config.N)), 0,
                               walker.ruin_interval(config.N, config.c), bg,
                               config.step_cap, backend=config.backend)
    return o.verdict is walker.Verdict.HIT_TARGET, o.steps


def _run_hitprob(config):
    law = config.make_law()
    y = config.y[0]
    reps = map_replicas(_hit_replica, config)
    est = EstimateWithError.from_bernoulli(sum(r for r, _ in reps), len(reps))
    if law.is_finite_variance:
        limit, name = theory.q2(y, config.c), "q2"
    else:
        limit, name = float(theory.q_alpha(law.alpha, y, config.c)), "q_alpha"
    v = compare(est, limit, config.slack_value, "hit frequency vs %s" % name)
    results = {"hit": est.to_dict(), "theory": float(limit), "theory_name": name,
               "start": int(math.floor(y * config.N)),
               "total_steps": int(sum(s for _, s in reps))}
    table = [{"quantity": "P(hit 0 before exit)",
              "parameter": "N=%d;c=%g;y=%g" % (config.N, config.c, y),
              "estimate": est.estimate, "se": est.se, "replicas": est.replicas,
              "theory": float(limit), "passed": v.passed}]
    return results, table, [v]


_LADDER_LAWS = {}


def _ladder_law(law, cutoff):
    key = (law, int(cutoff))
    if key not in _LADDER_LAWS:
        _LADDER_LAWS[key] = ladder.ladder_height_law(law, cutoff)
    return _LADDER_LAWS[key]


_POOLS = {}


def _pool(config, law):
    """Ladder heights harvested once per (law, size, seed) from aux stream 0."""
    key = (law, config.pool_size, config.seed, config.step_cap)
    if key not in _POOLS:
        _POOLS[key] = ladder.sample_ladder_heights(law, config.pool_size,
                                                   aux_stream(config.seed, 0),
                                                   config.step_cap, config.backend).heights
    return _POOLS[key]


def _overshoot_replica(config, i, bg):
    law = config.make_law()
    out = []
    for level in config.y:
        level = int(level)
        if config.method == "direct":
            out.append(walker.first_passage_over(law, 0, level, bg, config.step_cap,
                                                 backend=config.backend))
        elif config.method == "ladder-law":
            z, trunc = _ladder_law(law, config.ladder_cutoff).overshoot(level, bg)
            # overshoots are >= 1, so the sign can flag a truncated draw
            out.append(-z if trunc else z)
        else:
            out.append(ladder.pool_overshoot(_pool(config, law), level, bg))
    return out


def _trend_check(levels, samples):
    """Least-squares slope of Z on log10(y) and its SE."""
    xs = np.concatenate([np.full(len(z), math.log10(max(y, 1))) for y, z in zip(levels, samples)])
    zs = np.concatenate(samples).astype(np.float64)
    res = stats.linregress(xs, zs)
    return float(res.slope), float(res.stderr)


def _tv(a, b):
    va, ca = np.unique(a, return_counts=True)
    vb, cb = np.unique(b, return_counts=True)
    pa = dict(zip(va.tolist(), (ca / len(a)).tolist()))
    pb = dict(zip(vb.tolist(), (cb / len(b)).tolist()))
    return 0.5 * sum(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in set(pa) | set(pb))


def _run_overshoot(config):
    law = config.make_law()
    levels = [int(v) for v in config.y]
    if config.method == "renewal":
        _pool(config, law)
    reps = map_replicas(_overshoot_replica, config)
    samples = [np.array([r[j] for r in reps], dtype=np.int64) for j in range(len(levels))]
    truncated = [int((z < 0).sum()) for z in samples]
    samples = [np.abs(z) for z in samples]
    results = {"method": config.method, "levels": {}}
    table, verdicts = [], []
    exact = _ladder_law(law, config.ladder_cutoff) if config.method == "ladder-law" else None
    for level, z, tr in zip(levels, samples, truncated):
        entry = {"truncated": tr, "tails": {},
                 "quantiles": {str(q): float(np.quantile(z, q)) for q in (0.1, 0.5, 0.9)}}
        if law.is_finite_variance:
            # the mean is infinite for heavy-tailed laws
            mean = EstimateWithError.from_samples(z)
            entry["mean"] = mean.to_dict()
            vals, cnt = np.unique(z, return_counts=True)
            entry["pmf_counts"] = {str(int(v)): int(n) for v, n in zip(vals, cnt)}
            table.append({"quantity": "E Z_y", "parameter": "y=%d" % level,
                          "estimate": mean.estimate, "se": mean.se, "replicas": mean.replicas})
        for u in config.u:
            v = int(math.floor(u * level))
            est = EstimateWithError.from_bernoulli(int((z > v).sum()), len(z))
            row = {"estimate": est.to_dict()}
            if exact is not None and level + v < exact.cutoff:
                row["finite_level_exact"] = exact.overshoot_survival(level, v)
            if not law.is_finite_variance:
                dl = float(theory.dynkin_lamperti_tail(law.alpha, u))
                cmp_ = compare(est, dl, config.slack_value,
                               "P(Z_y/y > %g) at y=%d vs Dynkin-Lamperti tail" % (u, level))
                verdicts.append(cmp_)
                row["theory"] = dl
            entry["tails"][str(u)] = row
            table.append({"quantity": "P(Z_y/y>u)", "parameter": "y=%d;u=%g" % (level, u),
                          "estimate": est.estimate, "se": est.se, "replicas": est.replicas,
                          "theory": row.get("theory")})
        results["levels"][str(level)] = entry
    if law.is_finite_variance and len(levels) >= 2:
        order = np.argsort(levels)
        a, b = samples[order[-2]], samples[order[-1]]
        tv = _tv(a, b)
        verdicts.append(Check("TV(Z_%d, Z_%d) <= %g" % (levels[order[-2]], levels[order[-1]],
                                                       config.tv_tolerance),
                              tv <= config.tv_tolerance, {"tv": tv}))
        slope, se = _trend_check(levels, samples)
        verdicts.append(Check("no trend of E Z_y in log y (|slope| <= 3 SE)",
                              abs(slope) <= 3 * se, {"slope": slope, "se": se}))
        results["trend"] = {"slope": slope, "se": se}
        results["tv_top_levels"] = tv
    return results, table, verdicts


def _chi_square(counts, probs, min_expected=5.0):
    """Chi-square test of ``counts`` (dict) against ``probs`` (dict), pooling
    the upper tail into one bin so every expected count is >= min_expected."""
    n = sum(counts.values())
    keys = sorted(probs)
    obs, exp_ = [], []
    o_acc = e_acc = 0.0
    for k in keys:
        o_acc += counts.get(k, 0)
        e_acc += n * probs[k]
        if e_acc >= min_expected:
            obs.append(o_acc)
            exp_.append(e_acc)
            o_acc = e_acc = 0.0
    rest_o = n - sum(obs)
    rest_e = n - sum(exp_)
    if rest_e >= min_expected or not obs:
        obs.append(rest_o)
        exp_.append(rest_e)
    else:
        obs[-1] += rest_o
        exp_[-1] += rest_e
    if len(obs) < 2:
        return 0.0, 1.0, len(obs)
    stat, p = stats.chisquare(obs, exp_)
    return float(stat), float(p), len(obs)


def _run_ladder(config):
    law = config.make_law()
    harvest = ladder.sample_ladder_heights(law, config.heights, replica_stream(config.seed, 0),
                                           config.step_cap, config.backend)
    st = ladder.ladder_statistics(harvest)
    exact = _ladder_law(law, config.ladder_cutoff)
    results = {"heights": harvest.count, "ladder_heights": {str(k): v for k, v in
                                                            st.ladder_heights.items()},
               "mu_empirical": {"estimate": st.mu_empirical, "se": harvest.mean_se()},
               "pi": {str(k): v for k, v in list(st.pi.items())[:50]},
               "psi": {str(k): v for k, v in list(st.psi.items())[:50]},
               "pi_se": {str(k): v for k, v in list(st.pi_se.items())[:50]},
               "psi_se": {str(k): v for k, v in list(st.psi_se.items())[:50]},
               "total_steps": int(harvest.durations.sum())}
    verdicts = []
    pmf = exact.as_dict(tol=0.0)
    stat, p, bins = _chi_square(st.ladder_heights, pmf)
    results["harvest_vs_exact"] = {"chi2": stat, "p": p, "bins": bins,
                                   "exact_head": {str(k): pmf.get(k, 0.0) for k in range(1, 11)}}
    verdicts.append(Check("harvested heights follow the Wiener-Hopf law (p > 0.001)", p > 1e-3,
                          {"p": p}))
    pi, _, _, _ = ladder.stationary_distributions(st.ladder_heights)
    ends = ladder.chain_endpoint_counts(st.ladder_heights, config.chains,
                                        max(10 * max(st.ladder_heights), 100),
                                        aux_stream(config.seed, 1))
    stat, p, bins = _chi_square(ends, pi)
    results["chain_vs_pi"] = {"chi2": stat, "p": p, "bins": bins, "chains": config.chains}
    verdicts.append(Check("residual-chain endpoints follow pi (p > 0.001)", p > 1e-3, {"p": p}))
    if law.is_finite_variance:
        sp = ladder.spitzer_mu(law, config.spitzer_terms)
        results["spitzer"] = {"raw": sp.raw, "corrected": sp.corrected,
                              "extrapolated": sp.extrapolated, "last_term": sp.last_term,
                              "terms": config.spitzer_terms}
        est = EstimateWithError(st.mu_empirical, harvest.mean_se(), harvest.count)
        verdicts.append(compare(est, sp.extrapolated, config.slack_value + sp.tail_estimate
                                * sp.corrected, "E Y vs Spitzer series"))
    table = [{"quantity": "P(Y=k)", "parameter": "k=%s" % k, "estimate": v / harvest.count,
              "theory": pmf.get(int(k), 0.0)} for k, v in list(st.ladder_heights.items())[:20]]
    return results, table, verdicts


def _run_theory(config):
    alpha = config.alpha
    y = config.y[0] if config.y else 0.5
    u = config.u[0] if config.u else 1.0
    tab = theory.theory_table(alpha, config.c, y, u, config.s, config.w)
    res = theory.beta_identity_residual(alpha)
    verdicts = [Check("beta identity residual <= 1e-8", res <= 1e-8, {"residual": res})]
    table = [{"quantity": k, "estimate": v["value"], "se": v["error"]}
             for k, v in tab.items() if isinstance(v, dict)]
    return tab, table, verdicts


_RUNNERS = {"idla": _run_idla, "gambler": _run_gambler, "hitprob": _run_hitprob,
            "overshoot": _run_overshoot, "ladder": _run_ladder, "theory": _run_theory}


def run_experiment(config, write=True):
    """Run ``config`` and return its result document (written to ``config.out``)."""
    config.validate()
    t0 = time.perf_counter()
    results, table, verdicts = _RUNNERS[config.kind](config)
    wall = time.perf_counter() - t0
    doc = {"kind": config.kind, "version": code_version(),
           "backend": config.backend or _backend.NAME,
           "config": config.to_dict(), "results": results, "table": table,
           "verdicts": [v.to_dict() for v in verdicts],
           "passed": all(v.passed for v in verdicts),
           "timing": {"wall_time_s": wall}}
    if write and config.out:
        write_document(doc, config.out, config.format)
    return doc


# -- output ------------------------------------------------------------------

def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError("not JSON serialisable: %r" % type(o).__name__)


def to_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True, default=_default)


def canonical_json(doc):
    """JSON of ``doc`` without the timing block, for determinism checks."""
    return to_json({k: v for k, v in doc.items() if k != "timing"})


CSV_FIELDS = ("kind", "quantity", "parameter", "estimate", "se", "replicas", "theory", "passed")


def to_csv(doc):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in doc["table"]:
        w.writerow(dict(row, kind=doc["kind"]))
    return buf.getvalue()


def write_document(doc, path, fmt="json"):
    text = to_json(doc) if fmt == "json" else to_csv(doc)
    with open(path, "w") as fh:
        fh.write(text)
        if fmt == "json":
            fh.write("\n")
