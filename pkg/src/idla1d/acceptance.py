"""Acceptance suite: eleven desk-scale checks of the limit theory.

Each ``criterion_k(seed)`` runs its experiment and returns a
:class:`CriterionResult`; :func:`run_all` runs them in order and
:func:`format_line` gives the one-line pass/fail summary.
"""

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List

import numpy as np

from . import cluster as cl, ladder, theory, walker
from .harness import EstimateWithError, ExperimentConfig, compare, run_experiment
from .increments import preset
from .rng import replica_stream

DEFAULT_SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    checks: List[Dict[str, Any]] = field(default_factory=list)
    seconds: float = 0.0


def format_line(res):
    return "criterion %2d %s  %s: %s (%.0f s)" % (res.number, "PASS" if res.passed else "FAIL",
                                                  res.title, res.summary, res.seconds)


def _check(label, passed, **info):
    return dict(info, label=label, passed=bool(passed))


def _result(number, title, checks, summary):
    return CriterionResult(number, title, all(c["passed"] for c in checks), summary, checks)


def _r_over_m(doc, m):
    return doc["results"]["r_over_m"][str(m)]["estimate"]


# -- 1-4: inner radius and coverage times ---------------------------------------

def criterion_1(seed=DEFAULT_SEED):
    doc = run_experiment(ExperimentConfig("idla", law="two_step", m=2000, replicas=20,
                                          checkpoints=(500, 1000, 2000), seed=seed))
    traj = [_r_over_m(doc, m) for m in (500, 1000, 2000)]
    final = traj[-1]
    checks = [_check("mean r_m/m in [0.42, 0.50] at m=2000", 0.42 <= final <= 0.50, value=final),
              _check("replica mean nondecreasing over m = 500, 1000, 2000",
                     traj[0] <= traj[1] <= traj[2], trajectory=traj),
              _check("invariants", doc["passed"])]
    return _result(1, "finite-variance inner radius", checks,
                   "mean r_m/m at m=500,1000,2000 = %s" % ", ".join("%.4f" % t for t in traj))


def criterion_2(seed=DEFAULT_SEED):
    doc = run_experiment(ExperimentConfig("idla", law="simple", m=10 ** 4, replicas=5, seed=seed))
    final = _r_over_m(doc, 10 ** 4)
    contiguous = all(r["contiguous"] for r in doc["results"]["replicas"])
    checks = [_check("interval after every dispatch", contiguous),
              _check("mean r_m/m >= 0.45 at m=10^4", final >= 0.45, value=final),
              _check("invariants", doc["passed"])]
    return _result(2, "simple walk exactness", checks,
                   "contiguous=%s, mean r_m/m = %.4f" % (contiguous, final))


@lru_cache(maxsize=4)
def _stable_idla(seed):
    return run_experiment(ExperimentConfig("idla", law="stable", alpha=1.5, m=5000,
                                           replicas=20, seed=seed))


def criterion_3(seed=DEFAULT_SEED):
    doc = _stable_idla(seed)
    ca, _, _, cp = theory.growth_constants(1.5)
    final = _r_over_m(doc, 5000)
    per = [r["checkpoints"][-1][1] / 5000 for r in doc["results"]["replicas"]]
    checks = [_check("mean r_m/m >= c_alpha", final >= ca, value=final, c_alpha=ca),
              _check("mean r_m/m <= c'_alpha", final <= cp, value=final, c_alpha_prime=cp),
              _check("every replica r_m/m < 0.48", max(per) < 0.5 - 0.02, max=max(per)),
              _check("invariants", all(v["passed"] for v in doc["verdicts"][:3]))]
    return _result(3, "heavy-tail band", checks,
                   "c_1.5 = %.4f <= mean r_m/m = %.4f <= c'_1.5 = %.4f; max replica %.4f"
                   % (ca, final, cp, max(per)))


def criterion_4(seed=DEFAULT_SEED):
    doc = _stable_idla(seed)
    Cp = theory.C_alpha_prime(1.5)
    ratios = [s / x for r in doc["results"]["replicas"] for x, s in r["coverage"] if x >= 100]
    lo, hi = min(ratios), max(ratios)
    checks = [_check("sigma_x / x >= 2 for x >= 100", lo >= 2.0, min=lo),
              _check("sigma_x / x <= C'_1.5 for x >= 100", hi <= Cp, max=hi, C_alpha_prime=Cp),
              _check("some x >= 100 logged", len(ratios) > 0, count=len(ratios))]
    return _result(4, "coverage-time bounds", checks,
                   "sigma_x/x over %d logged x >= 100 in [%.3f, %.3f], C'_1.5 = %.3f"
                   % (len(ratios), lo, hi, Cp))


# -- 5-6: ruin and hitting ---------------------------------------------------

def _verdict_dict(v):
    return _check(v.label, v.passed, estimate=v.estimate, se=v.se, theory=v.theory,
                  slack=v.slack, z=v.z)


def criterion_5(seed=DEFAULT_SEED):
    a = run_experiment(ExperimentConfig("gambler", law="simple", N=500, c=2.0,
                                        replicas=10 ** 5, seed=seed, slack=0.0))
    b = run_experiment(ExperimentConfig("gambler", law="stable", alpha=1.5, N=1000, c=1.0,
                                        replicas=10 ** 5, seed=seed + 1, slack=0.0))
    checks = [dict(a["verdicts"][0], label="(a) simple, N=500, c=2 vs 2/3"),
              dict(b["verdicts"][0], label="(b) stable 1.5, N=1000, c=1 vs 1/2")]
    return _result(5, "gambler's ruin", checks,
                   "(a) %.4f +- %.4f vs %.4f; (b) %.4f +- %.4f vs %.4f"
                   % (checks[0]["estimate"], checks[0]["se"], checks[0]["theory"],
                      checks[1]["estimate"], checks[1]["se"], checks[1]["theory"]))


def criterion_6(seed=DEFAULT_SEED):
    a = run_experiment(ExperimentConfig("hitprob", law="stable", alpha=1.5, N=2000, c=1.0,
                                        y=0.5, replicas=2 * 10 ** 4, seed=seed, slack=0.02))
    b = run_experiment(ExperimentConfig("hitprob", law="two_step", N=2000, c=1.0, y=0.5,
                                        replicas=2 * 10 ** 4, seed=seed + 1, slack=0.02))
    checks = [dict(a["verdicts"][0], label="stable 1.5 vs q_alpha(1.5, 1/2, 1)"),
              dict(b["verdicts"][0], label="two-step vs q2(1/2) = 1/2")]
    return _result(6, "hitting before exit", checks,
                   "stable %.4f +- %.4f vs %.4f; two-step %.4f +- %.4f vs %.4f"
                   % (checks[0]["estimate"], checks[0]["se"], checks[0]["theory"],
                      checks[1]["estimate"], checks[1]["se"], checks[1]["theory"]))


# -- 7-8: overshoots ----------------------------------------------------------

def _direct_vs_exact(law, level, u_values, replicas, seed, label, lad):
    """Direct first-passage frequencies against the exact finite-level law."""
    doc = run_experiment(ExperimentConfig("overshoot", law=law, alpha=1.5, y=(level,),
                                          u=u_values, replicas=replicas, seed=seed,
                                          method="direct"))
    out = []
    for u in u_values:
        est = EstimateWithError(**{k: v for k, v in doc["results"]["levels"][str(level)]
                                   ["tails"][str(float(u))]["estimate"].items()})
        exact = lad.overshoot_survival(level, int(math.floor(u * level)))
        out.append(_verdict_dict(compare(est, exact, 0.0,
                                         "%s: direct P(Z_%d > %g) vs exact law" % (label, level,
                                                                                 u * level))))
    return out


def criterion_7(seed=DEFAULT_SEED):
    us = (0.5, 1.0, 2.0)
    doc = run_experiment(ExperimentConfig("overshoot", law="stable", alpha=1.5, y=(10 ** 4,),
                                          u=us, replicas=10 ** 4, seed=seed,
                                          method="ladder-law", slack=0.01))
    checks = [_verdict_dict_from(v) for v in doc["verdicts"]]
    lad = ladder.ladder_height_law(preset("stable", 1.5), 2 ** 18)
    checks += _direct_vs_exact("stable", 10, us, 10 ** 4, seed + 1, "cross-check", lad)
    tails = doc["results"]["levels"]["10000"]["tails"]
    return _result(7, "Dynkin-Lamperti overshoot", checks,
                   "; ".join("u=%g: %.4f vs %.4f" % (u, tails[str(u)]["estimate"]["estimate"],
                                                     tails[str(u)]["theory"]) for u in us)
                   + "; direct cross-check at y=10 %s"
                   % ("ok" if all(c["passed"] for c in checks[3:]) else "failed"))


def _verdict_dict_from(v):
    return {k: v.get(k) for k in ("label", "passed", "estimate", "se", "theory", "slack", "z")}


def criterion_8(seed=DEFAULT_SEED):
    levels = (10, 100, 1000, 10 ** 4)
    doc = run_experiment(ExperimentConfig("overshoot", law="two_step", y=levels, u=(1.0,),
                                          replicas=2 * 10 ** 4, seed=seed, method="ladder-law",
                                          ladder_cutoff=2 ** 16))
    checks = [dict(label=v["label"], passed=v["passed"], **v["detail"]) for v in doc["verdicts"]]
    lad = ladder.ladder_height_law(preset("two_step"), 2 ** 8)
    checks += _direct_vs_exact("two_step", 10, (0.1,), 5000, seed + 1, "cross-check", lad)
    means = [doc["results"]["levels"][str(y)]["mean"]["estimate"] for y in levels]
    return _result(8, "overshoot tightness (finite variance)", checks,
                   "E Z_y = %s; TV(10^3, 10^4) = %.4f; slope %.4f +- %.4f"
                   % (", ".join("%.4f" % m for m in means), doc["results"]["tv_top_levels"],
                      doc["results"]["trend"]["slope"], doc["results"]["trend"]["se"]))


# -- 9: ladder and renewal ----------------------------------------------------

def _pathwise(law, top, seed):
    """Overshoots over 0..top-1 from one traced path, from the residual chain of
    its ladder heights, and from separate first-passage runs on the same stream."""
    path = walker.first_passage(law, 0, top - 1, replica_stream(seed, 0), trace=True).path
    levels = range(top)
    along = walker.overshoots_along_path(path, levels)
    records = np.maximum.accumulate(np.asarray(path))
    n_ladder = int(np.count_nonzero(np.diff(records) > 0))
    heights = ladder.sample_ladder_heights(law, n_ladder, replica_stream(seed, 0)).heights
    chain = ladder.residual_chain(iter(heights.tolist()), top)
    direct = {y: walker.first_passage_over(law, 0, y, replica_stream(seed, 0)) for y in levels}
    chain_ok = all(int(chain[y + 1]) == along[y] for y in levels)
    direct_ok = all(direct[y] == along[y] for y in levels)
    return chain_ok, direct_ok, len(path) - 1


def criterion_9(seed=DEFAULT_SEED):
    checks = []
    for name in ("two_step", "stable"):
        chain_ok, direct_ok, steps = _pathwise(preset(name, 1.5), 1000, seed)
        checks.append(_check("(a) %s: residual chain = path overshoots on 10^3 levels" % name,
                             chain_ok, steps=steps))
        checks.append(_check("(a) %s: first_passage_over = path overshoots on 10^3 levels"
                             % name, direct_ok))
    law = preset("two_step")
    harvest = ladder.sample_ladder_heights(law, 2 * 10 ** 4, replica_stream(seed, 1))
    counts = harvest.pmf_counts()
    pi, _, _, _ = ladder.stationary_distributions(counts)
    ends = ladder.chain_endpoint_counts(counts, 2 * 10 ** 4, 200, replica_stream(seed, 2))
    from .harness import _chi_square
    stat, p, bins = _chi_square(ends, pi)
    checks.append(_check("(b) chain endpoints vs pi from empirical Y pmf, p > 0.001",
                         p > 1e-3, chi2=stat, p=p, bins=bins))
    simple = preset("simple")
    sp = ladder.spitzer_mu(simple, 10 ** 4)
    checks.append(_check("(c) raw Spitzer sum within 0.01 of sqrt 2", abs(sp.raw - math.sqrt(2))
                         <= 0.01, raw=sp.raw, n_max=10 ** 4))
    checks.append(_check("(c) corrected Spitzer sum within 0.01 of 1", abs(sp.corrected - 1.0)
                         <= 0.01, corrected=sp.corrected))
    hy = ladder.sample_ladder_heights(simple, 1000, replica_stream(seed, 3))
    checks.append(_check("(c) simulated E Y = 1 exactly", hy.mean() == 1.0, mean=hy.mean()))
    return _result(9, "ladder/renewal consistency", checks,
                   "pathwise %s; chi-square p = %.3g; raw %.5f, corrected %.5f, E Y = %g"
                   % ("equal" if all(c["passed"] for c in checks[:4]) else "MISMATCH",
                      p, sp.raw, sp.corrected, hy.mean()))


# -- 10: theory kernel ------------------------------------------------------

def criterion_10(seed=DEFAULT_SEED):
    checks = []
    for a in (1.1, 1.5, 1.9):
        r = theory.beta_identity_residual(a)
        checks.append(_check("beta identity alpha=%g to 1e-8" % a, r <= 1e-8, residual=r))
    ys = np.linspace(0.02, 0.98, 25)
    worst_low = math.inf
    for a in (1.1, 1.5, 1.9):
        for c in (0.5, 1.0, 2.0):
            for y in ys:
                q = float(theory.q_alpha(a, float(y), c))
                worst_low = min(worst_low, q - theory.q_lower_bound(a, float(y), c))
    checks.append(_check("q_alpha >= lower bound on grid", worst_low >= -1e-10, margin=worst_low))
    up_ok = True
    for a in (1.1, 1.5, 1.9):
        for d in (0.1, 0.25, 0.5, 0.9):
            try:
                theory.q_upper_strict(a, d, 1.0)
            except ArithmeticError:
                up_ok = False
    checks.append(_check("q_alpha <= strict upper bound on grid", up_ok))
    prod = max(abs(theory.c_alpha(a) * theory.C_alpha_prime(a) - 1.0)
               for a in (1.1, 1.3, 1.5, 1.7, 1.9, 1.99))
    checks.append(_check("c_alpha C'_alpha = 1 to 1e-12", prod <= 1e-12, error=prod))
    c199 = theory.c_alpha(1.99)
    checks.append(_check("c_alpha(1.99) within 0.02 of 1/2", abs(c199 - 0.5) <= 0.02,
                         value=c199, value_1_999=theory.c_alpha(1.999)))
    bridge = max(abs(float(theory.q_alpha(1.99, float(y), 1.0)) - (1.0 - y)) for y in ys)
    checks.append(_check("q_alpha(1.99, y, 1) within 0.02 of 1 - y", bridge <= 0.02, max=bridge))
    mono = True
    for a in (1.1, 1.5, 1.9):
        for y in ys:
            qs = [float(theory.q_alpha(a, float(y), c)) for c in (0.25, 0.5, 1.0, 2.0, 4.0)]
            mono &= all(q1 <= q2 + theory.DEFAULT_TOL for q1, q2 in zip(qs, qs[1:]))
    checks.append(_check("q_alpha nondecreasing in c", mono))
    failed = [c["label"] for c in checks if not c["passed"]]
    return _result(10, "theory kernel", checks,
                   "all %d checks pass" % len(checks) if not failed else
                   "failed: %s (c_1.99 = %.4f)" % ("; ".join(failed), c199))


# -- 11: eventual filling ---------------------------------------------------

FILL_BUDGET = 10 ** 10


def criterion_11(seed=DEFAULT_SEED):
    checks = []
    for k, name in enumerate(("simple", "two_step", "skip_free", "stable")):
        law = preset(name, 1.5)
        reached = 0
        sig = []
        for i in range(10):
            c = cl.new_cluster()
            try:
                sig.append(cl.run_until_covered(c, law, 50, replica_stream(seed + k, i),
                                                step_budget=FILL_BUDGET))
                reached += 1
            except (cl.BudgetExceeded, walker.CapExceeded):
                pass
        checks.append(_check("%s: sigma_50 reached in 10/10" % name, reached == 10,
                             reached=reached, sigma=sig))
    return _result(11, "eventual filling", checks,
                   "; ".join("%s %d/10" % (c["label"].split(":")[0], c["reached"])
                             for c in checks))


CRITERIA = {i: globals()["criterion_%d" % i] for i in range(1, 12)}


def run_criterion(number, seed=DEFAULT_SEED):
    t0 = time.perf_counter()
    res = CRITERIA[number](seed)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(numbers=None, seed=DEFAULT_SEED, echo=None):
    out = []
    for k in numbers or sorted(CRITERIA):
        res = run_criterion(k, seed)
        if echo:
            echo(format_line(res))
        out.append(res)
    return out
