"""Ladder heights, residual lifetimes and the mean ladder height.

The strict ascending ladder heights Y_1, Y_2, ... of a walk from 0 are the
increments of its running maximum at the times it makes a new strict
maximum.  They are i.i.d., so the overshoot of the walk over a level y is the
residual lifetime of the renewal process with inter-arrival law Y.  The
residual lifetimes (Z_y) form a Markov chain on {1, 2, ...}:

    Z_{y+1} = Z_y - 1   if Z_y >= 2,
    Z_{y+1} = fresh Y   if Z_y = 1,

started from Z_0 = 1.  With this indexing the overshoot of the walk strictly
above level y is Z_{y+1}.

The law of Y itself is computed from the Wiener-Hopf factorisation

    1 - E z^Y = exp(-sum_{k>=1} a_k z^k),   a_k = sum_n P(S_n = k) / n,

where a_k are the positive Fourier coefficients of -log(1 - phi).  Near
t = 0, 1 - phi(t) ~ beta |t|^a, so the coefficients are split as
a_k = a / (2k) + b_k.  The first part sums to -(a/2) log(1 - z) exactly, and
b_k are the coefficients of the bounded function
-log((1 - phi(t)) / (2 - 2 cos t)^(a/2)), phi(t) = E exp(itX).  Hence

    1 - E z^Y = (1 - z)^(a/2) exp(-B(z)),   U(z) = (1 - z)^(-a/2) exp(B(z)),

with U the renewal function of Y.  Binomial series are exact and B is
handled by FFT.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional

import numpy as np

from . import _backend
from .increments import (char_deficit, partial_sum_pmfs, require_admissible,
                         small_t_constant)
from .rng import as_bitgen
from .walker import DEFAULT_STEP_CAP, CapExceeded


@dataclass
class LadderHarvest:
    """Consecutive ladder heights of one path with their epoch lengths."""

    heights: np.ndarray
    durations: np.ndarray

    @property
    def count(self):
        return len(self.heights)

    def pmf_counts(self):
        vals, cnt = np.unique(self.heights, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def pmf(self):
        n = self.count
        return {k: c / n for k, c in self.pmf_counts().items()}

    def mean(self):
        return float(np.mean(self.heights))

    def mean_se(self):
        return float(np.std(self.heights, ddof=1) / math.sqrt(self.count))


@dataclass
class LadderStatistics:
    ladder_heights: Dict[int, int]
    mu_empirical: float
    pi: Dict[int, float]
    psi: Dict[int, float]
    pi_se: Dict[int, float] = field(default_factory=dict)
    psi_se: Dict[int, float] = field(default_factory=dict)
    spitzer_partials: Optional[List[float]] = None


def sample_ladder_heights(law, count, rng, step_cap=DEFAULT_STEP_CAP, backend=None):
    """Harvest ``count`` consecutive ladder heights from one path started at 0.

    ``step_cap`` bounds each ladder epoch.

    Raises
    ------
    CapExceeded
        With the heights completed so far in ``state['heights']``.
    """
    require_admissible(law)
    kern = _backend.get(backend)
    h, d, done = kern.ladder_heights(law.kernel_law(backend), as_bitgen(rng),
                                     int(count), int(step_cap))
    if not done:
        raise CapExceeded("ladder epoch %d exceeded %d steps" % (len(h) + 1, step_cap),
                          steps=int(step_cap), heights=h, durations=d)
    return LadderHarvest(h, d)


# -- residual-lifetime chain ---------------------------------------------

def _as_draw(y_sampler):
    if callable(y_sampler):
        return y_sampler
    it = iter(y_sampler)
    return lambda: next(it)


def residual_chain(y_sampler, horizon):
    """Path Z_0, ..., Z_horizon of the residual-lifetime chain.

    Parameters
    ----------
    y_sampler : callable or iterable
        Source of fresh ladder heights (values >= 1), consumed in order.
    horizon : int
    """
    draw = _as_draw(y_sampler)
    horizon = int(horizon)
    z = np.empty(horizon + 1, dtype=np.int64)
    z[0] = cur = 1
    for y in range(1, horizon + 1):
        if cur >= 2:
            cur -= 1
        else:
            cur = int(draw())
            if cur < 1:
                raise ValueError("ladder heights must be >= 1, got %d" % cur)
        z[y] = cur
    return z


def overshoot_from_heights(heights, level):
    """Overshoot strictly above ``level`` of the renewal process ``heights``."""
    s = np.cumsum(heights)
    i = np.searchsorted(s, level, side="right")
    if i == len(s):
        raise ValueError("heights sum to %d, not above level %d" % (s[-1], level))
    return int(s[i] - level)


def renewal_overshoots(pool, level, replicas, rng, chunk=None):
    """Overshoots over ``level`` of renewal processes with i.i.d. heights
    drawn uniformly with replacement from ``pool``.

    This is the overshoot law of a walk whose ladder-height law is the
    empirical law of ``pool``.  Vectorised over replicas.
    """
    pool = np.asarray(pool, dtype=np.int64)
    if pool.min() < 1:
        raise ValueError("ladder heights must be >= 1")
    gen = np.random.Generator(as_bitgen(rng))
    replicas = int(replicas)
    level = int(level)
    total = np.zeros(replicas, dtype=np.int64)
    active = np.arange(replicas)
    while active.size:
        total[active] += pool[gen.integers(0, pool.size, active.size)]
        active = active[total[active] <= level]
    return total - level


# -- exact ladder-height law -----------------------------------------------

@dataclass
class LadderLaw:
    """Law of the strict ascending ladder height on {1, ..., cutoff}.

    Attributes
    ----------
    pmf : ndarray
        ``pmf[k - 1] = P(Y = k)`` for k = 1..cutoff.
    renewal : ndarray
        ``renewal[x]`` = expected number of ladder heights summing to x
        exactly (``renewal[0] = 1``), x = 0..cutoff.
    residual : float
        Largest numerical inconsistency met (negative mass, constant term).
    """

    pmf: np.ndarray
    renewal: np.ndarray
    residual: float

    @property
    def cutoff(self):
        return len(self.pmf)

    @cached_property
    def cdf(self):
        return np.cumsum(self.pmf)

    @property
    def tail_mass(self):
        """P(Y > cutoff)."""
        return max(0.0, 1.0 - math.fsum(self.pmf))

    def survival(self):
        """``out[k] = P(Y > k)`` for k = 0..cutoff."""
        return np.concatenate([[1.0], np.clip(1.0 - np.cumsum(self.pmf), 0.0, None)])

    def as_dict(self, tol=0.0):
        return {k + 1: float(p) for k, p in enumerate(self.pmf) if p > tol}

    def overshoot_survival(self, level, v):
        """P(Z_level > v): the walk first exceeds ``level`` by more than ``v``.

        Z_level = S_rho - level; needs level + v < cutoff.
        """
        level, v = int(level), int(v)
        if level < 0 or v < 0:
            raise ValueError("level and v must be nonnegative")
        if level + v >= self.cutoff:
            raise ValueError("level + v = %d needs cutoff > %d" % (level + v, self.cutoff))
        x = np.arange(level + 1)
        return float(np.dot(self.renewal[x], self.survival()[level - x + v]))

    def sample(self, size, rng):
        """I.i.d. heights; a height beyond the cutoff is returned as cutoff + 1."""
        gen = np.random.Generator(as_bitgen(rng))
        return np.searchsorted(self.cdf, gen.random(int(size)), side="right").astype(np.int64) + 1

    def overshoot(self, level, rng, block=256):
        """Overshoot over ``level`` of one renewal process with heights from
        this law.

        Returns
        -------
        z : int
        truncated : bool
            True if a height beyond the cutoff was drawn (``z`` is then a lower
            bound).
        """
        gen = np.random.Generator(as_bitgen(rng))
        cdf = self.cdf
        return _first_crossing(
            lambda n: np.searchsorted(cdf, gen.random(n), side="right") + 1,
            int(level), block, self.cutoff)

    def overshoots(self, level, replicas, rng):
        """Overshoots of ``replicas`` independent renewal processes over ``level``.

        Returns
        -------
        z : ndarray of int
        truncated : ndarray of bool
            True where a height beyond the cutoff was drawn; the matching ``z``
            is then only a lower bound, exceeding cutoff - level.
        """
        bg = as_bitgen(rng)
        level = int(level)
        total = np.zeros(int(replicas), dtype=np.int64)
        truncated = np.zeros(int(replicas), dtype=bool)
        active = np.arange(int(replicas))
        while active.size:
            y = self.sample(active.size, bg)
            truncated[active] |= y > self.cutoff
            total[active] += y
            active = active[total[active] <= level]
        return total - level, truncated


def _first_crossing(draw, level, block, cutoff=None):
    total = 0
    truncated = False
    while True:
        y = draw(block)
        if cutoff is not None and y.max() > cutoff:
            truncated = True
        s = total + np.cumsum(y)
        i = int(np.searchsorted(s, level, side="right"))
        if i < len(s):
            return int(s[i] - level), truncated
        total = int(s[-1])


def pool_overshoot(pool, level, rng, block=256):
    """Overshoot over ``level`` of one renewal process whose heights are
    drawn uniformly with replacement from ``pool``."""
    pool = np.asarray(pool, dtype=np.int64)
    gen = np.random.Generator(as_bitgen(rng))
    z, _ = _first_crossing(lambda n: pool[gen.integers(0, pool.size, n)], int(level), block)
    return z


def _binomial_series(e, n):
    """Coefficients of (1 - z)^e up to z^n."""
    k = np.arange(1, n + 1, dtype=np.float64)
    out = np.empty(n + 1)
    out[0] = 1.0
    out[1:] = np.cumprod((k - 1.0 - e) / k)
    return out


def _series_product(a, b, n):
    size = 1 << int(math.ceil(math.log2(2 * n + 2)))
    return np.fft.irfft(np.fft.rfft(a, size) * np.fft.rfft(b, size), size)[:n + 1]


def ladder_height_law(law, cutoff=2 ** 18, oversample=4):
    """Exact law of the ladder height Y on {1, ..., cutoff} by Wiener-Hopf.

    Parameters
    ----------
    law : IncrementLaw
    cutoff : int
        Largest height resolved.  Coefficients are exact up to FFT aliasing,
        which decays with ``oversample``.
    oversample : int
        Ratio of the Fourier grid size to ``cutoff``.

    Returns
    -------
    LadderLaw
    """
    require_admissible(law)
    K = int(cutoff)
    if K < 1 or oversample < 2:
        raise ValueError("need cutoff >= 1 and oversample >= 2")
    a = law.tail_index
    M = int(oversample) * K
    if M % 2:
        M += 1
    j = np.arange(M)
    t = 2.0 * math.pi * np.where(j <= M // 2, j, j - M) / M
    t[0] = 1.0  # placeholder, replaced by the limit below
    r = -np.log(char_deficit(law, t)) + 0.5 * a * np.log(2.0 - 2.0 * np.cos(t))
    r[0] = -math.log(small_t_constant(law))
    b = np.zeros(M, dtype=np.complex128)
    b[1:K + 1] = np.fft.fft(r)[1:K + 1] / M
    B = np.fft.fft(b)
    e_minus = np.fft.ifft(np.exp(-B)).real[:K + 1]
    e_plus = np.fft.ifft(np.exp(B)).real[:K + 1]
    one_minus = _series_product(_binomial_series(0.5 * a, K), e_minus, K)
    renewal = _series_product(_binomial_series(-0.5 * a, K), e_plus, K)
    pmf = -one_minus[1:]
    residual = max(abs(one_minus[0] - 1.0), float(-pmf.min()), 0.0)
    return LadderLaw(np.clip(pmf, 0.0, None), renewal, residual)


# -- stationary laws -------------------------------------------------------

def _normalise(y_pmf):
    items = sorted((int(k), float(v)) for k, v in dict(y_pmf).items() if v > 0)
    if not items or items[0][0] < 1:
        raise ValueError("ladder-height pmf must live on positive integers")
    return items


def stationary_distributions(y_pmf, tail_tolerance=1e-12):
    """pi_k = P(Y >= k)/mu and psi_k = k P(Y = k)/mu.

    ``y_pmf`` may hold probabilities or counts; counts are normalised.

    Returns
    -------
    pi, psi : dict
    mu : float
    renormalised : bool
        True when the input mass differed from 1 by more than
        ``tail_tolerance`` (counts always trigger this unless they sum to 1).
    """
    items = _normalise(y_pmf)
    mass = math.fsum(v for _, v in items)
    renormalised = abs(mass - 1.0) > tail_tolerance
    p = {k: v / mass for k, v in items}
    mu = math.fsum(k * v for k, v in p.items())
    if not math.isfinite(mu):
        raise ArithmeticError("mean ladder height is not finite")
    kmax = max(p)
    pi = {}
    tail = 0.0
    for k in range(kmax, 0, -1):
        tail += p.get(k, 0.0)
        pi[k] = tail / mu
    pi = dict(sorted(pi.items()))
    psi = {k: k * v / mu for k, v in p.items()}
    return pi, psi, mu, renormalised


def ladder_statistics(harvest):
    """LadderStatistics with delta-method standard errors for pi and psi."""
    y = harvest.heights.astype(np.float64)
    n = y.size
    counts = harvest.pmf_counts()
    pi, psi, mu, _ = stationary_distributions(counts)
    pi_se, psi_se = {}, {}
    for k in pi:
        f = (y >= k) - pi[k] * y
        pi_se[k] = float(np.std(f, ddof=1) / (mu * math.sqrt(n)))
    for k in psi:
        g = y * (y == k) - psi[k] * y
        psi_se[k] = float(np.std(g, ddof=1) / (mu * math.sqrt(n)))
    return LadderStatistics(counts, float(y.mean()), pi, psi, pi_se, psi_se)


def chain_endpoint_counts(y_pmf, chains, horizon, rng):
    """States Z_horizon of ``chains`` independent residual chains whose fresh
    heights are drawn from ``y_pmf``; returned as a value -> count map.

    Endpoints of independent chains are i.i.d., so their counts can be
    compared with pi by a chi-square test.
    """
    items = _normalise(y_pmf)
    vals = np.array([k for k, _ in items], dtype=np.int64)
    prob = np.array([v for _, v in items])
    prob = prob / prob.sum()
    gen = np.random.Generator(as_bitgen(rng))
    z = np.ones(int(chains), dtype=np.int64)
    for _ in range(int(horizon)):
        fresh = z == 1
        z[~fresh] -= 1
        z[fresh] = gen.choice(vals, size=int(fresh.sum()), p=prob)
    vals, cnt = np.unique(z, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, cnt)}


def occupation_frequencies(path):
    c = Counter(int(z) for z in path)
    n = len(path)
    return {k: v / n for k, v in sorted(c.items())}


# -- mean ladder height ----------------------------------------------------

@dataclass
class SpitzerResult:
    raw: float
    corrected: float
    partials: np.ndarray
    last_term: float
    sigma: float
    tail_estimate: float = 0.0

    @property
    def extrapolated(self):
        """``corrected`` with the series tail estimated as 2 n_max |last term|.

        Terms decay like n^(-3/2) for lattice walks, so the neglected tail is
        about twice n_max times the last term.
        """
        return self.corrected * math.exp(self.tail_estimate)


def spitzer_mu(law, n_max, mass_tolerance=1e-12):
    """Mean ladder height from the series sum_n (1/n)(1/2 - P(S_n > 0)).

    Returns both ``raw = exp(partial sum)`` and ``corrected = (sigma /
    sqrt 2) raw``; for the simple walk the first tends to sqrt 2 and the
    second to E Y = 1.  P(S_n > 0) is computed exactly by convolution.
    """
    require_admissible(law)
    if not law.is_finite_variance:
        raise ValueError("spitzer_mu needs a finite-variance law")
    sigma = math.sqrt(law.variance)
    total = 0.0
    partials = np.empty(int(n_max))
    term = 0.0
    for n, pmf in enumerate(partial_sum_pmfs(law, n_max), start=1):
        term = (0.5 - pmf.prob_positive()) / n
        total += term
        partials[n - 1] = total
    raw = math.exp(total)
    tail = 2.0 * int(n_max) * term
    return SpitzerResult(raw, sigma / math.sqrt(2.0) * raw, partials, abs(term), sigma, tail)


def overshoot_envelope_check(law, p, y_grid, replicas, rng, pool_size=20000,
                             step_cap=DEFAULT_STEP_CAP, backend=None):
    """Empirical E[Z_y^(p-2)] over ``y_grid`` for a finite-table law.

    Overshoots are drawn from the renewal process of ladder heights
    harvested from one path (``pool_size`` heights).

    Returns
    -------
    rows : list of (y, mean, se)
    worst : float
        Largest mean over the grid.
    """
    require_admissible(law)
    if law.kind == "stable":
        raise ValueError("moment envelope needs a finite table law")
    bg = as_bitgen(rng)
    pool = sample_ladder_heights(law, pool_size, bg, step_cap, backend).heights
    rows = []
    for y in y_grid:
        z = renewal_overshoots(pool, y, replicas, bg).astype(np.float64) ** (p - 2)
        rows.append((int(y), float(z.mean()), float(z.std(ddof=1) / math.sqrt(len(z)))))
    return rows, max(r[1] for r in rows)
