"""Increment laws driving the walks.

Three families are supported:

* ``simple``: the simple symmetric walk, X = +1 or -1 with probability 1/2.
* ``table``: any finite integer table with mean zero.
* ``stable``: p(k) = |k|^(-1-alpha) / Z for k != 0, Z = 2 zeta(1 + alpha),
  alpha in (1, 2).  This law is in the domain of normal attraction of the
  symmetric alpha-stable law.

Sampling of the stable law is exact: an alias table covers magnitudes up to
``table_cutoff`` plus one bucket for the tail, and the tail is drawn by
rejection from a discretised Pareto envelope.
"""

import json
import math
from functools import reduce

import numpy as np
from scipy import signal, special

from . import _backend
from .rng import as_bitgen

SIMPLE = "simple"
TABLE = "table"
STABLE = "stable"

DEFAULT_CUTOFF = 2 ** 16

_KIND_CODES = {SIMPLE: 0, TABLE: 1, STABLE: 2}


class LawError(ValueError):
    """Structurally invalid law (bad probabilities, bad parameters)."""


class InadmissibleLaw(ValueError):
    """Law is valid but violates the standing hypotheses (mean 0, aperiodic)."""


class ResourceError(MemoryError):
    """A computation would exceed its configured memory budget."""


def _alias_table(p):
    """Vose alias table for the probability vector ``p``."""
    p = np.asarray(p, dtype=np.float64)
    n = len(p)
    scaled = p * n / p.sum()
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # leftovers are 1 up to rounding
    for i in small + large:
        prob[i] = 1.0
        alias[i] = i
    return prob, alias


class IncrementLaw:
    """Mean-zero integer increment law.

    Build with :meth:`simple`, :meth:`table`, :meth:`stable`,
    :meth:`from_config` or :func:`preset`.  Instances are immutable.
    """

    __slots__ = ("kind", "support", "probs", "alpha", "table_cutoff",
                 "_kernel_laws", "__weakref__")

    def __init__(self, kind, support=(), probs=(), alpha=None,
                 table_cutoff=DEFAULT_CUTOFF):
        if kind not in _KIND_CODES:
            raise LawError("unknown law kind %r" % (kind,))
        object.__setattr__(self, "_kernel_laws", {})
        if kind == SIMPLE:
            support, probs, alpha = (-1, 1), (0.5, 0.5), None
        elif kind == TABLE:
            support, probs = _validate_table(support, probs)
            alpha = None
        else:
            if alpha is None or not (1.0 < float(alpha) < 2.0):
                raise LawError("stable law needs alpha in (1, 2), got %r" % (alpha,))
            alpha = float(alpha)
            table_cutoff = int(table_cutoff)
            if table_cutoff < 1:
                raise LawError("table_cutoff must be positive")
            support, probs = (), ()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "support", tuple(int(k) for k in support))
        object.__setattr__(self, "probs", tuple(float(q) for q in probs))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "table_cutoff",
                           int(table_cutoff) if kind == STABLE else None)

    def __setattr__(self, name, value):
        raise AttributeError("IncrementLaw is immutable")

    @classmethod
    def simple(cls):
        return cls(SIMPLE)

    @classmethod
    def table(cls, support, probs):
        return cls(TABLE, support, probs)

    @classmethod
    def stable(cls, alpha, table_cutoff=DEFAULT_CUTOFF):
        return cls(STABLE, alpha=alpha, table_cutoff=table_cutoff)

    @classmethod
    def from_config(cls, cfg):
        """Build from a config mapping (the JSON law block)."""
        kind = cfg.get("kind")
        if kind == SIMPLE:
            return cls.simple()
        if kind == TABLE:
            return cls.table(cfg.get("support", ()), cfg.get("probs", ()))
        if kind == STABLE:
            return cls.stable(cfg.get("alpha"),
                              cfg.get("table_cutoff", DEFAULT_CUTOFF))
        raise LawError("unknown law kind %r" % (kind,))

    def to_config(self):
        if self.kind == SIMPLE:
            return {"kind": SIMPLE}
        if self.kind == TABLE:
            return {"kind": TABLE, "support": list(self.support),
                    "probs": list(self.probs)}
        return {"kind": STABLE, "alpha": self.alpha,
                "table_cutoff": self.table_cutoff}

    def __eq__(self, other):
        return isinstance(other, IncrementLaw) and self.to_config() == other.to_config()

    def __hash__(self):
        return hash(json.dumps(self.to_config(), sort_keys=True))

    def __repr__(self):
        if self.kind == SIMPLE:
            return "IncrementLaw.simple()"
        if self.kind == TABLE:
            return "IncrementLaw.table(%r, %r)" % (list(self.support), list(self.probs))
        return "IncrementLaw.stable(%r, table_cutoff=%d)" % (self.alpha, self.table_cutoff)

    # -- moments ---------------------------------------------------------

    @property
    def is_finite_variance(self):
        return self.kind != STABLE

    @property
    def tail_index(self):
        """alpha for stable laws, 2 for finite-variance laws."""
        return self.alpha if self.kind == STABLE else 2.0

    @property
    def normalization(self):
        """Z = sum over k != 0 of |k|^(-1-alpha) (stable laws only)."""
        if self.kind != STABLE:
            return None
        return 2.0 * special.zeta(1.0 + self.alpha)

    @property
    def mean(self):
        if self.kind == STABLE:
            return 0.0
        return math.fsum(k * q for k, q in zip(self.support, self.probs))

    @property
    def variance(self):
        if self.kind == STABLE:
            return math.inf
        mu = self.mean
        return math.fsum((k - mu) ** 2 * q for k, q in zip(self.support, self.probs))

    def pmf(self, k):
        """P(X = k)."""
        k = int(k)
        if self.kind == STABLE:
            return 0.0 if k == 0 else abs(k) ** (-1.0 - self.alpha) / self.normalization
        for s, q in zip(self.support, self.probs):
            if s == k:
                return q
        return 0.0

    # -- kernel tables ---------------------------------------------------

    def kernel_law(self, backend=None):
        """Sampling tables in the form the walk kernels consume."""
        kern = _backend.get(backend)
        key = kern.__name__
        cached = self._kernel_laws.get(key)
        if cached is not None:
            return cached
        code = _KIND_CODES[self.kind]
        if self.kind == SIMPLE:
            kl = kern.KernelLaw(code, [1], [1.0], [0])
        elif self.kind == TABLE:
            prob, alias = _alias_table(self.probs)
            kl = kern.KernelLaw(code, self.support, prob, alias)
        else:
            K = self.table_cutoff
            s = 1.0 + self.alpha
            mags = np.arange(1, K + 1, dtype=np.float64)
            w = mags ** (-s) / special.zeta(s)
            tail = special.zeta(s, K + 1) / special.zeta(s)
            prob, alias = _alias_table(np.append(w, tail))
            values = np.append(np.arange(1, K + 1, dtype=np.int64), 0)
            kl = kern.KernelLaw(code, values, prob, alias, self.alpha, K)
        self._kernel_laws[key] = kl
        return kl


def _validate_table(support, probs):
    support = list(support)
    probs = list(probs)
    if len(support) == 0 or len(support) != len(probs):
        raise LawError("support and probs must be nonempty and of equal length")
    if any(int(k) != k for k in support):
        raise LawError("support must be integers")
    if len(set(int(k) for k in support)) != len(support):
        raise LawError("support has repeated points")
    if any(not math.isfinite(q) or q < 0 for q in probs):
        raise LawError("probabilities must be finite and nonnegative")
    if abs(math.fsum(probs) - 1.0) > 1e-12:
        raise LawError("probabilities sum to %r, not 1" % math.fsum(probs))
    return support, probs


def check_admissible(law):
    """Check mean zero, non-degeneracy and aperiodicity.

    Returns
    -------
    ok : bool
    reason : str
        Empty when ``ok``.

    Raises
    ------
    LawError
        If ``law`` is not a structurally valid law.
    """
    if not isinstance(law, IncrementLaw):
        raise LawError("not an IncrementLaw: %r" % (law,))
    if law.kind != TABLE:
        return True, ""
    live = [k for k, q in zip(law.support, law.probs) if q > 0]
    if len(live) < 2:
        return False, "law is constant"
    if abs(law.mean) > 1e-12:
        return False, "mean %r is not zero" % law.mean
    h = reduce(math.gcd, (abs(k) for k in live))
    if h > 1:
        return False, "support contained in %dℤ" % h
    return True, ""


def require_admissible(law):
    ok, reason = check_admissible(law)
    if not ok:
        raise InadmissibleLaw(reason)
    return law


def sample(law, rng, size=None, backend=None):
    """Draw increments.

    Returns a Python int when ``size`` is None, else an int64 array.
    """
    kern = _backend.get(backend)
    bg = as_bitgen(rng)
    n = 1 if size is None else int(size)
    out = kern.sample_n(law.kernel_law(backend), bg, n)
    return int(out[0]) if size is None else out


# -- presets -------------------------------------------------------------

def two_step():
    """X uniform on {-2, -1, 1, 2}."""
    return IncrementLaw.table([-2, -1, 1, 2], [0.25, 0.25, 0.25, 0.25])


def skip_free():
    """Upward skip-free law: +1 w.p. 2/3, -2 w.p. 1/3."""
    return IncrementLaw.table([1, -2], [2.0 / 3.0, 1.0 / 3.0])


PRESETS = ("simple", "two_step", "skip_free", "stable")


def preset(name, alpha=1.5):
    if name == "simple":
        return IncrementLaw.simple()
    if name in ("two_step", "two-step"):
        return two_step()
    if name in ("skip_free", "skip-free"):
        return skip_free()
    if name == "stable":
        return IncrementLaw.stable(alpha)
    raise LawError("unknown preset %r (choose from %s)" % (name, ", ".join(PRESETS)))


def load_law(spec, alpha=None):
    """Law from a preset name, a JSON file path, a JSON string or a mapping."""
    if isinstance(spec, IncrementLaw):
        return spec
    if isinstance(spec, dict):
        return IncrementLaw.from_config(spec)
    spec = str(spec)
    if spec in PRESETS or spec in ("two-step", "skip-free"):
        return preset(spec, 1.5 if alpha is None else alpha)
    if spec.lstrip().startswith("{"):
        cfg = json.loads(spec)
    else:
        with open(spec) as fh:
            cfg = json.load(fh)
    if alpha is not None and cfg.get("kind") == STABLE:
        cfg = dict(cfg, alpha=alpha)
    return IncrementLaw.from_config(cfg)


# -- exact laws of partial sums -----------------------------------------

class Pmf:
    """Integer-supported pmf stored densely from ``offset``."""

    def __init__(self, offset, probs):
        self.offset = int(offset)
        self.probs = np.asarray(probs, dtype=np.float64)

    @property
    def support(self):
        return np.arange(self.offset, self.offset + len(self.probs))

    def __getitem__(self, k):
        i = int(k) - self.offset
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0

    @property
    def mass(self):
        return math.fsum(self.probs)

    def mean(self):
        return float(np.dot(self.support, self.probs))

    def variance(self):
        mu = self.mean()
        return float(np.dot((self.support - mu) ** 2, self.probs))

    def prob_positive(self):
        i = max(0, 1 - self.offset)
        return math.fsum(self.probs[i:])


def _one_step_pmf(law, mass_tolerance, max_support):
    if law.kind != STABLE:
        lo, hi = min(law.support), max(law.support)
        p = np.zeros(hi - lo + 1)
        for k, q in zip(law.support, law.probs):
            p[k - lo] = q
        return Pmf(lo, p)
    if mass_tolerance <= 0:
        raise ResourceError("stable law has infinite support; need mass_tolerance > 0")
    s = 1.0 + law.alpha
    # smallest K with P(|X| > K) <= mass_tolerance
    K = int(math.ceil((mass_tolerance * law.alpha * special.zeta(s)) ** (-1.0 / law.alpha)))
    while K > 1 and special.zeta(s, K) / special.zeta(s) <= mass_tolerance:
        K -= 1
    while special.zeta(s, K + 1) / special.zeta(s) > mass_tolerance:
        K += 1
    if 2 * K + 1 > max_support:
        raise ResourceError("stable law needs support %d > budget %d" % (2 * K + 1, max_support))
    k = np.arange(-K, K + 1, dtype=np.float64)
    p = np.zeros(2 * K + 1)
    nz = k != 0
    p[nz] = np.abs(k[nz]) ** (-s) / law.normalization
    return Pmf(-K, p)


def exact_pmf(law, n, mass_tolerance=1e-12, max_support=10 ** 7):
    """Law of S_n = X_1 + ... + X_n by repeated convolution.

    Finite tables are convolved exactly (direct convolution, no truncation).
    The stable law is truncated at the smallest cutoff keeping the lost mass
    per step below ``mass_tolerance`` and convolved by FFT.

    Raises
    ------
    ResourceError
        If the support of S_n would exceed ``max_support`` points.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    step = _one_step_pmf(law, mass_tolerance, max_support)
    width = n * (len(step.probs) - 1) + 1
    if width > max_support:
        raise ResourceError("support of S_%d has %d points > budget %d" % (n, width, max_support))
    out = step.probs
    use_fft = law.kind == STABLE
    for _ in range(n - 1):
        if use_fft:
            out = np.clip(signal.fftconvolve(out, step.probs), 0.0, None)
        else:
            out = np.convolve(out, step.probs)
    return Pmf(n * step.offset, out)


def partial_sum_pmfs(law, n_max):
    """Yield ``exact_pmf(law, n)`` for n = 1..n_max incrementally (finite tables)."""
    if law.kind == STABLE:
        raise ValueError("incremental exact laws need a finite table")
    step = _one_step_pmf(law, 0.0, None)
    out = step.probs
    for n in range(1, int(n_max) + 1):
        if n > 1:
            out = np.convolve(out, step.probs)
        yield Pmf(n * step.offset, out)


# -- characteristic function --------------------------------------------

def _stable_deficit(alpha, t, rtol=1e-10):
    """sum over k >= 1 of k^(-1-alpha) (1 - cos kt), for 0 <= t <= pi.

    Uses the expansion of the polylogarithm about t = 0:
    -Gamma(-alpha) cos(pi alpha / 2) t^alpha
        + sum_j (-1)^(j+1) zeta(1 + alpha - 2j) t^(2j) / (2j)!
    which converges for |t| < 2 pi.  Vectorised over ``t``.
    """
    t = np.asarray(t, dtype=np.float64)
    s = 1.0 + alpha
    total = -special.gamma(-alpha) * math.cos(math.pi * alpha / 2.0) * t ** alpha
    power = np.ones_like(t)
    t2 = t * t
    for j in range(1, 200):
        power = power * t2 / ((2 * j - 1) * (2 * j))
        term = (-1) ** (j + 1) * special.zeta(s - 2 * j) * power
        total = total + term
        if np.all(np.abs(term) <= rtol * 1e-3 * np.abs(total)):
            return total
    raise ArithmeticError("series for the characteristic function did not converge")


def one_minus_phi(law, t):
    """1 - E cos(tX); ``t`` may be a scalar or an array in [-pi, pi]."""
    scalar = np.ndim(t) == 0
    t = np.abs(np.asarray(t, dtype=np.float64))
    if np.any(t > math.pi):
        raise ValueError("t must lie in [-pi, pi]")
    if law.kind == STABLE:
        out = _stable_deficit(law.alpha, t) / special.zeta(1.0 + law.alpha)
    else:
        out = np.zeros_like(t)
        for k, q in zip(law.support, law.probs):
            out += q * (1.0 - np.cos(k * t))
    return float(out) if scalar else out


def char_deficit(law, t):
    """1 - E exp(itX) as a complex array, ``t`` in [-pi, pi]."""
    t = np.asarray(t, dtype=np.float64)
    if law.kind == STABLE:
        return one_minus_phi(law, t).astype(np.complex128)
    out = np.zeros(t.shape, dtype=np.complex128)
    for k, q in zip(law.support, law.probs):
        out += q * (1.0 - np.exp(1j * k * t))
    return out


def small_t_constant(law):
    """beta with 1 - phi(t) ~ beta |t|^a as t -> 0 (a = tail_index)."""
    if law.kind == STABLE:
        a = law.alpha
        return -special.gamma(-a) * math.cos(math.pi * a / 2.0) / special.zeta(1.0 + a)
    return law.variance / 2.0


def char_fn_diagnostic(law, t_grid):
    """Normalised deficit |t|^(-a) (1 - phi(t)) on ``t_grid``.

    ``a`` is alpha for stable laws and 2 for finite-variance laws.  For a
    stable law the values flatten out as t -> 0; the limit is the constant
    beta of the domain of attraction.
    """
    a = law.tail_index
    out = []
    for t in t_grid:
        t = float(t)
        if not (0.0 < t <= math.pi):
            raise ValueError("t must lie in (0, pi], got %r" % t)
        out.append((t, abs(t) ** (-a) * one_minus_phi(law, t)))
    return out
