"""Limit functions and growth constants.

Every integral here has integrable endpoint singularities of the form
t^(p-1) with p in (0, 1).  Each is removed analytically by a power
substitution before the integral is handed to adaptive Gauss-Kronrod
quadrature (``scipy.integrate.quad``).

Notation: ``a = alpha / 2``.
"""

import math
import warnings

import numpy as np
from scipy import integrate, optimize

DEFAULT_TOL = 1e-10


class QuadratureError(ArithmeticError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class Estimate(float):
    """A float carrying its quadrature error estimate in ``.error``."""

    def __new__(cls, value, error=0.0):
        obj = super().__new__(cls, value)
        obj.error = float(error)
        return obj


def _quad(f, lo, hi, tol, points=None):
    if hi <= lo:
        return 0.0, 0.0
    if points is not None:
        points = [p for p in points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, lo, hi, epsabs=tol / 10, epsrel=0.0,
                                      limit=1000, points=points)
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                val, err = integrate.quad(f, lo, hi, epsabs=tol / 10, epsrel=0.0,
                                          limit=1000, points=points)
            if err > tol:
                raise QuadratureError(str(exc), val, err)
    if err > tol:
        raise QuadratureError("error estimate %g exceeds %g" % (err, tol), val, err)
    return val, err


def _probability(val, err, tol, name):
    if not (-tol <= val <= 1 + tol):
        raise QuadratureError("%s = %r is not a probability" % (name, val), val, err)
    return Estimate(min(1.0, max(0.0, val)), err)


def _check_alpha(alpha, lo=1.0, hi=2.0, closed_hi=False):
    ok = lo < alpha < hi or (closed_hi and alpha == hi)
    if not ok:
        raise ValueError("alpha = %r outside (%g, %g%s" % (alpha, lo, hi, "]" if closed_hi else ")"))


# -- beta-type integrals ---------------------------------------------------

def beta_segment(p, q, lo, hi, tol=DEFAULT_TOL):
    """Integral of x^(p-1) (1-x)^(q-1) over [lo, hi], 0 <= lo <= hi <= 1.

    The range is split at 1/2.  On the left piece x = t^(1/p) turns the
    factor x^(p-1) dx into dt/p; on the right piece x = 1 - t^(1/q) does the
    same for (1-x)^(q-1).

    Returns
    -------
    value, error
    """
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError("need 0 <= lo <= hi <= 1")
    val = err = 0.0
    mid = 0.5
    if lo < mid:
        top = min(hi, mid)
        f = lambda t: (1.0 - t ** (1.0 / p)) ** (q - 1.0) / p
        v, e = _quad(f, lo ** p, top ** p, tol / 2)
        val += v
        err += e
    if hi > mid:
        bot = max(lo, mid)
        g = lambda t: (1.0 - t ** (1.0 / q)) ** (p - 1.0) / q
        v, e = _quad(g, (1.0 - hi) ** q, (1.0 - bot) ** q, tol / 2)
        val += v
        err += e
    return val, err


def beta_norm(alpha):
    """Gamma(alpha) / Gamma(alpha/2)^2."""
    return math.gamma(alpha) / math.gamma(alpha / 2.0) ** 2


def beta_identity_residual(alpha, tol=DEFAULT_TOL):
    """|integral over [0,1] of (u(1-u))^(a-1)  -  Gamma(a)^2 / Gamma(alpha)|.

    Also checks the half-range form (twice the integral over [1/2, 1]).
    """
    a = alpha / 2.0
    full, _ = beta_segment(a, a, 0.0, 1.0, tol)
    half, _ = beta_segment(a, a, 0.5, 1.0, tol)
    exact = 1.0 / beta_norm(alpha)
    return max(abs(full - exact), abs(2.0 * half - exact))


# -- hitting and exit limits ------------------------------------------------

def q2(y, c=1.0):
    """Hit-before-exit limit for finite-variance walks: 1 - y."""
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    if c <= 0:
        raise ValueError("c must be positive")
    return 1.0 - y


def q_alpha(alpha, y, c=1.0, tol=DEFAULT_TOL):
    """Limit of P_{yN}(hit 0 before leaving [-cN, N]) for alpha in (1, 2).

    q(y; c) = (alpha-1) c^(1-a) (1+c)^(alpha-1) (y+c)^a y^(alpha-1)
              * integral_y^1 (y + c v)^(-alpha) (1-v)^(a-1) dv

    The integral is split at v = max(y, 1/2).  On [y, 1/2] the substitution
    v = y e^s, after absorbing y^(alpha-1), leaves the scale-free integrand
    e^s (1 + c e^s)^(-alpha) (1 - y e^s)^(a-1).  On the remaining piece
    v = 1 - w^(1/a) removes the endpoint singularity (1-v)^(a-1).
    """
    _check_alpha(alpha)
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    if c <= 0:
        raise ValueError("c must be positive")
    if y == 0.0:
        return Estimate(1.0)
    if y == 1.0:
        return Estimate(0.0)
    a = alpha / 2.0
    pref = ((alpha - 1.0) * c ** (1.0 - a) * (1.0 + c) ** (alpha - 1.0)
            * (y + c) ** a)
    total = err = 0.0
    v0 = max(y, 0.5)
    if y < 0.5:
        near = lambda s: (math.exp(s) * (1.0 + c * math.exp(s)) ** (-alpha)
                          * (1.0 - y * math.exp(s)) ** (a - 1.0))
        top = math.log(0.5 / y)
        pts = [math.log(r) for r in (2.0, 10.0, 100.0) if math.log(r) < top]
        v, e = _quad(near, 0.0, top, tol / (2 * pref), points=pts)
        total += v
        err += e
    far = lambda w: (y + c * (1.0 - w ** (1.0 / a))) ** (-alpha) / a
    scale = y ** (alpha - 1.0)
    v, e = _quad(far, 0.0, (1.0 - v0) ** a, tol / (2 * pref * scale))
    total += scale * v
    err += scale * e
    return _probability(pref * total, pref * err, tol, "q_alpha")


def q_lower_bound(alpha, y, c=1.0):
    """(alpha-1) c^(1-a) (c+y)^(a-1) (1-y), a lower bound for q_alpha."""
    a = alpha / 2.0
    return (alpha - 1.0) * c ** (1.0 - a) * (c + y) ** (a - 1.0) * (1.0 - y)


def u_alpha_yc(alpha, y, c=1.0):
    """Closed form of q_alpha with the factor (1-v)^(a-1) dropped; <= q_alpha."""
    a = alpha / 2.0
    if y == 0:
        return 1.0
    return ((c + y) / c) ** a * (1.0 - ((1.0 + c) / (1.0 + c / y)) ** (alpha - 1.0))


def gambler_limit(alpha, c, tol=DEFAULT_TOL):
    """Limit of P_0(walk leaves [-cN, N] on the right).

    c/(1+c) for alpha = 2; for alpha in (1, 2) the regularised incomplete
    beta integral from 1/(1+c) to 1 with both parameters alpha/2.
    """
    _check_alpha(alpha, closed_hi=True)
    if c < 0:
        raise ValueError("c must be nonnegative")
    if alpha == 2.0:
        return Estimate(c / (1.0 + c))
    a = alpha / 2.0
    val, err = beta_segment(a, a, 1.0 / (1.0 + c), 1.0, tol)
    k = beta_norm(alpha)
    return _probability(k * val, k * err, tol, "gambler_limit")


def q_upper_strict(alpha, delta, c=1.0, tol=DEFAULT_TOL, grid=21):
    """Bound 1 - Gamma(alpha)/Gamma(a)^2 * integral_{1-delta}^1 (u(1-u))^(a-1) du
    on sup over y in [delta, 1] of q_alpha(y; c).

    The bound is checked to dominate q_alpha on ``grid`` points of
    [delta, 1] (and to be < 1); a failed check raises ``ArithmeticError``.
    """
    _check_alpha(alpha)
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    a = alpha / 2.0
    val, err = beta_segment(a, a, 1.0 - delta, 1.0, tol)
    bound = 1.0 - beta_norm(alpha) * val
    if not bound < 1.0:
        raise ArithmeticError("upper bound %r is not below 1" % bound)
    for y in np.linspace(delta, 1.0, int(grid)):
        q = q_alpha(alpha, float(y), c, tol)
        if q > bound + tol:
            raise ArithmeticError("q_alpha(%g) = %r exceeds bound %r" % (y, float(q), bound))
    return Estimate(max(bound, 0.0), beta_norm(alpha) * err)


# -- overshoot laws ---------------------------------------------------------

def dynkin_lamperti_density(alpha, v):
    """f(v) = sin(pi a)/pi * v^(-a) / (1 + v), v > 0."""
    _check_alpha(alpha, lo=0.0)
    a = alpha / 2.0
    v = np.asarray(v, dtype=np.float64)
    return math.sin(math.pi * a) / math.pi * v ** (-a) / (1.0 + v)


def dynkin_lamperti_tail(alpha, u, tol=DEFAULT_TOL):
    """Integral of the Dynkin-Lamperti density over (u, infinity).

    With x = v / (1 + v) the tail is
    sin(pi a)/pi * integral_{u/(1+u)}^1 x^(-a) (1-x)^(a-1) dx,
    a beta-type integral with parameters (1 - a, a).
    """
    _check_alpha(alpha, lo=0.0)
    if u < 0:
        raise ValueError("u must be nonnegative")
    a = alpha / 2.0
    val, err = beta_segment(1.0 - a, a, u / (1.0 + u), 1.0, tol)
    k = math.sin(math.pi * a) / math.pi
    return _probability(k * val, k * err, tol, "dynkin_lamperti_tail")


def _jump_integral(alpha, lo, tol):
    """Integral over (lo, inf) of dv / (v^a (2+v)^a (1+v)), lo >= 0."""
    a = alpha / 2.0
    val = err = 0.0
    if lo < 1.0:
        # v = t^(1/(1-a)) absorbs v^(-a)
        e = 1.0 / (1.0 - a)
        f = lambda t: e * (2.0 + t ** e) ** (-a) / (1.0 + t ** e)
        v1, e1 = _quad(f, lo ** (1.0 - a), 1.0, tol / 2)
        val += v1
        err += e1
    # v = 1/s, then s = r^(1/alpha) absorbs s^(alpha-1)
    top = 1.0 / max(lo, 1.0)

    def g(r):
        s = r ** (1.0 / alpha)
        return (2.0 * s + 1.0) ** (-a) / (s + 1.0) / alpha

    v2, e2 = _quad(g, 0.0, top ** alpha, tol / 2)
    return val + v2, err + e2


def s_alpha(alpha, w, tol=DEFAULT_TOL):
    """Limit of P_0(|S at exit from [-x, x]| > (w + 1) x), w >= 0."""
    _check_alpha(alpha)
    if w < 0:
        raise ValueError("w must be nonnegative")
    val, err = _jump_integral(alpha, w, tol)
    k = 2.0 * math.sin(math.pi * alpha / 2.0) / math.pi
    return _probability(k * val, k * err, tol, "s_alpha")


def u_alpha_w(alpha, w, tol=DEFAULT_TOL):
    """u(w) = 2^(a-1) (alpha-1) sin(pi a)/pi * integral_{w-1}^inf dv / (v^a (2+v)^a (1+v))."""
    _check_alpha(alpha)
    if not w > 1:
        raise ValueError("w must exceed 1")
    a = alpha / 2.0
    val, err = _jump_integral(alpha, w - 1.0, tol)
    k = 2.0 ** (a - 1.0) * (alpha - 1.0) * math.sin(math.pi * a) / math.pi
    return _probability(k * val, k * err, tol, "u_alpha_w")


def q_lower_envelope(alpha, u, s):
    """((alpha-1)/(1+u)) ((s-u)/s)^(1-a) for 1 < u < s."""
    if not 1.0 < u < s:
        raise ValueError("need 1 < u < s")
    return (alpha - 1.0) / (1.0 + u) * ((s - u) / s) ** (1.0 - alpha / 2.0)


# -- growth constants -------------------------------------------------------

def c_alpha(alpha):
    """(alpha-1)(2-alpha)^(2-alpha) / ((4-alpha)(3-alpha)^3)."""
    _check_alpha(alpha)
    return (alpha - 1.0) * (2.0 - alpha) ** (2.0 - alpha) / ((4.0 - alpha) * (3.0 - alpha) ** 3)


def C_alpha_prime(alpha):
    """(alpha-1)^(-1) (4-alpha)(3-alpha)^3 (2-alpha)^(alpha-2)."""
    _check_alpha(alpha)
    return (4.0 - alpha) * (3.0 - alpha) ** 3 * (2.0 - alpha) ** (alpha - 2.0) / (alpha - 1.0)


def _cpp_objective(alpha, C, tol):
    return min(C - 2.0, float(u_alpha_w(alpha, 1.5 * (C - 1.0), tol))) / (C + 1.0)


def C_alpha_double_prime(alpha, tol=DEFAULT_TOL, upper=1e3, offset=1e-6, grid=200):
    """2 + sup over C > C'_alpha of min(C - 2, u(3(C-1)/2)) / (C + 1).

    A log-spaced grid scan over [C' + offset, upper] locates the best cell,
    which is then refined by bounded Brent maximisation (xatol 1e-8).
    """
    lo = C_alpha_prime(alpha) + offset
    if not lo < upper:
        raise ArithmeticError("cannot bracket: C' = %r >= %r" % (lo, upper))
    xs = np.geomspace(lo, upper, int(grid))
    vals = np.array([_cpp_objective(alpha, x, tol) for x in xs])
    i = int(np.argmax(vals))
    a_, b_ = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    res = optimize.minimize_scalar(lambda C: -_cpp_objective(alpha, C, tol),
                                   bounds=(a_, b_), method="bounded",
                                   options={"xatol": 1e-8})
    best = max(vals[i], -res.fun if res.success else -np.inf)
    return 2.0 + float(best)


def growth_constants(alpha, tol=DEFAULT_TOL):
    """(c_alpha, C'_alpha, C''_alpha, c'_alpha = 1 / C''_alpha)."""
    Cpp = C_alpha_double_prime(alpha, tol)
    return c_alpha(alpha), C_alpha_prime(alpha), Cpp, 1.0 / Cpp


def theory_table(alpha, c=1.0, y=0.5, u=1.0, s=None, w=None, tol=DEFAULT_TOL):
    """Dictionary of every limit object at the given arguments (for reports)."""
    out = {"alpha": alpha, "tolerance": tol}

    def put(name, val):
        out[name] = {"value": float(val), "error": float(getattr(val, "error", 0.0))}

    put("q2", q2(y, c))
    put("gambler_limit", gambler_limit(alpha, c, tol))
    if alpha < 2:
        put("q_alpha", q_alpha(alpha, y, c, tol))
        put("q_lower_bound", q_lower_bound(alpha, y, c))
        put("dynkin_lamperti_tail", dynkin_lamperti_tail(alpha, u, tol))
        put("dynkin_lamperti_density", dynkin_lamperti_density(alpha, u))
        put("u_alpha_w", u_alpha_w(alpha, w if w is not None else 1.0 + u, tol))
        if s is not None and s > u > 1:
            put("q_lower_envelope", q_lower_envelope(alpha, u, s))
        ca, Cp, Cpp, cp = growth_constants(alpha, tol)
        put("c_alpha", ca)
        put("C_alpha_prime", Cp)
        put("C_alpha_double_prime", Cpp)
        put("c_alpha_prime", cp)
    return out
