"""Closed forms and quadrature for the dominating variable Y = 1/U, U ~ F.

P(Y > x) = F(1/x) for x >= 1.  For the power family the truncated moments
have elementary closed forms; everything else goes through adaptive
quadrature (QUADPACK via scipy) in the variable s = log y, where the
integrands are smooth.

Also here: the law of R for models with phi = 1 and q = 0 (the digits are
then i.i.d. with P(R > x) = F(1/(floor(x) + 1))), which gives exact
centering constants, and the Lüroth special case in rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError
from .families import DistributionFamily

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-12


def quad(fn, a, b, abs_tol=QUAD_ABS_TOL, rel_tol=QUAD_REL_TOL, points=None):
    """scipy.integrate.quad that raises instead of warning."""
    if a == b:
        return 0.0
    with np.errstate(all="ignore"):
        out = integrate.quad(fn, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=500,
                             points=points, full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3 and not math.isfinite(value):
        raise NumericError(f"quadrature on [{a}, {b}] diverged", residual=err)
    if err > max(abs_tol, rel_tol * abs(value)) * 100:
        raise NumericError(f"quadrature on [{a}, {b}] did not converge (err {err:.3g})", residual=err)
    return value


@dataclass(frozen=True)
class YModel:
    family: DistributionFamily

    @property
    def alpha(self) -> float:
        return self.family.alpha

    def tail(self, x):
        return y_tail(self, x)

    def trunc_moment(self, q, t):
        return y_trunc_moment(self, q, t)

    def tail_moment(self, q, t):
        return y_tail_moment(self, q, t)


def y_tail(y: YModel, x):
    """P(Y > x) = F(1/x), x >= 1."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 1.0):
        raise DomainError("y_tail needs x >= 1")
    return y.family.cdf(1.0 / x_arr)


def _power_trunc(alpha, q, t):
    if q == alpha:
        return alpha * math.log(t)
    return alpha * (t ** (q - alpha) - 1.0) / (q - alpha)


def y_trunc_moment(y: YModel, q: float, t: float) -> float:
    """E(Y^q I(Y <= t))."""
    if q <= 0:
        raise DomainError("q must be positive")
    if t < 1:
        raise DomainError("t must be at least 1")
    fam = y.family
    if fam.kind in ("uniform", "power"):
        return _power_trunc(fam.alpha, q, t)
    # density of Y at e^s times the Jacobian: f_U(e^{-s}) e^{-s}, weight e^{q s}
    return quad(lambda s: math.exp((q - 1.0) * s) * fam.pdf(math.exp(-s)), 0.0, math.log(t))


def y_tail_moment(y: YModel, q: float, t: float) -> float:
    """E(Y^q I(Y > t)); +inf when q >= alpha."""
    if q <= 0:
        raise DomainError("q must be positive")
    if t < 1:
        raise DomainError("t must be at least 1")
    fam = y.family
    if q >= fam.alpha:
        return math.inf
    if fam.kind in ("uniform", "power"):
        return fam.alpha * t ** (q - fam.alpha) / (fam.alpha - q)
    # U-variable form: int_0^{1/t} u^{-q} f(u) du, substituted u = e^{-s}
    return quad(lambda s: math.exp((q - 1.0) * s) * fam.pdf(math.exp(-s)), math.log(t), math.inf)


def h_function(y: YModel, x):
    """H(x) = E(Y I(Y <= x))."""
    if np.ndim(x):
        return np.array([y_trunc_moment(y, 1.0, float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
    return y_trunc_moment(y, 1.0, float(x))


@dataclass(frozen=True)
class SlowVariationReport:
    x_grid: tuple
    ratios: dict        # t -> tuple of H(t x)/H(x) along the grid
    final_deviation: dict
    margin: dict        # tol - final deviation
    passed: bool
    note: str = "heuristic at horizon"


def check_slow_variation(y: YModel, x_grid=None, ts=(0.5, 2.0, 10.0), tol: float = 0.05) -> SlowVariationReport:
    """H(t x)/H(x) -> 1 along an increasing grid, for each t."""
    x_grid = np.logspace(1.0, 40.0, 40) if x_grid is None else np.asarray(x_grid, dtype=float)
    ratios, dev, margin = {}, {}, {}
    for t in ts:
        vals = tuple(h_function(y, max(t * x, 1.0)) / h_function(y, x) for x in x_grid)
        ratios[t] = vals
        dev[t] = abs(vals[-1] - 1.0)
        margin[t] = tol - dev[t]
    passed = all(m > 0 for m in margin.values())
    return SlowVariationReport(tuple(x_grid), ratios, dev, margin, passed)


# Lüroth truncated mean -------------------------------------------------------
def luroth_er_trunc(t) -> Fraction:
    """E[min(R, t)] for P(R = k) = 1/(k(k+1)), exactly.

    Equals sum_{k=1}^{floor t} 1/(k+1) + t/(floor t + 1).
    """
    t = Fraction(t)
    if t < 1:
        raise DomainError("t must be at least 1")
    m = math.floor(t)
    total = sum((Fraction(1, k + 1) for k in range(1, m + 1)), Fraction(0))
    return total + t / (m + 1)


def harmonic(m):
    """H_m for integer-valued float arrays (digamma form, exact enough in float)."""
    m = np.asarray(m, dtype=float)
    return special.digamma(m + 1.0) + np.euler_gamma


def luroth_er_trunc_float(t):
    """Float version of :func:`luroth_er_trunc`, vectorised, for caps up to 1e300."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise DomainError("t must be at least 1")
    m = np.floor(t)
    return harmonic(m + 1.0) - 1.0 + t / (m + 1.0)


# law of R when phi = 1, q = 0 ---------------------------------------------------
_DIRECT = 200_000


def _increment(k, p):
    """k^p - (k-1)^p without cancellation for large k."""
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore"):
        return -(k**p) * np.expm1(p * np.log1p(-1.0 / k))


@dataclass(frozen=True)
class IidDigitLaw:
    """Law of R = B for phi = 1, q = 0: P(R >= k) = G(k) := F(1/k), k >= 1."""

    family: DistributionFamily

    def G(self, k):
        return self.family.cdf(1.0 / np.asarray(k, dtype=float))

    def pmf(self, k):
        k = np.asarray(k, dtype=float)
        return self.G(k) - self.G(k + 1.0)

    def sf(self, x):
        """P(R > x) for real x >= 0."""
        return self.G(np.floor(np.asarray(x, dtype=float)) + 1.0)

    def _sum(self, weight, lo: int, hi: int) -> float:
        """sum_{k=lo}^{hi} weight(k) G(k); hi may be inf."""
        if hi < lo:
            return 0.0
        stop = hi if hi - lo < _DIRECT else lo + _DIRECT
        k = np.arange(lo, stop + 1, dtype=float)
        total = math.fsum(weight(k) * self.G(k))
        if stop == hi:
            return total
        # midpoint rule for the smooth remainder (integrated in log s), with
        # its leading Euler-Maclaurin correction
        f = lambda s: weight(s) * float(self.G(s))
        a, b = stop + 0.5, hi + 0.5
        h = 1e-3
        deriv = lambda s: (f(s + h) - f(s - h)) / (2 * h)
        # the infinite range is cut at s = e^700, where the integrand of any
        # row with q < alpha - 0.1 is below 1e-30
        tail = quad(lambda x: math.exp(x) * f(math.exp(x)), math.log(a), min(math.log(b), 700.0),
                    abs_tol=1e-13, rel_tol=1e-10)
        if math.isfinite(b):
            tail -= (deriv(b) - deriv(a)) / 24.0
        else:
            tail += deriv(a) / 24.0
        return total + tail

    def capped_moment(self, p: float, c: float) -> float:
        """E[min(R, c)^p] = sum_{k<=m} (k^p - (k-1)^p) G(k) + (c^p - m^p) G(m+1), m = floor c."""
        if c < 1:
            raise DomainError("cap must be at least 1")
        m = math.floor(c)
        if self.family.kind == "uniform" and p in (1, 2):
            hm = float(harmonic(m))
            if p == 1:
                return hm + (c - m) / (m + 1)
            return 2 * m - hm + (c * c - m * m) / (m + 1)
        body = self._sum(lambda k: _increment(k, p), 1, m)
        return body + (c**p - m**p) * float(self.G(m + 1))

    def trunc_moment(self, q: float, t: float) -> float:
        """E[R^q I(R <= t)] = E min(R,t)^q - t^q P(R > t)."""
        return self.capped_moment(q, t) - t**q * float(self.sf(t))

    def tail_moment(self, q: float, t: float) -> float:
        """E[R^q I(R > t)]; +inf when q >= alpha."""
        if q >= self.family.alpha:
            return math.inf
        m = math.floor(t)
        first = (m + 1.0) ** q * float(self.G(m + 1))
        return first + self._sum(lambda k: _increment(k, q), m + 2, math.inf)

    def trunc_mean(self, t: float) -> float:
        """E[R I(R <= t)]."""
        if self.family.kind == "uniform":
            return float(harmonic(math.floor(t) + 1) - 1.0)
        return self.trunc_moment(1.0, t)

    def capped_mean(self, c):
        """E[min(R, c)], vectorised over caps."""
        c = np.asarray(c, dtype=float)
        if self.family.kind == "uniform":
            return luroth_er_trunc_float(c)
        return np.vectorize(lambda v: self.capped_moment(1.0, v), otypes=[float])(c)


# integration-by-parts identity ------------------------------------------------
@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    gap: float
    passed: bool


def tail_integral_identity(law, q: float, t: float, c: float = 0.0, tol: float = 1e-8) -> IdentityCheck:
    """q int_c^t s^{q-1} P(X > s) ds  versus  t^q P(X>t) - c^q P(X>c) + E[X^q I(c <= X <= t)].

    ``law`` is a :class:`YModel` (left side by quadrature of the tail, right
    side from the density) or a 1-d sample (both sides exact for the
    empirical distribution).
    """
    if q <= 0:
        raise DomainError("q must be positive")
    if not 0 <= c <= t:
        raise DomainError("need 0 <= c <= t")
    if isinstance(law, YModel):
        fam = law.family
        tail = lambda s: 1.0 if s <= 1.0 else float(fam.cdf(1.0 / s))
        pieces = [(c, min(t, 1.0)), (max(c, 1.0), t)]
        lhs = 0.0
        for a, b in pieces:
            if b > a:
                lhs += quad(lambda s: q * s ** (q - 1.0) * tail(s), a, b)
        lo = max(c, 1.0)
        # Y >= 1 has no atoms, so E[Y^q I(c <= Y <= t)] = E[Y^q I(Y<=t)] - E[Y^q I(Y<=lo)]
        middle = (y_trunc_moment(law, q, t) - y_trunc_moment(law, q, lo)) if t >= 1 else 0.0
        rhs = t**q * tail(t) - (c**q * tail(c) if c > 0 else 0.0) + middle
    else:
        x = np.asarray(law, dtype=float)
        lhs = float(np.mean(np.clip(np.minimum(x, t) ** q - c**q, 0.0, None)))
        mask = (x > c) & (x <= t)
        rhs = (t**q * float(np.mean(x > t)) - c**q * float(np.mean(x > c))
               + float(np.mean(np.where(mask, x**q, 0.0))))
    gap = abs(lhs - rhs)
    return IdentityCheck(lhs, rhs, gap, gap < tol * (1.0 + abs(rhs)))
