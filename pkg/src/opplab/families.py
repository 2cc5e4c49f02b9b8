"""Distribution functions F on [0, 1] driving the digit chains.

Three kinds are supported:

* ``uniform``          F(x) = x
* ``power``            F(x) = x**alpha
* ``perturbed-power``  F(x) = x**alpha * (c0 + c1*x) / (c0 + c1)

Besides float evaluation, each family can decide ``F(d) >= u`` exactly for
rational ``d`` and ``u`` as long as ``alpha`` is rational, which the exact
sampler relies on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError

KINDS = ("uniform", "power", "perturbed-power")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    frac = Fraction(value)
    # floats such as 0.5 or 2.0 are exact; 1/3 typed as a float gets its
    # nearest small-denominator rational so exact comparisons stay cheap
    small = frac.limit_denominator(10**6)
    if float(small) == float(frac):
        return small
    return frac


@dataclass(frozen=True)
class DistributionFamily:
    kind: str
    alpha: float = 1.0
    coeffs: tuple = ()
    _alpha_q: Fraction = field(init=False, repr=False, compare=False)
    _coeffs_q: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        alpha_q = _as_fraction(self.alpha)
        if alpha_q <= 0:
            raise DomainError("alpha must be positive")
        if self.kind == "uniform" and alpha_q != 1:
            raise DomainError("uniform family has alpha = 1")
        coeffs_q = tuple(_as_fraction(c) for c in self.coeffs)
        if self.kind == "perturbed-power":
            if len(coeffs_q) != 2:
                raise DomainError("perturbed-power needs coeffs (c0, c1)")
            c0, c1 = coeffs_q
            if c0 <= 0 or c0 + c1 <= 0:
                raise DomainError("perturbed-power needs c0 > 0 and c0 + c1 > 0")
        elif coeffs_q:
            raise DomainError(f"{self.kind} family takes no coeffs")
        object.__setattr__(self, "alpha", float(alpha_q))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs_q))
        object.__setattr__(self, "_alpha_q", alpha_q)
        object.__setattr__(self, "_coeffs_q", coeffs_q)
        if self.kind == "perturbed-power":
            grid = np.linspace(0.0, 1.0, 10_001)
            if np.any(np.diff(self.cdf(grid)) < -1e-15):
                raise DomainError("perturbed-power coefficients give a decreasing F")

    # constructors ---------------------------------------------------------
    @classmethod
    def uniform(cls) -> "DistributionFamily":
        return cls("uniform", 1.0)

    @classmethod
    def power(cls, alpha) -> "DistributionFamily":
        return cls("power", alpha)

    @classmethod
    def perturbed_power(cls, alpha, coeffs) -> "DistributionFamily":
        return cls("perturbed-power", alpha, tuple(coeffs))

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionFamily":
        kind = data.get("kind", "uniform")
        if kind == "uniform":
            return cls.uniform()
        if kind == "power":
            return cls.power(data["alpha"])
        return cls.perturbed_power(data["alpha"], data["coeffs"])

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "alpha": self.alpha}
        if self.coeffs:
            out["coeffs"] = list(self.coeffs)
        return out

    @property
    def alpha_fraction(self) -> Fraction:
        return self._alpha_q

    # float evaluation -----------------------------------------------------
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            out = x.copy()
        elif self.kind == "power":
            out = x**self.alpha
        else:
            c0, c1 = self.coeffs
            out = x**self.alpha * (c0 + c1 * x) / (c0 + c1)
        return out if out.ndim else float(out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a = self.alpha
        if self.kind == "uniform":
            out = np.ones_like(x)
        elif self.kind == "power":
            out = a * x ** (a - 1.0)
        else:
            c0, c1 = self.coeffs
            out = (a * c0 * x ** (a - 1.0) + (a + 1.0) * c1 * x**a) / (c0 + c1)
        return out if out.ndim else float(out)

    def ppf(self, u):
        """Inverse CDF on (0, 1]."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            out = u.copy()
        elif self.kind == "power":
            out = u ** (1.0 / self.alpha)
        elif self.alpha == 1.0:
            c0, c1 = self.coeffs
            s = u * (c0 + c1)
            # root of c1 x^2 + c0 x - s in the cancellation-free form
            out = 2.0 * s / (c0 + np.sqrt(c0 * c0 + 4.0 * c1 * s))
        else:
            out = self._ppf_bisect(u)
        return out if out.ndim else float(out)

    def _ppf_bisect(self, u):
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = 0.5 * (lo + hi)
        # one Newton polish step, kept inside the bracket
        dens = self.pdf(np.maximum(x, 1e-300))
        step = np.where(dens > 0, (self.cdf(x) - u) / np.where(dens > 0, dens, 1.0), 0.0)
        polished = x - step
        return np.where((polished >= lo) & (polished <= hi), polished, x)

    # exact evaluation -----------------------------------------------------
    def cdf_at_least(self, d: Fraction, u: Fraction) -> bool:
        """Exact test of ``F(d) >= u`` for rational ``d`` in [0, 1]."""
        d = Fraction(d)
        u = Fraction(u)
        if u <= 0:
            return True
        if d <= 0:
            return False
        a, b = self._alpha_q.numerator, self._alpha_q.denominator
        if self.kind == "perturbed-power":
            c0, c1 = self._coeffs_q
            return d**a * (c0 + c1 * d) ** b >= (u * (c0 + c1)) ** b
        return d**a >= u**b

    def cdf_exact(self, d: Fraction):
        """F(d) as a Fraction when alpha is an integer, else None."""
        if self._alpha_q.denominator != 1:
            return None
        d = Fraction(d)
        a = self._alpha_q.numerator
        if self.kind == "perturbed-power":
            c0, c1 = self._coeffs_q
            return d**a * (c0 + c1 * d) / (c0 + c1)
        return d**a
