"""Digit-chain model: digit maps, the delta function, presets and
grid checks of the regularity conditions imposed on F.

A model is the triple (phi, q, F).  Given digits h_1..h_n the next digit
takes the value k >= ceil(phi(h_n)) with probability

    F(delta(phi(h_n), k, q_n)) - F(delta(phi(h_n), k + 1, q_n)),
    delta(phi, k, q) = phi (1 + q) / (k + phi q),

and the ratio variable is R_n = 1 / delta(phi(B_n), B_{n+1}, Q_n).

The printed form of delta has ``(1 + y)`` in the numerator; no ``y`` is in
scope there, and only ``(1 + q)`` makes R_n = 1/delta consistent, so that
reading is used throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .families import DistributionFamily, _as_fraction

HEURISTIC_NOTE = "heuristic at horizon"


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


# digit maps ---------------------------------------------------------------
class Phi:
    """phi: positive integers -> positive rationals."""

    name = "phi"
    constant = False
    integer_valued = True

    def __call__(self, h: int):
        raise NotImplementedError

    def float_eval(self, h):
        """Vectorised evaluation on float arrays holding exact integers."""
        return np.vectorize(lambda v: float(self(int(v))), otypes=[float])(h)

    def log_eval(self, log_h):
        raise ConfigurationError(f"{self.name} has no log-scale form for large digits")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantPhi(Phi):
    value: Fraction = Fraction(1)
    name = "constant"
    constant = True

    def __post_init__(self):
        object.__setattr__(self, "value", _as_fraction(self.value))
        if self.value <= 0:
            raise DomainError("phi must be positive")

    @property
    def integer_valued(self):
        return self.value.denominator == 1

    def __call__(self, h):
        return self.value

    def float_eval(self, h):
        return np.full(np.shape(h), float(self.value))

    def log_eval(self, log_h):
        return np.full(np.shape(log_h), math.log(self.value))

    def to_dict(self):
        return {"kind": "constant", "value": str(self.value)}


@dataclass(frozen=True)
class LinearPhi(Phi):
    """phi(h) = scale * h; scale = 1 is the Engel map."""

    scale: Fraction = Fraction(1)
    name = "linear"

    def __post_init__(self):
        object.__setattr__(self, "scale", _as_fraction(self.scale))
        if self.scale <= 0:
            raise DomainError("phi must be positive")

    @property
    def integer_valued(self):
        return self.scale.denominator == 1

    def __call__(self, h):
        return self.scale * h

    def float_eval(self, h):
        return float(self.scale) * np.asarray(h, dtype=float)

    def log_eval(self, log_h):
        return math.log(self.scale) + np.asarray(log_h)

    def to_dict(self):
        return {"kind": "linear", "scale": str(self.scale)}


@dataclass(frozen=True)
class SylvesterPhi(Phi):
    """phi(h) = h (h + 1)."""

    name = "sylvester"

    def __call__(self, h):
        return Fraction(h * (h + 1))

    def float_eval(self, h):
        h = np.asarray(h, dtype=float)
        return h * (h + 1.0)

    def log_eval(self, log_h):
        log_h = np.asarray(log_h)
        return 2.0 * log_h + np.log1p(np.exp(-log_h))

    def to_dict(self):
        return {"kind": "sylvester"}


@dataclass(frozen=True)
class TablePhi(Phi):
    """User table h -> phi(h); digits past the table fall back to ``default``."""

    table: tuple = ()
    default: Phi | None = None
    name = "table"

    def __post_init__(self):
        items = tuple(sorted((int(h), _as_fraction(v)) for h, v in dict(self.table).items()))
        if any(h < 1 or v <= 0 for h, v in items):
            raise DomainError("phi table needs h >= 1 and phi(h) > 0")
        object.__setattr__(self, "table", items)

    @property
    def integer_valued(self):
        ok = all(v.denominator == 1 for _, v in self.table)
        return ok and (self.default is None or self.default.integer_valued)

    def __call__(self, h):
        for key, val in self.table:
            if key == h:
                return val
        if self.default is None:
            raise DomainError(f"digit {h} not covered by the phi table")
        return self.default(h)

    def log_eval(self, log_h):
        if self.default is None:
            return super().log_eval(log_h)
        return self.default.log_eval(log_h)

    def to_dict(self):
        out = {"kind": "table", "table": {str(h): str(v) for h, v in self.table}}
        if self.default is not None:
            out["default"] = self.default.to_dict()
        return out


def phi_from_dict(data: dict) -> Phi:
    kind = data.get("kind")
    if kind == "constant":
        return ConstantPhi(data.get("value", 1))
    if kind == "linear":
        return LinearPhi(data.get("scale", 1))
    if kind == "sylvester":
        return SylvesterPhi()
    if kind == "table":
        default = phi_from_dict(data["default"]) if data.get("default") else None
        return TablePhi(tuple(data["table"].items()), default)
    raise ConfigurationError(f"unknown phi kind {kind!r}")


# q maps -------------------------------------------------------------------
class QSpec:
    constant = False

    def value(self, history: Sequence[int]) -> Fraction:
        raise NotImplementedError

    def float_eval(self, b_last, log_b_last):
        raise ConfigurationError("this q map has no vectorised form; use exact mode")


@dataclass(frozen=True)
class ConstantQ(QSpec):
    q: Fraction = Fraction(0)
    constant = True

    def __post_init__(self):
        object.__setattr__(self, "q", _as_fraction(self.q))
        if self.q < 0:
            raise DomainError("q must be nonnegative")

    def value(self, history):
        return self.q

    def float_eval(self, b_last, log_b_last):
        return np.full(np.shape(log_b_last), float(self.q))

    def to_dict(self):
        return {"kind": "constant", "value": str(self.q)}


@dataclass(frozen=True)
class ReciprocalQ(QSpec):
    """q_n = scale / h_n, a history-dependent example."""

    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "scale", _as_fraction(self.scale))
        if self.scale < 0:
            raise DomainError("q must be nonnegative")

    def value(self, history):
        return self.scale / history[-1]

    def float_eval(self, b_last, log_b_last):
        return float(self.scale) * np.exp(-np.asarray(log_b_last))

    def to_dict(self):
        return {"kind": "reciprocal", "scale": str(self.scale)}


@dataclass(frozen=True)
class CallableQ(QSpec):
    fn: Callable[[Sequence[int]], Fraction] = None

    def value(self, history):
        q = _as_fraction(self.fn(history))
        if q < 0:
            raise DomainError("q must be nonnegative")
        return q

    def to_dict(self):
        return {"kind": "callable", "fn": getattr(self.fn, "__name__", "fn")}


def q_from_dict(data: dict) -> QSpec:
    kind = data.get("kind", "constant")
    if kind == "constant":
        return ConstantQ(data.get("value", 0))
    if kind == "reciprocal":
        return ReciprocalQ(data.get("scale", 1))
    raise ConfigurationError(f"unknown q kind {kind!r}")


# delta and R --------------------------------------------------------------
def _check_phi_k(phi_val, k):
    phi_val = _as_fraction(phi_val)
    if phi_val <= 0:
        raise DomainError(f"phi must be positive, got {phi_val}")
    if int(k) != k or k < _ceil(phi_val):
        raise DomainError(f"digit {k} is below the minimal digit ceil(phi) = {_ceil(phi_val)}")
    return phi_val


def delta(phi_val, k: int, q) -> Fraction:
    """phi (1 + q) / (k + phi q), in (0, 1] for admissible k."""
    phi_val = _check_phi_k(phi_val, k)
    q = _as_fraction(q)
    if q < 0:
        raise DomainError("q must be nonnegative")
    return phi_val * (1 + q) / (int(k) + phi_val * q)


def r_from_digits(b_next: int, phi_val, q_val) -> Fraction:
    phi_val = _check_phi_k(phi_val, b_next)
    q_val = _as_fraction(q_val)
    if q_val < 0:
        raise DomainError("q must be nonnegative")
    return (int(b_next) + phi_val * q_val) / (phi_val * (1 + q_val))


# the model ----------------------------------------------------------------
@dataclass(frozen=True)
class ModelSpec:
    name: str
    phi: Phi
    q: QSpec = field(default_factory=ConstantQ)
    family: DistributionFamily | tuple = field(default_factory=DistributionFamily.uniform)
    alpha_meta: float | None = None
    l_meta: float | None = None
    # law of B_1: the first digit is drawn as if phi = b1_phi and q = b1_q
    b1_phi: Fraction = Fraction(1)
    b1_q: Fraction = Fraction(0)
    meta_tol: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "b1_phi", _as_fraction(self.b1_phi))
        object.__setattr__(self, "b1_q", _as_fraction(self.b1_q))
        if isinstance(self.family, list):
            object.__setattr__(self, "family", tuple(self.family))
        if self.alpha_meta is not None:
            for fam in self.families():
                rep = check_cond2F(fam, self.alpha_meta)
                if not rep.passed:
                    raise ConfigurationError(
                        f"{self.name}: F does not satisfy the tail condition at alpha={self.alpha_meta}")
                if self.l_meta is not None and not rep.degenerate:
                    if abs(rep.l_hat - self.l_meta) > self.meta_tol * max(1.0, abs(self.l_meta)):
                        raise ConfigurationError(
                            f"{self.name}: declared L={self.l_meta} but grid gives {rep.l_hat:.6g}")

    def families(self):
        return self.family if isinstance(self.family, tuple) else (self.family,)

    def family_at(self, n: int) -> DistributionFamily:
        """F_n; a per-index tuple repeats its last entry past its length."""
        if isinstance(self.family, tuple):
            return self.family[min(n, len(self.family)) - 1]
        return self.family

    @property
    def stationary(self) -> bool:
        return not isinstance(self.family, tuple) or len(set(self.family)) == 1

    @property
    def iid_steps(self) -> bool:
        """R_n depends only on the n-th uniform (constant phi, constant q)."""
        return self.phi.constant and self.q.constant and self.stationary

    @property
    def is_iid_digit_model(self) -> bool:
        """phi = 1 and q = 0 everywhere: B_1, B_2, ... i.i.d. and R_n = B_{n+1}."""
        return (self.iid_steps and self.phi(1) == 1 and self.q.value([1]) == 0
                and self.b1_phi == 1 and self.b1_q == 0)

    def to_dict(self) -> dict:
        fam = [f.to_dict() for f in self.family] if isinstance(self.family, tuple) else self.family.to_dict()
        return {
            "name": self.name,
            "phi": self.phi.to_dict(),
            "q": self.q.to_dict(),
            "family": fam,
            "alpha": self.alpha_meta,
            "L": self.l_meta,
            "b1_phi": str(self.b1_phi),
            "b1_q": str(self.b1_q),
        }


PRESETS = ("luroth", "engel", "sylvester")


def preset(name: str, family: DistributionFamily | None = None) -> ModelSpec:
    """Lüroth (phi = 1), Engel (phi(h) = h) or Sylvester (phi(h) = h(h+1)), q = 0."""
    family = family or DistributionFamily.uniform()
    phis = {"luroth": ConstantPhi(1), "engel": LinearPhi(1), "sylvester": SylvesterPhi()}
    if name not in phis:
        raise ConfigurationError(f"unknown preset {name!r}; expected one of {PRESETS}")
    l_meta = 1.0 if family.kind != "perturbed-power" else family.coeffs[0] / sum(family.coeffs)
    return ModelSpec(name=name, phi=phis[name], q=ConstantQ(0), family=family,
                     alpha_meta=family.alpha, l_meta=l_meta)


def iid_model(family: DistributionFamily, name: str | None = None) -> ModelSpec:
    """phi = 1, q = 0 with a general F; the digits are i.i.d. with R_n = B_{n+1}."""
    label = name or f"iid-{family.kind}-{family.alpha:g}"
    l_meta = 1.0 if family.kind != "perturbed-power" else family.coeffs[0] / sum(family.coeffs)
    return ModelSpec(name=label, phi=ConstantPhi(1), q=ConstantQ(0), family=family,
                     alpha_meta=family.alpha, l_meta=l_meta)


# condition checks ---------------------------------------------------------
@dataclass(frozen=True)
class ConditionReport:
    l_hat: float
    passed: bool
    degenerate: bool = False
    spread: float = 0.0
    note: str = HEURISTIC_NOTE


@dataclass(frozen=True)
class LipschitzReport:
    m_hat: float
    bounded: bool
    probe: tuple = ()
    note: str = HEURISTIC_NOTE


def default_x_grid(decades: int = 8, per_decade: int = 32) -> np.ndarray:
    return np.logspace(0.0, -float(decades), decades * per_decade + 1)


def _tail_ratios(F: DistributionFamily, alpha: float, x_grid):
    x = np.sort(np.asarray(x_grid, dtype=float))[::-1]
    if x.size < 2 or x[0] > 1.0 or x[-1] <= 0.0:
        raise ConfigurationError("x grid must lie in (0, 1]")
    if x[-1] > 1e-6:
        raise ConfigurationError("x grid must reach 1e-6 or below")
    decades = math.log10(x[0] / x[-1])
    if x.size < 16 * decades:
        raise ConfigurationError("x grid too coarse: need 16 points per decade")
    tail = x[x <= 10.0 * x[-1]]
    return tail, F.cdf(tail) / tail**alpha


def check_cond2F(F: DistributionFamily, alpha: float, x_grid=None,
                 rel_tol: float = 1e-3, zero_tol: float = 1e-4) -> ConditionReport:
    """limsup_{x -> 0} F(x)/x^alpha, read off the last decade of the grid.

    A ratio that is still shrinking but already below ``zero_tol`` is taken as
    the degenerate limit 0, which satisfies the condition.
    """
    x_grid = default_x_grid() if x_grid is None else x_grid
    _, ratios = _tail_ratios(F, alpha, x_grid)
    l_hat = float(np.max(ratios))
    spread = float(np.max(ratios) - np.min(ratios))
    degenerate = l_hat < zero_tol
    passed = degenerate or spread < rel_tol * l_hat
    return ConditionReport(l_hat=l_hat, passed=passed, degenerate=degenerate, spread=spread)


def check_uniform_power_limit(F: DistributionFamily, alpha: float, x_grid=None,
                              tol: float = 1e-3) -> ConditionReport:
    """lim_{x -> 0+} |F(x)/x^alpha - L| = 0 with L > 0 estimated at the smallest x."""
    x_grid = default_x_grid() if x_grid is None else x_grid
    tail, ratios = _tail_ratios(F, alpha, x_grid)
    l_hat = float(ratios[np.argmin(tail)])
    spread = float(np.max(np.abs(ratios - l_hat)))
    converged = l_hat > 0 and np.isfinite(l_hat) and spread < tol * max(1.0, l_hat)
    return ConditionReport(l_hat=l_hat, passed=bool(converged), degenerate=l_hat == 0.0, spread=spread)


def check_lipschitz(F: DistributionFamily, grid=None, refinements: int = 6) -> LipschitzReport:
    """Largest difference quotient of F over adjacent grid pairs.

    ``bounded`` additionally probes the first cell: its quotient is recomputed
    with the right end pulled toward the left end by factors 10, 100, ...
    and must never exceed ``m_hat``.
    """
    grid = np.linspace(0.0, 1.0, 10_001) if grid is None else np.asarray(grid, dtype=float)
    grid = np.sort(grid)
    if grid.size < 10_001 or grid[0] < 0.0 or grid[-1] > 1.0:
        raise ConfigurationError("Lipschitz grid needs >= 10^4 adjacent pairs in [0, 1]")
    vals = F.cdf(grid)
    quot = np.diff(vals) / np.diff(grid)
    m_hat = float(np.max(quot))
    x0, h = grid[0], grid[1] - grid[0]
    probe = []
    for k in range(1, refinements + 1):
        hk = h * 10.0**-k
        probe.append(float((F.cdf(x0 + hk) - F.cdf(x0)) / hk))
    bounded = all(p <= m_hat * (1.0 + 1e-9) + 1e-12 for p in probe)
    return LipschitzReport(m_hat=m_hat, bounded=bounded, probe=tuple(probe))
