"""Weighted-sum statistics of the weak and strong laws and their diagnostics.

Statistics (all sums start at ``j0``, default 2, because log 1 = 0 makes the
log-weighted schemes degenerate at j = 1):

    thm1   b_n^{-p} sum_j a_j (R_j - E R_{nj}),   R_{nj} = min(R_j, b_n / a_j)
    thm2   b_n^{-p} sum_j a_j R_j
    thm3   b_n^{-1} sum_j a_j (R_j - E R_{nj})
    thm4   sum_{j<=m_n} c_{nj} (R_j - E[R_j I(|c_{nj} R_j| <= 1)])
    thm5   (rho(n) log^beta n)^{-1} sum_j (log^{beta-p} j / j) R_j
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats as sps

from . import rng
from .errors import ConfigurationError, HypothesisViolation, WorkerError
from .model import ModelSpec
from .oracle import IidDigitLaw, YModel, h_function
from .sampler import Trajectory, sample_batch

log = logging.getLogger(__name__)

THEOREMS = ("thm1", "thm2", "thm3", "thm4", "thm5")


# weights ------------------------------------------------------------------
@dataclass(frozen=True)
class WeightScheme:
    """a_j = j^{-u} (log j)^v and b_n = n^s (log n)^r, sums from j0."""

    u: float = 1.0
    v: float = 0.0
    s: float = 1.0
    r: float = 1.0
    p: float = 1.0
    j0: int = 2

    def __post_init__(self):
        if self.j0 < 1 or (self.j0 < 2 and self.v != 0):
            raise ConfigurationError("j0 must be >= 2 when a_j carries a log factor")
        if self.p < 1:
            raise ConfigurationError("p must be >= 1")

    @classmethod
    def theorem5(cls, beta: float, p: float) -> "WeightScheme":
        """a_j = log^{beta-p} j / j, b_n = log^beta n."""
        return cls(u=1.0, v=beta - p, s=0.0, r=beta, p=p, j0=2)

    def a(self, j):
        j = np.asarray(j, dtype=float)
        with np.errstate(divide="ignore"):
            return j ** (-self.u) * (np.log(j) ** self.v if self.v else 1.0)

    def b(self, n):
        n = np.asarray(n, dtype=float)
        return n**self.s * (np.log(n) ** self.r if self.r else 1.0)

    def indices(self, n: int) -> np.ndarray:
        return np.arange(self.j0, n + 1)

    def caps(self, n: int) -> np.ndarray:
        """b_n / a_j for j = j0..n."""
        return self.b(n) / self.a(self.indices(n))

    def n_star(self, horizon: int = 10**6) -> int:
        """First n past which b_n is nondecreasing (checked up to ``horizon``)."""
        n = np.arange(max(self.j0, 2), horizon + 1)
        bad = np.nonzero(np.diff(self.b(n)) < 0)[0]
        return int(n[bad[-1] + 1]) if bad.size else int(n[0])

    def to_dict(self):
        return {"u": self.u, "v": self.v, "s": self.s, "r": self.r, "p": self.p, "j0": self.j0}


@dataclass(frozen=True)
class RhoFamily:
    """rho(n) = scale * n^exponent * (log n)^log_exponent."""

    exponent: float = 1.0
    log_exponent: float = 0.0
    scale: float = 1.0

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        return self.scale * n**self.exponent * (np.log(n) ** self.log_exponent if self.log_exponent else 1.0)

    def scaled(self, factor: float) -> "RhoFamily":
        return RhoFamily(self.exponent, self.log_exponent, self.scale * factor)

    def summable(self) -> bool:
        """Closed-form test of sum 1/rho(n)^2 < inf."""
        e, f = 2 * self.exponent, 2 * self.log_exponent
        return e > 1 or (e == 1 and f > 1)

    def admissibility(self, horizon: int = 10**6) -> dict:
        n = np.arange(2, horizon + 1, dtype=float)
        terms = 1.0 / self(n) ** 2
        partial = np.cumsum(terms)
        half = partial[horizon // 2 - 2]
        return {
            "declared_summable": self.summable(),
            "partial_sum": float(partial[-1]),
            "last_half_increment": float(partial[-1] - half),
            "passed": self.summable() and float(partial[-1] - half) < 0.01 * float(partial[-1]),
            "note": "heuristic at horizon",
        }

    def to_dict(self):
        return {"exponent": self.exponent, "log_exponent": self.log_exponent, "scale": self.scale}


@dataclass(frozen=True)
class TriangularArray:
    """Weights c_{nj}, 1 <= j <= m_n; ``c(n)`` returns the row as an array."""

    c: Callable[[int], np.ndarray]
    m: Callable[[int], int] = lambda n: n
    description: str = ""
    horizon: int = 10**4

    def __post_init__(self):
        for n in np.unique(np.logspace(0.5, math.log10(self.horizon), 12).astype(int)):
            row = self.row(int(n))
            if np.any(np.abs(row) > 1):
                raise HypothesisViolation(f"|c_nj| > 1 at n = {n} ({self.description})")

    def row(self, n: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.c(n), dtype=float), (self.m(n),))

    @classmethod
    def inverse_square_log(cls, horizon=10**4):
        return cls(lambda n: 1.0 / (n * n * math.log(n) ** 2), description="c_nj = 1/(n^2 log^2 n)",
                   horizon=horizon)

    @classmethod
    def power(cls, exponent: float, horizon=10**4):
        return cls(lambda n: float(n) ** -exponent, description=f"c_nj = n^-{exponent:g}", horizon=horizon)

    @classmethod
    def from_dict(cls, data: dict, horizon=10**4):
        kind = data.get("kind")
        if kind == "inverse_square_log":
            return cls.inverse_square_log(horizon)
        if kind == "power":
            return cls.power(float(data["exponent"]), horizon)
        raise ConfigurationError(f"unknown triangular array kind {kind!r}")


# statistics ---------------------------------------------------------------
def truncate_r(r_val, cap):
    """R I(R <= cap) + cap I(R > cap)."""
    return np.minimum(r_val, cap)


def _r_matrix(traj):
    r = traj.r if isinstance(traj, Trajectory) else traj
    if isinstance(r, tuple):
        r = np.array([float(x) for x in r])
    return np.atleast_1d(np.asarray(r, dtype=float))


def _check_n(r, n, j0=1):
    if n < j0:
        raise ConfigurationError(f"n = {n} is below the first summation index {j0}")
    if r.shape[-1] < n:
        raise ConfigurationError(f"need R_1..R_{n}, trajectory has {r.shape[-1]}")


def stat_thm1(traj, w: WeightScheme, n: int, centering) -> float:
    if centering is None:
        raise ConfigurationError("thm1 needs the centering values E R_nj")
    r = _r_matrix(traj)
    _check_n(r, n, w.j0)
    centering = np.asarray(centering, dtype=float)
    if centering.shape[-1] < n:
        raise ConfigurationError("centering shorter than n")
    j = w.indices(n)
    terms = w.a(j) * (r[..., j - 1] - centering[..., j - 1])
    return terms.sum(axis=-1) / w.b(n) ** w.p


def stat_thm2(traj, w: WeightScheme, n: int) -> float:
    r = _r_matrix(traj)
    _check_n(r, n, w.j0)
    j = w.indices(n)
    return (w.a(j) * r[..., j - 1]).sum(axis=-1) / w.b(n) ** w.p


def stat_thm3(traj, w: WeightScheme, n: int, centering) -> float:
    return stat_thm1(traj, WeightScheme(w.u, w.v, w.s, w.r, 1.0, w.j0), n, centering)


def stat_thm4(traj, arr: TriangularArray, n: int, centering) -> float:
    r = _r_matrix(traj)
    m = arr.m(n)
    _check_n(r, m)
    c = arr.row(n)
    if np.any(np.abs(c) > 1):
        raise HypothesisViolation("|c_nj| > 1")
    centering = np.broadcast_to(np.asarray(centering, dtype=float), (m,))
    return (c * (r[..., :m] - centering)).sum(axis=-1)


def _check_thm5(beta, p):
    if p < 2:
        raise HypothesisViolation("p must be >= 2")
    if beta <= 0:
        raise HypothesisViolation("beta must be > 0")


def stat_thm5(traj, beta: float, p: float, rho: RhoFamily, n: int) -> float:
    _check_thm5(beta, p)
    r = _r_matrix(traj)
    _check_n(r, n, 2)
    w = WeightScheme.theorem5(beta, p)
    j = w.indices(n)
    return (w.a(j) * r[..., j - 1]).sum(axis=-1) / (rho(n) * w.b(n))


# centering ----------------------------------------------------------------
@dataclass
class Centering:
    """E R_{nj} (or the thm4 analogue) for each grid n, as arrays over j = 1..n."""

    values: dict
    se: dict
    provenance: str

    def weighted_se(self, n, weights) -> float:
        """Conservative standard error of sum_j w_j * centering_j."""
        se = self.se.get(n)
        if se is None:
            return 0.0
        return float(np.sum(np.abs(weights) * se[: len(weights)]))


def _iid_law(model: ModelSpec):
    return IidDigitLaw(model.family_at(1)) if model.is_iid_digit_model else None


def _mc_capped_means(model, caps_by_n: dict, reps: int, seed: int, chunk: int = 256,
                     indicator: bool = False):
    """Monte-Carlo E min(R_j, cap_nj) (or E R_j I(R_j <= cap)) with its own streams."""
    n_max = max(len(c) for c in caps_by_n.values())
    sums = {n: np.zeros(len(c)) for n, c in caps_by_n.items()}
    sq = {n: np.zeros(len(c)) for n, c in caps_by_n.items()}
    for start in range(0, reps, chunk):
        sids = rng.NS_CENTERING + np.arange(start, min(start + chunk, reps))
        r = sample_batch(model, n_max + 1, seed, sids).r
        for n, caps in caps_by_n.items():
            block = r[:, : len(caps)]
            vals = np.where(block <= caps, block, 0.0) if indicator else np.minimum(block, caps)
            sums[n] += vals.sum(axis=0)
            sq[n] += (vals**2).sum(axis=0)
    values, se = {}, {}
    for n in caps_by_n:
        mean = sums[n] / reps
        var = np.maximum(sq[n] / reps - mean**2, 0.0)
        values[n] = mean
        se[n] = np.sqrt(var / max(reps - 1, 1))
    return values, se


def centering_truncated(model: ModelSpec, w: WeightScheme, n_grid, seed: int = 0,
                        mc_reps: int = 2000) -> Centering:
    """E R_{nj} = E min(R_j, b_n / a_j); exact for phi = 1, q = 0 models."""
    caps_by_n = {}
    for n in n_grid:
        caps = np.full(n, np.inf)
        caps[w.j0 - 1:] = w.caps(n)
        caps_by_n[n] = caps
    law = _iid_law(model)
    if law is not None:
        values = {}
        for n, caps in caps_by_n.items():
            vals = np.zeros(n)
            vals[w.j0 - 1:] = law.capped_mean(caps[w.j0 - 1:])
            values[n] = vals
        return Centering(values, {}, "exact")
    values, se = _mc_capped_means(model, caps_by_n, mc_reps, seed)
    return Centering(values, se, f"monte-carlo ({mc_reps} reps)")


def centering_thm4(model: ModelSpec, arr: TriangularArray, n_grid, seed: int = 0,
                   mc_reps: int = 2000) -> Centering:
    """E[R_j I(|c_nj R_j| <= 1)] for each grid n."""
    law = _iid_law(model)
    if law is not None:
        values = {}
        for n in n_grid:
            c = np.abs(arr.row(n))
            uniq, inv = np.unique(c, return_inverse=True)
            per = np.array([law.trunc_mean(1.0 / v) if v > 0 else 0.0 for v in uniq])
            values[n] = per[inv]
        return Centering(values, {}, "exact")
    caps = {n: 1.0 / np.abs(arr.row(n)) for n in n_grid}
    values, se = _mc_capped_means(model, caps, mc_reps, seed, indicator=True)
    return Centering(values, se, f"monte-carlo ({mc_reps} reps)")


# series over replications ---------------------------------------------------
@dataclass
class StatisticSeries:
    theorem_id: str
    n_grid: tuple
    values: np.ndarray            # shape (replications, len(n_grid))
    eps: tuple = (0.1, 0.01)
    centering_provenance: str = "none"
    centering_se: tuple = ()      # statistic-scale se per grid point

    def __post_init__(self):
        if list(self.n_grid) != sorted(self.n_grid):
            raise ConfigurationError("n grid must be increasing")
        if self.values.shape[1] != len(self.n_grid):
            raise ConfigurationError("one value per (replication, n) required")


@dataclass
class LawSpec:
    """What to compute: theorem id plus the parameters that theorem needs."""

    theorem: str
    weights: WeightScheme | None = None
    array: TriangularArray | None = None
    beta: float = 1.0
    rho: RhoFamily = field(default_factory=RhoFamily)

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ConfigurationError(f"unknown theorem id {self.theorem!r}")
        if self.theorem == "thm5":
            _check_thm5(self.beta, self.weights.p if self.weights else 2.0)
            self.weights = WeightScheme.theorem5(self.beta, self.weights.p if self.weights else 2.0)
        elif self.theorem == "thm4":
            if self.array is None:
                raise ConfigurationError("thm4 needs a triangular array")
        elif self.weights is None:
            raise ConfigurationError(f"{self.theorem} needs a weight scheme")


def law_series(model: ModelSpec, spec: LawSpec, n_grid, replications: int, seed: int,
               eps=(0.1, 0.01), chunk: int = 25, mc_reps: int = 2000, workers: int = 1) -> StatisticSeries:
    """Evaluate the theorem statistic at every grid n for each replication.

    Replication i uses stream id i; chunks may run on several threads but
    are reassembled in stream order, so ``workers`` never changes the output.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if not n_grid:
        raise ConfigurationError("empty n grid")
    th = spec.theorem
    w = spec.weights
    centering = None
    if th in ("thm1", "thm3"):
        centering = centering_truncated(model, w, n_grid, seed, mc_reps)
    elif th == "thm4":
        centering = centering_thm4(model, spec.array, n_grid, seed, mc_reps)
    n_max = max(spec.array.m(n) for n in n_grid) if th == "thm4" else n_grid[-1]
    p = 1.0 if th == "thm3" else (w.p if w else 1.0)

    # deterministic per-n pieces
    plan = []
    for n in n_grid:
        if th == "thm4":
            c = spec.array.row(n)
            shift = float(np.dot(c, centering.values[n]))
            plan.append((c, shift, 1.0, centering.weighted_se(n, c)))
            continue
        j = w.indices(n)
        a = w.a(j)
        norm = w.b(n) ** p if th != "thm5" else spec.rho(n) * w.b(n)
        shift = 0.0
        se = 0.0
        if centering is not None:
            shift = float(np.dot(a, centering.values[n][j - 1]))
            se = centering.weighted_se(n, np.concatenate([np.zeros(w.j0 - 1), a])) / norm
        plan.append((a, shift, norm, se))

    def run_chunk(start):
        sids = rng.NS_MAIN + np.arange(start, min(start + chunk, replications))
        r = sample_batch(model, n_max + 1, seed, sids).r
        out = np.empty((sids.size, len(n_grid)))
        for col, (n, (wts, shift, norm, _)) in enumerate(zip(n_grid, plan)):
            if th == "thm4":
                out[:, col] = r[:, : wts.size] @ wts - shift
            else:
                out[:, col] = (r[:, w.j0 - 1:n] @ wts - shift) / norm
        return out

    starts = list(range(0, replications, chunk))
    parts, failure = [], None
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(run_chunk, s) for s in starts]
        for fut in futures:  # stream order, whatever order they finish in
            try:
                parts.append(fut.result())
            except Exception as exc:  # noqa: BLE001 - reported with the partial rows
                failure = exc
                break

    def build(blocks):
        values = np.vstack(blocks) if blocks else np.zeros((0, len(n_grid)))
        return StatisticSeries(th, tuple(n_grid), values, tuple(eps),
                               centering.provenance if centering else "none",
                               tuple(x[3] for x in plan))

    if failure is not None:
        raise WorkerError(f"replication worker failed: {failure!r}", build(parts)) from failure
    return build(parts)


# diagnostics --------------------------------------------------------------
def _clopper_pearson(k, n, level=0.95):
    lo = 0.0 if k == 0 else float(sps.beta.ppf((1 - level) / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(sps.beta.ppf(1 - (1 - level) / 2, k + 1, n - k))
    return lo, hi


def prob_convergence_diag(series: StatisticSeries, eps=None, min_reps: int = 100) -> list:
    """p_hat_n(eps) = fraction of replications with |T_n| > eps (+3 se of MC centering)."""
    eps = series.eps if eps is None else tuple(eps)
    reps = series.values.shape[0]
    if reps < min_reps:
        log.warning("only %d replications; exceedance fractions have low power", reps)
    rows = []
    se = series.centering_se or (0.0,) * len(series.n_grid)
    for e in eps:
        for col, n in enumerate(series.n_grid):
            thresh = e + 3.0 * se[col]
            k = int(np.sum(np.abs(series.values[:, col]) > thresh))
            lo, hi = _clopper_pearson(k, reps)
            rows.append({"n": n, "eps": e, "p_hat": k / reps, "ci_lo": lo, "ci_hi": hi,
                         "count": k, "replications": reps})
    return rows


def as_convergence_diag(series: StatisticSeries, eps=None) -> list:
    """Fraction of trajectories with sup_{k >= n, k in grid} |S_k| > eps."""
    eps = series.eps if eps is None else tuple(eps)
    tail_sup = np.flip(np.maximum.accumulate(np.flip(np.abs(series.values), axis=1), axis=1), axis=1)
    reps = series.values.shape[0]
    rows = []
    for e in eps:
        for col, n in enumerate(series.n_grid):
            k = int(np.sum(tail_sup[:, col] > e))
            lo, hi = _clopper_pearson(k, reps)
            rows.append({"n": n, "eps": e, "p_hat": k / reps, "ci_lo": lo, "ci_hi": hi,
                         "count": k, "replications": reps})
    return rows


def strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def nonincreasing(values) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


# hypothesis validators ------------------------------------------------------
@dataclass
class ConditionTrend:
    name: str
    n_grid: tuple
    values: tuple
    monotone_tail: bool
    final: float
    threshold: float
    passed: bool
    rate: str = ""


@dataclass
class WeightValidation:
    theorem_id: str
    conditions: list
    passed: bool
    note: str = "heuristic at horizon"


def _rate_of_sum(e_pow: float, e_log: float) -> tuple:
    """Growth of sum_{j<=n} j^{-e_pow} log^{e_log} j as (n exponent, log exponent)."""
    if e_pow < 1:
        return (1.0 - e_pow, e_log)
    if e_pow == 1 and e_log > -1:
        return (0.0, e_log + 1.0)
    return (0.0, 0.0)  # bounded (up to log log for e_log = -1)


def _fmt_rate(n_exp, log_exp) -> str:
    parts = []
    if abs(n_exp) > 1e-12:
        parts.append(f"n^{n_exp:g}")
    if abs(log_exp) > 1e-12:
        parts.append(f"log^{log_exp:g} n")
    return "~ " + (" ".join(parts) if parts else "const")


def _trend(name, grid, values, rate="", decreasing=True, fraction=0.5):
    values = tuple(float(v) for v in values)
    grid = tuple(int(n) for n in grid)
    horizon = grid[-1]
    tail_idx = [i for i, n in enumerate(grid) if n >= horizon / math.sqrt(10.0)]
    tail = [values[i] for i in tail_idx]
    mono = strictly_decreasing(tail) if decreasing else nonincreasing(tail)
    threshold = fraction * values[0]
    ok = mono and values[-1] < threshold and all(math.isfinite(v) for v in values)
    return ConditionTrend(name, grid, values, mono, values[-1], threshold, ok, rate)


def _bounded(name, grid, values, slack=1.05):
    values = tuple(float(v) for v in values)
    half = len(values) // 2
    ok = all(math.isfinite(v) for v in values) and max(values[half:]) <= slack * max(values[: half + 1])
    return ConditionTrend(name, tuple(int(n) for n in grid), values, nonincreasing(values[half:]),
                          values[-1], slack * max(values[: half + 1]), ok, "bounded")


def default_weight_grid(horizon: int, start: int = 10, per_decade: int = 8) -> np.ndarray:
    decades = math.log10(horizon / start)
    pts = np.unique(np.round(np.logspace(math.log10(start), math.log10(horizon),
                                         int(round(decades * per_decade)) + 1)).astype(int))
    return pts


def validate_weights(scheme, alpha: float, theorem_id: str, horizon: int = 10**4, grid=None,
                     y: YModel | None = None, rho: RhoFamily | None = None, beta: float = 1.0) -> WeightValidation:
    """Finite-horizon trend checks of the weight hypotheses.

    lemma3: sum_j a_j^alpha / b_n^alpha -> 0
    thm1:   lemma3 and n / b_n^{p-1} -> 0   (thm2: the same at alpha = 1)
    thm3:   lemma3 and n sum_j (a_j / b_n)^{min(alpha,1)} -> 0
    thm4:   (a) |c_nj| <= 1, (b) m_n sum c_nj^2 -> 0, (c) m_n sum |c_nj| H(1/|c_nj|) bounded
    thm5:   beta > 0, p >= 2, sum 1/rho(n)^2 < inf

    A decaying condition passes when it strictly decreases over the last
    half-decade of the grid and ends below half of its first grid value.
    """
    if horizon < 10**3:
        raise ConfigurationError("horizon must be at least 10^3")
    grid = default_weight_grid(horizon) if grid is None else np.asarray(grid, dtype=int)
    conds = []
    if theorem_id in ("lemma3", "thm1", "thm2", "thm3"):
        w = scheme
        al = 1.0 if theorem_id == "thm2" else alpha
        vals = [np.sum(w.a(w.indices(n)) ** al) / w.b(n) ** al for n in grid]
        ne, le = _rate_of_sum(w.u * al, w.v * al)
        conds.append(_trend("sum a_j^alpha / b_n^alpha", grid, vals,
                            _fmt_rate(ne - w.s * al, le - w.r * al)))
        if theorem_id in ("thm1", "thm2"):
            if w.p <= 1:
                conds.append(ConditionTrend("n / b_n^(p-1)", tuple(grid), (math.inf,), False,
                                            math.inf, 0.0, False, "needs p > 1"))
            else:
                vals = [n / w.b(n) ** (w.p - 1) for n in grid]
                conds.append(_trend("n / b_n^(p-1)", grid, vals,
                                    _fmt_rate(1 - w.s * (w.p - 1), -w.r * (w.p - 1))))
        if theorem_id == "thm3":
            e = min(alpha, 1.0)
            vals = [n * np.sum((w.a(w.indices(n)) / w.b(n)) ** e) for n in grid]
            ne, le = _rate_of_sum(w.u * e, w.v * e)
            conds.append(_trend("n sum (a_j/b_n)^(alpha^1)", grid, vals,
                                _fmt_rate(1 + ne - w.s * e, le - w.r * e)))
    elif theorem_id == "thm4":
        arr = scheme
        if y is None:
            raise ConfigurationError("thm4 validation needs the Y model for H")
        rows = [arr.row(int(n)) for n in grid]
        max_c = max(float(np.max(np.abs(r))) for r in rows)
        conds.append(ConditionTrend("(a) |c_nj| <= 1", tuple(int(n) for n in grid), (max_c,),
                                    True, max_c, 1.0, max_c <= 1.0, "sup over grid"))
        vals_b = [arr.m(int(n)) * float(np.sum(r**2)) for n, r in zip(grid, rows)]
        conds.append(_trend("(b) m_n sum c_nj^2", grid, vals_b))
        vals_c = []
        for n, r in zip(grid, rows):
            c = np.abs(r)
            uniq, counts = np.unique(c, return_counts=True)
            h = np.array([h_function(y, 1.0 / v) if v > 0 else 0.0 for v in uniq])
            vals_c.append(arr.m(int(n)) * float(np.sum(counts * uniq * h)))
        conds.append(_bounded("(c) m_n sum |c_nj| H(1/|c_nj|)", grid, vals_c))
    elif theorem_id == "thm5":
        p = scheme.p if scheme is not None else 2.0
        ok = beta > 0 and p >= 2
        conds.append(ConditionTrend("beta > 0 and p >= 2", (), (beta, p), True, p, 2.0, ok, "exact"))
        rho = rho or RhoFamily()
        adm = rho.admissibility(horizon)
        conds.append(ConditionTrend("sum 1/rho^2 < inf", (horizon,), (adm["partial_sum"],), True,
                                    adm["last_half_increment"], 0.01 * adm["partial_sum"], adm["passed"],
                                    "summable" if adm["declared_summable"] else "divergent"))
    else:
        raise ConfigurationError(f"unknown theorem id {theorem_id!r}")
    return WeightValidation(theorem_id, conds, all(c.passed for c in conds))
