"""Digit-chain samplers.

Given B_n = h and V = F^{-1}(u), the next digit is

    k = max(ceil(phi), floor(phi (1 + q) / V - phi q)),

the unique k with delta(phi, k + 1, q) < V <= delta(phi, k, q) (the clamp only
matters for non-integer phi, where the boundary cell absorbs the missing
mass).  Draw ``i`` of a trajectory (i = 0 gives B_1, i = j gives B_{j+1})
consumes ``v_bits // 64`` consecutive words of the trajectory's stream.

Two modes share those words:

exact
    digits are Python integers, ratios are Fractions, V is the dyadic
    rational (w + 1) / 2^64 pushed through F^{-1} exactly (comparisons of
    F(delta) against u are done in rational arithmetic).
fast
    numpy float64, vectorised over many streams.  Digits are kept exactly
    while below 2^53; past that only log B_n is tracked and R_n = 1/V, whose
    relative error is below phi^{-1} < 2^-52.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import rng
from .errors import CappedTrajectoryError, ConfigurationError, DomainError
from .expansion import SCHEMES, expand_ints, DigitSequence, to_framework_digits
from .families import DistributionFamily
from .model import ModelSpec, _ceil, delta, preset, r_from_digits
from .rng import RngStreamKey

EXACT_BIT_CAP = 1_000_000
_FLOAT_EXACT = 2.0**52


@dataclass(frozen=True)
class Trajectory:
    model: ModelSpec
    b: tuple
    r: object  # tuple of Fractions (exact) or float ndarray (fast)
    key: RngStreamKey
    mode: str
    log_b: np.ndarray | None = None
    u: tuple = field(default=(), repr=False)
    v_bits: int = 64
    short: bool = False

    def __len__(self):
        return len(self.b)


def _words_per_draw(v_bits: int) -> int:
    if v_bits not in (64, 128):
        raise ConfigurationError("V precision must be 64 or 128 bits")
    return v_bits // 64


# single digit -------------------------------------------------------------
def sample_digit(phi_val, q_val, v) -> int:
    """Next digit for an already transformed variate V in (0, 1]."""
    v = Fraction(v)
    if not 0 < v <= 1:
        raise DomainError(f"V must lie in (0, 1], got {v}")
    phi_val = Fraction(phi_val)
    q_val = Fraction(q_val)
    if phi_val <= 0:
        raise DomainError("phi must be positive")
    if q_val < 0:
        raise DomainError("q must be nonnegative")
    k = math.floor(phi_val * (1 + q_val) / v - phi_val * q_val)
    return max(_ceil(phi_val), k)


def _mp_ppf(F: DistributionFamily, u: Fraction, prec: int):
    with mpmath.workprec(prec):
        um = mpmath.mpf(u.numerator) / u.denominator
        if F.kind == "uniform":
            return um
        a = mpmath.mpf(F.alpha_fraction.numerator) / F.alpha_fraction.denominator
        if F.kind == "power":
            return um ** (1 / a)
        c0, c1 = (mpmath.mpf(c.numerator) / c.denominator for c in F._coeffs_q)
        x = mpmath.mpf(float(F.ppf(float(u))))
        for _ in range(8 + prec // 32):
            fx = x**a * (c0 + c1 * x) / (c0 + c1) - um
            dfx = (a * c0 * x ** (a - 1) + (a + 1) * c1 * x**a) / (c0 + c1)
            x = x - fx / dfx
        return x


def next_digit_exact(phi_val: Fraction, q_val: Fraction, u: Fraction, F: DistributionFamily) -> int:
    """Largest k >= ceil(phi) with F(delta(phi, k, q)) >= u (or ceil(phi))."""
    if F.kind == "uniform":
        return sample_digit(phi_val, q_val, u)
    kmin = _ceil(phi_val)
    scale = phi_val * (1 + q_val)
    prec = 96 + 2 * max(scale.numerator.bit_length(), scale.denominator.bit_length())
    v = _mp_ppf(F, u, prec)
    with mpmath.workprec(prec):
        est = mpmath.floor(mpmath.mpf(scale.numerator) / scale.denominator / v
                           - mpmath.mpf((phi_val * q_val).numerator) / (phi_val * q_val).denominator)
        k = max(kmin, int(est))
    while k > kmin and not F.cdf_at_least(delta(phi_val, k, q_val), u):
        k -= 1
    while F.cdf_at_least(delta(phi_val, k + 1, q_val), u):
        k += 1
    return k


# single trajectory --------------------------------------------------------
def _draw_uniforms_exact(key: RngStreamKey, n: int, v_bits: int):
    per = _words_per_draw(v_bits)
    words = [int(w) for w in key.words(n * per)]
    if per == 1:
        return [rng.uniform_exact(w) for w in words]
    return [rng.uniform_exact128(words[2 * i], words[2 * i + 1]) for i in range(n)]


def sample_trajectory(model: ModelSpec, n: int, key: RngStreamKey, mode: str = "exact",
                      v_bits: int = 64, bit_cap: int = EXACT_BIT_CAP) -> Trajectory:
    """B_1..B_n and R_1..R_{n-1} for one stream key."""
    if n < 2:
        raise DomainError("trajectory length must be at least 2")
    if mode == "fast":
        batch = sample_batch(model, n, key.master_seed, [key.stream_id], v_bits=v_bits,
                             counter=key.counter)
        b = tuple(int(x) if np.isfinite(x) else None for x in batch.b[0])
        return Trajectory(model, b, batch.r[0], key, "fast", log_b=batch.log_b[0],
                          u=tuple(batch.u[0]), v_bits=v_bits)
    if mode != "exact":
        raise ConfigurationError(f"unknown mode {mode!r}")
    us = _draw_uniforms_exact(key, n, v_bits)
    b = [next_digit_exact(model.b1_phi, model.b1_q, us[0], model.family_at(1))]
    r = []
    for j in range(1, n):
        phi_val = Fraction(model.phi(b[-1]))
        q_val = model.q.value(b)
        k = next_digit_exact(phi_val, q_val, us[j], model.family_at(j))
        if k.bit_length() > bit_cap:
            raise CappedTrajectoryError(f"digit B_{j + 1} exceeds {bit_cap} bits", b)
        r.append(r_from_digits(k, phi_val, q_val))
        b.append(k)
    return Trajectory(model, tuple(b), tuple(r), key, "exact", u=tuple(us), v_bits=v_bits)


# vectorised fast mode -----------------------------------------------------
@dataclass
class Batch:
    """Fast-mode trajectories for several streams; rows follow ``stream_ids``."""

    model: ModelSpec
    master_seed: int
    stream_ids: np.ndarray
    b: np.ndarray       # exact digit values, NaN once past 2^53
    log_b: np.ndarray
    r: np.ndarray       # shape (reps, n - 1); column j - 1 holds R_j
    u: np.ndarray


def _uniform_matrix(master_seed, stream_ids, n, v_bits, counter):
    per = _words_per_draw(v_bits)
    words = rng.stream_words(master_seed, stream_ids, counter, n * per)
    if per == 1:
        return rng.uniform_float(words)
    return rng.uniform_float128(words[:, 0::2], words[:, 1::2])


def _step(phi_f, log_phi, exact, q, v):
    """One transition for a vector of chains; returns (b, log_b, r)."""
    scale = (1.0 + q) / v
    with np.errstate(over="ignore", invalid="ignore"):
        target = phi_f * scale - phi_f * q
    small = exact & (target < _FLOAT_EXACT)
    kmin = np.ceil(np.where(small, phi_f, 1.0))
    k = np.maximum(kmin, np.floor(np.where(small, target, 1.0)))
    r = np.where(small, (k + phi_f * q) / (phi_f * (1.0 + q)), np.maximum(1.0 / v, 1.0))
    log_b = np.where(small, np.log(k), log_phi + np.log(np.maximum(scale - q, 1.0)))
    b = np.where(small & (k < 2.0**53), k, np.nan)
    return b, log_b, r


def sample_batch(model: ModelSpec, n: int, master_seed: int, stream_ids, v_bits: int = 64,
                 counter: int = 0) -> Batch:
    if n < 1:
        raise DomainError("trajectory length must be positive")
    sids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    u = _uniform_matrix(master_seed, sids, n, v_bits, counter)
    reps = sids.size
    v = np.empty_like(u)
    if model.stationary:
        v[:] = model.family_at(1).ppf(u)
    else:
        for j in range(n):
            v[:, j] = model.family_at(max(j, 1)).ppf(u[:, j])
    b = np.empty((reps, n))
    log_b = np.empty((reps, n))
    r = np.empty((reps, n - 1))
    ones = np.ones(reps, dtype=bool)
    b1_phi = np.full(reps, float(model.b1_phi))
    b[:, 0], log_b[:, 0], _ = _step(b1_phi, np.log(b1_phi), ones, float(model.b1_q), v[:, 0])
    if n == 1:
        return Batch(model, master_seed, sids, b, log_b, r, u)
    if model.iid_steps:
        c = float(model.phi(1))
        q = float(model.q.value([1]))
        phi_f = np.full((reps, n - 1), c)
        b[:, 1:], log_b[:, 1:], r[:] = _step(phi_f, np.log(phi_f), np.ones_like(phi_f, dtype=bool),
                                             q, v[:, 1:])
        return Batch(model, master_seed, sids, b, log_b, r, u)
    for j in range(1, n):
        prev_b, prev_log = b[:, j - 1], log_b[:, j - 1]
        exact = np.isfinite(prev_b)
        phi_f = np.where(exact, model.phi.float_eval(np.where(exact, prev_b, 1.0)), np.nan)
        exact &= np.isfinite(phi_f) & (phi_f < _FLOAT_EXACT)
        if np.all(exact):
            log_phi = np.log(phi_f)
        else:
            log_phi = np.where(exact, np.log(np.where(exact, phi_f, 1.0)), model.phi.log_eval(prev_log))
        q = model.q.float_eval(prev_b, prev_log)
        b[:, j], log_b[:, j], r[:, j - 1] = _step(phi_f, log_phi, exact, q, v[:, j])
    return Batch(model, master_seed, sids, b, log_b, r, u)


def sample_r_column(model: ModelSpec, j: int, master_seed: int, stream_ids, v_bits: int = 64) -> np.ndarray:
    """R_j for each stream; reads only draw j when the steps are i.i.d."""
    if j < 1:
        raise DomainError("R is indexed from 1")
    if not model.iid_steps:
        return sample_batch(model, j + 1, master_seed, stream_ids, v_bits).r[:, j - 1]
    per = _words_per_draw(v_bits)
    u = _uniform_matrix(master_seed, stream_ids, 1, v_bits, counter=j * per)[:, 0]
    v = model.family_at(j).ppf(u)
    c = float(model.phi(1))
    q = float(model.q.value([1]))
    phi_f = np.full(v.shape, c)
    return _step(phi_f, np.log(phi_f), np.ones(v.shape, dtype=bool), q, v)[2]


# expansion-of-uniform oracle ---------------------------------------------
def _dyadic_numerators(master_seed, stream_ids, x_bits, counter=0):
    if x_bits % 64 or x_bits < 64:
        raise ConfigurationError("x precision must be a positive multiple of 64 bits")
    per = x_bits // 64
    words = rng.stream_words(master_seed, stream_ids, counter, per).tolist()
    out = []
    for row in words:
        m = 0
        for w in row:
            m = (m << 64) | w
        out.append((m >> 1) * 2 + 1)  # odd numerator: x = (2m'+1)/2^x_bits in (0, 1)
    return out


def sample_x_expansion(scheme: str, key: RngStreamKey, n: int, x_bits: int = 128) -> Trajectory:
    """Digits of a uniformly drawn dyadic x, shifted to B = d - 1.

    Rational x always has a finite Engel and Sylvester expansion, so with a
    fixed number of random bits the trajectory can end early; ``short`` is
    set when fewer than ``n`` digits were produced.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    num = _dyadic_numerators(key.master_seed, [key.stream_id], x_bits, key.counter)[0]
    digits, terminated = expand_ints(num, 1 << x_bits, scheme, n, max_bits=EXACT_BIT_CAP)
    seq = DigitSequence(scheme, tuple(digits), terminated)
    b = to_framework_digits(seq)
    model = preset(scheme)
    r = tuple(r_from_digits(b[j], model.phi(b[j - 1]), 0) for j in range(1, len(b)))
    u = (Fraction(num, 1 << x_bits),)
    return Trajectory(model, tuple(b), r, key, "exact", u=u, short=len(b) < n)


def x_expansion_digits(scheme: str, master_seed: int, stream_ids, n: int, x_bits: int = 128):
    """B_1..B_n from the expansion oracle for many streams.

    Returns an int64 array with -1 where a trajectory ended early; digits
    above 2^62 are clipped to 2^62 (only ever used for binning).
    """
    nums = _dyadic_numerators(master_seed, stream_ids, x_bits)
    den = 1 << x_bits
    cap = 1 << 62
    out = np.full((len(nums), n), -1, dtype=np.int64)
    for i, num in enumerate(nums):
        digits, _ = expand_ints(num, den, scheme, n, max_bits=EXACT_BIT_CAP)
        out[i, :len(digits)] = [min(d - 1, cap) for d in digits]
    return out
