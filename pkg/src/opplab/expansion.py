"""Exact Lüroth, Engel and Sylvester expansions of rationals in (0, 1).

All three schemes use the digit d(x) = ceil(1/x), i.e. the cell convention
x in [1/d, 1/(d-1)), so x = 1/m expands to the single digit m.  Remainders:

    luroth     x' = d (d - 1) x - (d - 1)
    engel      x' = d x - 1
    sylvester  x' = x - 1/d

Arithmetic is on Python integers throughout; nothing is ever rounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import ConsistencyError, DomainError

SCHEMES = ("luroth", "engel", "sylvester")
SYLVESTER_BIT_CAP = 4096


@dataclass(frozen=True)
class DigitSequence:
    scheme: str
    digits: tuple
    terminated: bool

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        _check_growth(self.scheme, self.digits)

    def __len__(self):
        return len(self.digits)


def _check_growth(scheme, digits):
    for i, d in enumerate(digits):
        if d < 2:
            raise ConsistencyError(f"{scheme} digit {d} at position {i} is below 2")
        if i == 0:
            continue
        prev = digits[i - 1]
        if scheme == "engel" and d < prev:
            raise ConsistencyError(f"engel digits decrease at position {i}")
        if scheme == "sylvester" and d < prev * (prev - 1) + 1:
            raise ConsistencyError(f"sylvester growth violated at position {i}")


def _parse(x) -> Fraction:
    if isinstance(x, str):
        x = Fraction(x.strip())
    x = Fraction(x)
    if not 0 < x < 1:
        raise DomainError(f"x must lie strictly between 0 and 1, got {x}")
    return x


def expand_ints(num: int, den: int, scheme: str, max_digits: int,
                max_bits: int = SYLVESTER_BIT_CAP):
    """Digits of num/den without building Fractions; returns (digits, terminated).

    The pair (num, den) need not be in lowest terms, which keeps the inner
    loop to a handful of integer operations.
    """
    digits = []
    while len(digits) < max_digits:
        d = -(-den // num)
        if scheme == "sylvester" and d.bit_length() > max_bits:
            break
        digits.append(d)
        if scheme == "luroth":
            num = d * (d - 1) * num - (d - 1) * den
        elif scheme == "engel":
            num = d * num - den
        else:
            num, den = d * num - den, d * den
        if num == 0:
            return digits, True
        if scheme == "sylvester":
            # keep the pair small: Sylvester denominators compound quickly
            g = gcd(num, den)
            if g > 1:
                num //= g
                den //= g
    return digits, False


def expand(x, scheme: str, max_digits: int, max_bits: int = SYLVESTER_BIT_CAP) -> DigitSequence:
    """Expand ``x`` (a Fraction or a "p/q" string) in the given scheme.

    >>> expand("2/5", "engel", 5).digits
    (3, 5)
    """
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    if int(max_digits) != max_digits or max_digits <= 0:
        raise DomainError("max_digits must be a positive integer")
    x = _parse(x)
    digits, terminated = expand_ints(x.numerator, x.denominator, scheme, int(max_digits), max_bits)
    return DigitSequence(scheme, tuple(digits), terminated)


def remainders(x, scheme: str, max_digits: int):
    """The remainder x_k after each digit, as Fractions (for invariant checks)."""
    x = _parse(x)
    out = []
    for _ in range(max_digits):
        d = -(-x.denominator // x.numerator)
        if scheme == "luroth":
            x = d * (d - 1) * x - (d - 1)
        elif scheme == "engel":
            x = d * x - 1
        else:
            x = x - Fraction(1, d)
        out.append(x)
        if x == 0:
            break
    return out


def reconstruct(seq: DigitSequence, n: int | None = None) -> Fraction:
    """Exact partial sum of the first ``n`` terms of the scheme's series."""
    if not seq.digits:
        raise DomainError("cannot reconstruct an empty digit sequence")
    n = len(seq.digits) if n is None else n
    if not 1 <= n <= len(seq.digits):
        raise DomainError(f"n must be in [1, {len(seq.digits)}]")
    total = Fraction(0)
    weight = 1  # product of the factors preceding the current term
    for d in seq.digits[:n]:
        if seq.scheme == "sylvester":
            total += Fraction(1, d)
        elif seq.scheme == "engel":
            weight *= d
            total += Fraction(1, weight)
        else:
            total += Fraction(1, weight * d)
            weight *= d * (d - 1)
    return total


def to_framework_digits(seq: DigitSequence) -> list:
    """B_k = d_k - 1, checked against h_{k+1} >= phi(h_k) for the matching preset."""
    b = [d - 1 for d in seq.digits]
    for i, h in enumerate(b):
        if h < 1:
            raise ConsistencyError(f"B_{i + 1} = {h} < 1")
        if i == 0:
            continue
        prev = b[i - 1]
        need = {"luroth": 1, "engel": prev, "sylvester": prev * (prev + 1)}[seq.scheme]
        if h < need:
            raise ConsistencyError(f"B_{i + 1} = {h} below phi(B_{i}) = {need}")
    return b
