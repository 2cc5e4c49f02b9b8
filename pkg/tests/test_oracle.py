import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opplab.errors import DomainError
from opplab.families import DistributionFamily as D
from opplab.model import preset
from opplab.oracle import (IidDigitLaw, YModel, check_slow_variation, h_function, luroth_er_trunc,
                           luroth_er_trunc_float, tail_integral_identity, y_tail, y_tail_moment,
                           y_trunc_moment)
from opplab.sampler import sample_r_column
from opplab.statistics import truncate_r

U, P2 = YModel(D.uniform()), YModel(D.power(2))
PERT = YModel(D.perturbed_power(1, (1, 1)))


def test_y_tail_examples():
    assert y_tail(U, 2) == 0.5
    assert y_tail(P2, 10) == pytest.approx(0.01, rel=1e-15)
    for y in (U, P2, PERT):
        assert y_tail(y, 1) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        y_tail(U, 0.5)


def test_trunc_moment_examples():
    assert y_trunc_moment(YModel(D.power(1)), 1, math.e) == pytest.approx(1.0)
    assert y_trunc_moment(U, 1, 2) == pytest.approx(math.log(2), abs=1e-12)
    assert y_trunc_moment(P2, 2, 7) == pytest.approx(2 * math.log(7))
    for y in (U, P2, PERT):
        assert y_trunc_moment(y, 1.5, 1) == 0.0


def test_perturbed_quadrature_against_mpmath():
    # density of Y at y: f(1/y)/y^2 with f(u) = (1 + 2u)/2
    for q, t in [(0.5, 3.0), (1.0, 100.0), (2.0, 10.0)]:
        ref = mpmath.quad(lambda y: y**q * (1 + 2 / y) / 2 / y**2, [1, t])
        assert y_trunc_moment(PERT, q, t) == pytest.approx(float(ref), rel=1e-10)
    ref = mpmath.quad(lambda y: y**0.5 * (1 + 2 / y) / 2 / y**2, [5, mpmath.inf])
    assert y_tail_moment(PERT, 0.5, 5) == pytest.approx(float(ref), rel=1e-9)


def test_tail_moment_infinite_when_q_at_least_alpha():
    assert y_tail_moment(U, 1, 10) == math.inf
    assert y_tail_moment(P2, 1, 10) == pytest.approx(0.2)


def test_h_function_examples():
    assert h_function(U, math.e) == pytest.approx(1.0)
    assert h_function(P2, 10) == pytest.approx(2 * (1 - 1 / 10))


def test_slow_variation():
    for y in (U, P2, PERT):
        assert check_slow_variation(y).passed
    # H(2x)/H(x) at 1e6 for the uniform family is 1 + log 2 / log 1e6
    rep = check_slow_variation(U, x_grid=[1e6], ts=(2.0,))
    assert rep.ratios[2.0][0] == pytest.approx(1 + math.log(2) / math.log(1e6), rel=1e-12)
    assert rep.margin[2.0] < 0 and abs(rep.margin[2.0]) < 1e-3


def test_luroth_er_trunc_examples():
    assert luroth_er_trunc(1) == 1
    assert luroth_er_trunc(3) == Fraction(11, 6)
    vals = [luroth_er_trunc(t) for t in (1, 10, 100, 1000)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert float(luroth_er_trunc(1000)) == pytest.approx(math.log(1000), abs=1)
    with pytest.raises(DomainError):
        luroth_er_trunc(Fraction(1, 2))


@given(st.fractions(1, 500, max_denominator=9))
def test_luroth_float_matches_exact(t):
    assert luroth_er_trunc_float(float(t)) == pytest.approx(float(luroth_er_trunc(t)), rel=1e-12)


def test_luroth_er_trunc_monte_carlo():
    r = sample_r_column(preset("luroth"), 1, 77, np.arange(10**6))
    for t in (2.5, 10, 300):
        x = truncate_r(r, t)
        assert abs(x.mean() - float(luroth_er_trunc(Fraction(t)))) < 4 * x.std() / 1e3


def test_identity_examples():
    chk = tail_integral_identity(U, 1, 2)
    assert chk.lhs == pytest.approx(1 + math.log(2)) and chk.passed
    chk = tail_integral_identity(U, 1, 3, c=3)
    assert chk.lhs == 0 and chk.rhs == pytest.approx(0, abs=1e-15)
    chk = tail_integral_identity(P2, 2, 10, c=1)
    assert chk.lhs == pytest.approx(2 * math.log(10)) and chk.passed


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([U, P2, PERT]), st.floats(0.2, 3), st.floats(1, 1e3), st.floats(0, 1))
def test_identity_grid(y, q, t, frac):
    assert tail_integral_identity(y, q, t, frac * t).gap < 1e-8


def test_identity_empirical():
    x = 1 / np.random.default_rng(0).random(1000)
    assert tail_integral_identity(x, 1.3, 20, 2).passed


def test_x_tail_power_one():
    x = np.logspace(0, 12, 50)
    assert np.max(np.abs(x * y_tail(YModel(D.power(1)), x) - 1)) < 1e-9


@pytest.mark.parametrize("fam", [D.uniform(), D.power(2), D.perturbed_power(1, (1, 1))])
def test_iid_digit_law_against_direct_sums(fam):
    law = IidDigitLaw(fam)
    k = np.arange(1, 20_001, dtype=float)
    pmf = law.pmf(k)
    for p, c in [(1.0, 7.5), (2.0, 300.0), (0.5, 1000.0)]:
        direct = math.fsum(np.minimum(k, c) ** p * pmf) + c**p * float(law.sf(20_000))
        assert law.capped_moment(p, c) == pytest.approx(direct, rel=1e-10)
    assert law.trunc_moment(1, 2) == pytest.approx(math.fsum(k[:2] * pmf[:2]))


def test_luroth_exact_moment_examples():
    law = IidDigitLaw(D.uniform())
    assert law.trunc_moment(1, 2) == pytest.approx(5 / 6)
    # tail sum: direct up to 2e6 plus the integral remainder 2/sqrt(2e6)
    k = np.arange(11, 2_000_001, dtype=float)
    direct = math.fsum(k**0.5 / (k * (k + 1))) + 2 / math.sqrt(2e6)
    assert law.tail_moment(0.5, 10) == pytest.approx(direct, rel=1e-6)
