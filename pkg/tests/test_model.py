from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opplab.errors import ConfigurationError, DomainError
from opplab.families import DistributionFamily as D
from opplab.model import (ModelSpec, LinearPhi, ConstantQ, check_cond2F, check_lipschitz,
                          check_uniform_power_limit, delta, iid_model, preset, r_from_digits)


@pytest.mark.parametrize("phi, k, q, want", [
    (1, 4, 0, Fraction(1, 4)),
    (3, 6, 0, Fraction(1, 2)),
    (2, 4, 1, Fraction(2, 3)),
])
def test_delta_examples(phi, k, q, want):
    assert delta(phi, k, q) == want


@pytest.mark.parametrize("b_next, phi, q, want", [(7, 1, 0, 7), (6, 3, 0, 2), (4, 2, 1, Fraction(3, 2))])
def test_r_from_digits_examples(b_next, phi, q, want):
    assert r_from_digits(b_next, phi, q) == want


def test_delta_domain_errors():
    with pytest.raises(DomainError):
        delta(3, 2, 0)
    with pytest.raises(DomainError):
        delta(0, 2, 0)
    with pytest.raises(DomainError):
        r_from_digits(1, Fraction(3, 2), 0)


phis = st.fractions(min_value=Fraction(1, 10), max_value=50, max_denominator=50)
qs = st.fractions(min_value=0, max_value=20, max_denominator=20)


@given(phis, qs, st.integers(0, 200))
def test_delta_r_reciprocal_and_decreasing(phi, q, extra):
    k = -(-phi.numerator // phi.denominator) + extra
    d = delta(phi, k, q)
    assert r_from_digits(k, phi, q) * d == 1
    assert delta(phi, k + 1, q) < d <= 1


@given(st.integers(1, 30), qs, st.integers(0, 40))
def test_telescoping_mass(phi, q, span):
    F = D.power(2)
    kmin = phi
    total = sum(F.cdf_exact(delta(phi, k, q)) - F.cdf_exact(delta(phi, k + 1, q))
                for k in range(kmin, kmin + span + 1))
    assert total == F.cdf_exact(delta(phi, kmin, q)) - F.cdf_exact(delta(phi, kmin + span + 1, q))
    assert delta(phi, phi, q) == 1


def test_presets_phi():
    assert preset("luroth").phi(5) == 1
    assert preset("engel").phi(5) == 5
    assert preset("sylvester").phi(5) == 30
    with pytest.raises(ConfigurationError):
        preset("cantor")


def test_model_meta_validated():
    with pytest.raises(ConfigurationError):
        ModelSpec("bad", LinearPhi(1), ConstantQ(0), D.uniform(), alpha_meta=1.0, l_meta=2.0)
    m = ModelSpec("ok", LinearPhi(1), ConstantQ(0), D.uniform(), alpha_meta=1.0, l_meta=1.0)
    assert not m.is_iid_digit_model and iid_model(D.power(2)).is_iid_digit_model


def test_cond2F_examples():
    r = check_cond2F(D.uniform(), 1.0)
    assert r.l_hat == pytest.approx(1.0, abs=1e-12) and r.passed
    r = check_cond2F(D.power(2), 2.0)
    assert r.l_hat == pytest.approx(1.0, abs=1e-12) and r.passed
    r = check_cond2F(D.power(2), 1.0)
    assert r.passed and r.degenerate and r.l_hat < 1e-4
    assert r.note == "heuristic at horizon"


def test_cond2F_coarse_grid_rejected():
    with pytest.raises(ConfigurationError):
        check_cond2F(D.uniform(), 1.0, np.logspace(0, -8, 20))


def test_lipschitz_examples():
    u = check_lipschitz(D.uniform())
    assert u.m_hat == pytest.approx(1.0) and u.bounded
    p2 = check_lipschitz(D.power(2))
    assert p2.m_hat == pytest.approx(2.0, rel=1e-3) and p2.bounded
    assert not check_lipschitz(D.power(0.5)).bounded


def test_uniform_power_limit_examples():
    assert check_uniform_power_limit(D.uniform(), 1.0).passed
    assert check_uniform_power_limit(D.power(2), 2.0).l_hat == pytest.approx(1.0)
    # F(x) = x (1 + x) / 2 has F'(0) = 1/2
    rep = check_uniform_power_limit(D.perturbed_power(1, (1, 1)), 1.0)
    assert rep.passed and rep.l_hat == pytest.approx(0.5, rel=1e-6)
    # the uniform limit implies the tail condition with the same constant
    assert check_cond2F(D.perturbed_power(1, (1, 1)), 1.0).l_hat == pytest.approx(rep.l_hat, abs=1e-6)


@pytest.mark.parametrize("fam", [D.uniform(), D.power(2), D.power(0.5), D.perturbed_power(1, (1, 1)),
                                 D.perturbed_power(2.5, (2, -1))])
def test_family_invariants(fam):
    x = np.linspace(0, 1, 10_001)
    F = fam.cdf(x)
    assert F[0] == 0 and F[-1] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(F) >= 0)
    u = np.linspace(1e-6, 1, 999)
    assert np.max(np.abs(fam.cdf(fam.ppf(u)) - u)) < 1e-12


def test_family_roundtrip_dict():
    fam = D.perturbed_power(1.5, (1, 0.5))
    assert D.from_dict(fam.to_dict()) == fam
