from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opplab.errors import CappedTrajectoryError, DomainError
from opplab.families import DistributionFamily as D
from opplab.model import delta, iid_model, preset, r_from_digits
from opplab.rng import RngStreamKey
from opplab.sampler import (sample_batch, sample_digit, sample_r_column, sample_trajectory,
                            sample_x_expansion, x_expansion_digits)


@pytest.mark.parametrize("phi, q, v, want", [(1, 0, Fraction(3, 10), 3), (3, 0, Fraction(1, 2), 6),
                                             (2, 1, 1, 2)])
def test_sample_digit_examples(phi, q, v, want):
    assert sample_digit(phi, q, v) == want


def test_sample_digit_domain():
    for v in (0, Fraction(3, 2), -1):
        with pytest.raises(DomainError):
            sample_digit(1, 0, v)


@given(st.integers(1, 40), st.fractions(0, 5, max_denominator=7),
       st.fractions(Fraction(1, 10**9), 1, max_denominator=10**9))
def test_inverse_transform_cell(phi, q, v):
    k = sample_digit(phi, q, v)
    assert delta(phi, k + 1, q) < v <= delta(phi, k, q)


def test_trajectory_deterministic_and_consistent():
    key = RngStreamKey(2024, 5)
    for name in ("luroth", "engel", "sylvester"):
        m = preset(name)
        a = sample_trajectory(m, 10, key)
        assert a.b == sample_trajectory(m, 10, key).b
        for j in range(9):
            phi = m.phi(a.b[j])
            assert a.b[j + 1] >= phi
            assert a.r[j] == r_from_digits(a.b[j + 1], phi, 0) and a.r[j] >= 1
            # the recorded uniform falls in the digit's cell
            assert delta(phi, a.b[j + 1] + 1, 0) < a.u[j + 1] <= delta(phi, a.b[j + 1], 0)


def test_engel_nondecreasing():
    m = preset("engel")
    batch = sample_batch(m, 30, 11, np.arange(500))
    b = batch.b[:, :20]
    assert np.all(np.diff(b, axis=1) >= 0)


def test_luroth_first_digit_frequency():
    b = sample_batch(preset("luroth"), 1, 3, np.arange(10**6)).b[:, 0]
    p_hat = np.mean(b == 1)
    assert abs(p_hat - 0.5) < 3 * np.sqrt(0.25 / 1e6)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["luroth", "engel", "sylvester"]))
def test_fast_matches_exact(seed, name):
    m = preset(name)
    key = RngStreamKey(seed, 3)
    ex = sample_trajectory(m, 8, key, "exact")
    fa = sample_trajectory(m, 8, key, "fast")
    exact_r = np.array([float(r) for r in ex.r])
    np.testing.assert_allclose(fa.r, exact_r, rtol=1e-9)
    for be, bf in zip(ex.b, fa.b):
        assert bf is None or be == bf


@pytest.mark.parametrize("fam", [D.power(2), D.perturbed_power(1, (1, 1)), D.power(Fraction(1, 2))])
def test_non_uniform_exact_matches_fast(fam):
    m = iid_model(fam)
    for sid in range(20):
        key = RngStreamKey(9, sid)
        ex = sample_trajectory(m, 6, key, "exact")
        fa = sample_trajectory(m, 6, key, "fast")
        assert list(ex.b) == list(fa.b)


def test_r_column_matches_batch():
    m = preset("luroth")
    sids = np.arange(50)
    np.testing.assert_array_equal(sample_r_column(m, 7, 4, sids), sample_batch(m, 8, 4, sids).r[:, 6])


def test_bit_cap():
    with pytest.raises(CappedTrajectoryError) as exc:
        sample_trajectory(preset("sylvester"), 30, RngStreamKey(1, 1), bit_cap=64)
    assert len(exc.value.prefix) >= 1


def test_expansion_oracle():
    t = sample_x_expansion("sylvester", RngStreamKey(5, 1), 8)
    assert all(b2 >= b1 * (b1 + 1) for b1, b2 in zip(t.b, t.b[1:]))
    d = x_expansion_digits("engel", 5, np.arange(100), 4)
    assert d.shape == (100, 4) and np.all(d[:, 0] >= 1)


def test_engel_transition_from_two():
    # P(B' = k | B = 2) = 2/(k(k+1)), k >= 2
    d = x_expansion_digits("engel", 8, np.arange(20_000), 2)
    nxt = d[d[:, 0] == 2, 1]
    for k in (2, 3, 4):
        p = 2 / (k * (k + 1))
        assert abs(np.mean(nxt == k) - p) < 4 * np.sqrt(p * (1 - p) / nxt.size)
