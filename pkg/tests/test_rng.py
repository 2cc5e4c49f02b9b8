from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opplab import rng
from opplab.errors import DomainError
from opplab.rng import RngStreamKey


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.integers(0, 9))
def test_matches_numpy_philox(master, sid, counter):
    key = RngStreamKey(master, sid, counter)
    ref = key.numpy_generator().bit_generator.random_raw(11)
    np.testing.assert_array_equal(key.words(11), np.asarray(ref, dtype=np.uint64))


def test_words_at_matches_block_words():
    block = rng.stream_words(7, [3, 4], 0, 20)
    idx = np.array([0, 5, 19])
    np.testing.assert_array_equal(rng.words_at(7, [[3], [4]], idx[None, :]), block[:, idx])


def test_streams_distinct_and_reproducible():
    a = rng.stream_words(1, [0, 1], 0, 8)
    assert not np.array_equal(a[0], a[1])
    np.testing.assert_array_equal(a, rng.stream_words(1, [0, 1], 0, 8))


def test_uniform_conversions():
    assert rng.uniform_exact(0) == Fraction(1, 2**64)
    assert rng.uniform_exact(2**64 - 1) == 1
    u = rng.uniform_float(np.array([0, 2**63], dtype=np.uint64))
    assert 0 < u[0] and u[1] == 0.5


def test_key_validation():
    with pytest.raises(DomainError):
        RngStreamKey(-1, 0)
    with pytest.raises(DomainError):
        RngStreamKey(0, 2**64)
