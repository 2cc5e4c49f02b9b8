from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from opplab.errors import ConsistencyError, DomainError
from opplab.expansion import DigitSequence, expand, reconstruct, remainders, to_framework_digits


@pytest.mark.parametrize("scheme, digits, terminated", [
    ("luroth", (3, 3, 3, 3, 3), False),
    ("engel", (3, 5), True),
    ("sylvester", (3, 15), True),
])
def test_expand_two_fifths(scheme, digits, terminated):
    seq = expand("2/5", scheme, 5)
    assert seq.digits == digits and seq.terminated is terminated


def test_reconstruct_examples():
    assert reconstruct(DigitSequence("engel", (3, 5), True), 2) == Fraction(2, 5)
    assert reconstruct(DigitSequence("sylvester", (3, 15), True), 2) == Fraction(2, 5)
    assert reconstruct(DigitSequence("luroth", (3, 3), False), 2) == Fraction(7, 18)


def test_framework_bridge_examples():
    assert to_framework_digits(DigitSequence("luroth", (3, 3, 3), False)) == [2, 2, 2]
    assert to_framework_digits(DigitSequence("engel", (3, 5), True)) == [2, 4]
    assert to_framework_digits(DigitSequence("sylvester", (3, 15), True)) == [2, 14]


def test_errors():
    for bad in ("0", "1", "3/2", "-1/3"):
        with pytest.raises(DomainError):
            expand(bad, "engel", 3)
    with pytest.raises(DomainError):
        expand("1/3", "engel", 0)
    with pytest.raises(DomainError):
        reconstruct(DigitSequence("engel", (), True))
    with pytest.raises(ConsistencyError):
        DigitSequence("engel", (5, 3), True)


def test_unit_fraction_cell_convention():
    assert expand("1/2", "engel", 4).digits == (2,)
    assert expand("1/7", "luroth", 4).digits == (7,)


rationals = st.integers(2, 10**6).flatmap(lambda q: st.tuples(st.integers(1, q - 1), st.just(q)))


@given(rationals, st.sampled_from(["luroth", "engel", "sylvester"]))
def test_round_trip_and_growth(pq, scheme):
    x = Fraction(*pq)
    seq = expand(x, scheme, 64)
    defects = [abs(x - reconstruct(seq, k)) for k in range(1, len(seq) + 1)]
    assert all(b <= a for a, b in zip(defects, defects[1:]))
    if seq.terminated:
        assert defects[-1] == 0
    if scheme == "luroth":
        assert all(d < Fraction(1, 2**k) for k, d in enumerate(defects, 1))
    for r in remainders(x, scheme, min(len(seq), 64)):
        assert 0 <= r < 1
    to_framework_digits(seq)
