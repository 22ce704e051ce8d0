from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hgm1f1.partitions import (
    check_partition, conjugate, count_partitions, dominates, gen_pochhammer,
    hook_product_upper, multiplicities, partitions_of, rho, rising, weight,
)


def test_small_enumerations():
    assert partitions_of(0) == [()]
    assert partitions_of(3) == [(3,), (2, 1), (1, 1, 1)]
    assert partitions_of(4, 2) == [(4,), (3, 1), (2, 2)]
    assert partitions_of(5, 0) == []


@pytest.mark.parametrize("k", range(0, 26))
def test_counts_match_pentagonal_recurrence(k):
    assert len(partitions_of(k)) == count_partitions(k)


def test_known_partition_numbers():
    # p(10) = 42, p(20) = 627 (standard table values)
    assert count_partitions(10) == 42
    assert count_partitions(20) == 627


@given(st.integers(1, 14), st.integers(1, 6))
def test_length_bound_and_order(k, m):
    parts = partitions_of(k, m)
    assert all(len(p) <= m and weight(p) == k for p in parts)
    assert len(set(parts)) == len(parts)
    # reverse-lexicographic order is a linear extension of dominance
    for i, a in enumerate(parts):
        for b in parts[:i]:
            assert not (dominates(a, b) and a != b)


def test_dominance():
    assert dominates((3,), (2, 1))
    assert dominates((2, 1), (1, 1, 1))
    assert not dominates((2, 2, 2), (3, 1, 1, 1)) and not dominates((3, 1, 1, 1), (2, 2, 2))
    assert dominates((2, 1), (2, 1))
    with pytest.raises(ValueError):
        dominates((2,), (1,))


def test_check_partition():
    assert check_partition([3, 1]) == (3, 1)
    for bad in [(1, 2), (2, 0), (-1,)]:
        with pytest.raises(ValueError):
            check_partition(bad)


def test_generalized_pochhammer():
    a = Fraction(7, 3)
    assert gen_pochhammer(a, ()) == 1
    assert gen_pochhammer(a, (3,)) == a * (a + 1) * (a + 2)
    assert gen_pochhammer(a, (2, 1)) == a * (a + 1) * (a - Fraction(1, 2))
    assert gen_pochhammer(a, (1, 1, 1)) == a * (a - Fraction(1, 2)) * (a - 1)
    assert gen_pochhammer(2.5, (2, 1)) == pytest.approx(2.5 * 3.5 * 2.0)
    assert rising(3, 0) == 1 and rising(3, 2) == 12


def test_rho_and_conjugate():
    assert rho((2, 1)) == 2 * 1 + 1 * (-1)
    assert conjugate((3, 1)) == (2, 1, 1)
    assert conjugate(conjugate((4, 2, 2, 1))) == (4, 2, 2, 1)
    assert conjugate(()) == ()
    assert multiplicities((2, 2, 1)) == {2: 2, 1: 1}


def test_hook_product():
    # single box: 2*0 + 0 + 2
    assert hook_product_upper((1,)) == 2
    # (2): boxes with arms 1, 0 -> 4 * 2
    assert hook_product_upper((2,)) == 8
    # (1,1): legs 1, 0 -> 3 * 2
    assert hook_product_upper((1, 1)) == 6
