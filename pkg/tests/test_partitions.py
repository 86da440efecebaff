import pytest
from hypothesis import given, strategies as st

from entcesaro.partitions import (
    Partition,
    canonicalize,
    enumerate_pair_partitions,
    is_crossing,
    parse_partition,
    remove_last_class,
    render_partition,
    require_pair,
)

from conftest import crossing_by_quadruple_scan


def test_parse_examples():
    p = parse_partition("1,2,2,1")
    assert p.labels == (1, 2, 2, 1)
    assert (p.m, p.k) == (4, 2)
    assert p.class_positions() == [(1, 4), (2, 3)]

    p = parse_partition("1,1")
    assert (p.m, p.k) == (2, 1)

    assert parse_partition("2,1,2,1").labels == (1, 2, 1, 2)


def test_parse_accepts_non_surjective_labels():
    assert parse_partition("1,3").labels == (1, 2)
    assert parse_partition("5,5,9").labels == (1, 1, 2)


@pytest.mark.parametrize("text", ["", " ", "1,,2", "1,x", "0,1", "-1,1", "1.5,2"])
def test_parse_rejects_bad_input(text):
    with pytest.raises(ValueError):
        parse_partition(text)


def test_partition_constructor_requires_canonical_labels():
    with pytest.raises(ValueError):
        Partition((2, 1))
    with pytest.raises(ValueError):
        Partition((1, 3))
    with pytest.raises(ValueError):
        Partition(())


def test_require_pair_examples():
    s = require_pair(parse_partition("1,2,1,2"))
    assert s.class_pairs == ((1, 3), (2, 4))
    assert s.i_max == 2
    assert s.j_next == 3

    s = require_pair(parse_partition("1,2,2,1"))
    assert s.class_pairs == ((1, 4), (2, 3))
    assert s.i_max == 2

    with pytest.raises(ValueError):
        require_pair(parse_partition("1,1,1"))
    with pytest.raises(ValueError):
        require_pair(parse_partition("1,2,2"))


def test_require_pair_tiles_all_positions():
    for p in enumerate_pair_partitions(3):
        s = require_pair(p)
        flat = sorted(pos for pair in s.class_pairs for pos in pair)
        assert flat == list(range(1, p.m + 1))
        assert all(i < j for i, j in s.class_pairs)
        assert s.i_max == max(i for i, _ in s.class_pairs)


def test_crossing_examples():
    assert is_crossing(parse_partition("1,2,1,2")) is True
    assert is_crossing(parse_partition("1,2,2,1")) is False
    assert is_crossing(parse_partition("1,1,2,2")) is False
    assert is_crossing(parse_partition("1,2,1,3,2,3")) is True
    with pytest.raises(ValueError):
        is_crossing(parse_partition("1,1,1"))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_crossing_matches_quadruple_scan(k):
    for p in enumerate_pair_partitions(k):
        assert is_crossing(p) == crossing_by_quadruple_scan(p), p.labels


def test_enumeration_counts_match_double_factorial():
    expected = {1: 1, 2: 3, 3: 15, 4: 105, 5: 945}
    for k, count in expected.items():
        parts = enumerate_pair_partitions(k)
        assert len(parts) == count
        assert len(set(parts)) == count
        assert all(p.is_pair() and p.m == 2 * k for p in parts)
        assert [p.labels for p in parts] == sorted(p.labels for p in parts)


def test_enumeration_contains_known_partitions():
    assert Partition((1, 1)) in enumerate_pair_partitions(1)
    assert Partition((1, 2, 1, 3, 2, 3)) in enumerate_pair_partitions(3)


def test_enumeration_works_at_the_cap():
    assert len(enumerate_pair_partitions(6)) == 10395


def test_enumeration_guards():
    with pytest.raises(ValueError):
        enumerate_pair_partitions(0)
    with pytest.raises(ValueError):
        enumerate_pair_partitions(7)


def test_remove_last_class_examples():
    assert remove_last_class(parse_partition("1,2,2,1")) == (Partition((1, 1)), 2)
    assert remove_last_class(parse_partition("1,2,1,2")) == (Partition((1, 1)), 2)
    assert remove_last_class(parse_partition("1,2,1,3,2,3")) == (Partition((1, 2, 1, 2)), 4)
    with pytest.raises(ValueError):
        remove_last_class(parse_partition("1,1"))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_remove_last_class_chain_terminates(k):
    for p in enumerate_pair_partitions(k):
        current = p
        for _ in range(k - 1):
            current, k_beta = remove_last_class(current)
            assert 1 <= k_beta <= p.m
        assert current == Partition((1, 1))


@given(st.lists(st.integers(min_value=1, max_value=6), min_size=1, max_size=12))
def test_canonicalize_idempotent(labels):
    p = canonicalize(labels)
    assert parse_partition(render_partition(p)) == p
    assert canonicalize(p.labels) == p
    # relabeling preserves class membership
    for i in range(len(labels)):
        for j in range(len(labels)):
            assert (labels[i] == labels[j]) == (p.labels[i] == p.labels[j])
