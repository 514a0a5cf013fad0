import pytest
from hypothesis import given, strategies as st

import oracles as O
from entanglemeter.partitions import (
    Partition,
    bipartitions,
    format_partition,
    k_partitions,
    parse_partition,
    stirling2,
)

# S(n, k) table, n = 1..6
STIRLING = {
    1: [1],
    2: [1, 1],
    3: [1, 3, 1],
    4: [1, 7, 6, 1],
    5: [1, 15, 25, 10, 1],
    6: [1, 31, 90, 65, 15, 1],
}


def test_stirling_table():
    for n, row in STIRLING.items():
        assert [stirling2(n, k) for k in range(1, n + 1)] == row
    assert stirling2(9, 4) == 7770
    assert stirling2(12, 2) == 2047


def test_stirling_errors():
    with pytest.raises(ValueError):
        stirling2(3, 4)
    with pytest.raises(ValueError):
        stirling2(25, 2)


def test_canonical_order_small_case():
    assert [str(p) for p in k_partitions(3, 2)] == ["1,2|3", "1,3|2", "1|2,3"]
    assert [str(p) for p in k_partitions(3, 3)] == ["1|2|3"]
    assert [str(p) for p in k_partitions(3, 1)] == ["1,2,3"]


@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_is_complete_and_canonical(n):
    for k in range(1, n + 1):
        got = list(k_partitions(n, k))
        assert len(got) == len(set(got)) == stirling2(n, k)
        want = {Partition(tuple(tuple(b) for b in p)) for p in O.set_partitions(n, k)}
        assert set(got) == want
        for p in got:
            assert p.k == k and p.n == n
            assert [b[0] for b in p.blocks] == sorted(b[0] for b in p.blocks)


def test_bipartitions():
    assert len(list(bipartitions(4))) == 7
    with pytest.raises(ValueError):
        list(bipartitions(1))


def test_invalid_k():
    for n, k in ((3, 0), (3, 4)):
        with pytest.raises(ValueError):
            list(k_partitions(n, k))


def test_parse_format_roundtrip_and_errors():
    p = parse_partition("2,4|1,3")
    assert format_partition(p) == "1,3|2,4"
    assert Partition.parse(str(p)) == p
    for bad in ("1,2|2", "1|3", "a|b", "1||2"):
        with pytest.raises(ValueError):
            parse_partition(bad)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=8))
def test_partition_canonicalization(labels):
    blocks = {}
    for site, lab in enumerate(labels, start=1):
        blocks.setdefault(lab, []).append(site)
    p = Partition(tuple(tuple(reversed(b)) for b in reversed(list(blocks.values()))))
    assert parse_partition(str(p)) == p
    assert p.n == len(labels)
