"""Set partitions of the site labels ``{1..n}``.

Partitions are enumerated as restricted-growth strings (RGS): ``a_1 = 0`` and
``a_i <= 1 + max(a_1..a_{i-1})``. A string whose maximum is ``k-1`` encodes a
k-block partition, and the blocks come out sorted by their minimum element.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

STIRLING_MAX_N = 20


@dataclass(frozen=True)
class Partition:
    """Unordered set partition with blocks kept in canonical order."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else 0))
        if any(len(b) == 0 for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        flat = [s for b in blocks for s in b]
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError(f"blocks {blocks} do not partition 1..{len(flat)}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return format_partition(self)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        return parse_partition(text)


def format_partition(p: Partition) -> str:
    """``1,3|2|4`` style text form."""
    return "|".join(",".join(str(s) for s in b) for b in p.blocks)


def parse_partition(text: str) -> Partition:
    try:
        blocks = [tuple(int(s) for s in part.split(",")) for part in text.strip().split("|")]
    except ValueError as exc:
        raise ValueError(f"cannot parse partition {text!r}") from exc
    return Partition(tuple(blocks))


def _rgs(n: int, k: int) -> Iterator[list[int]]:
    # Lexicographic RGS with exactly k distinct values; prunes branches that
    # cannot reach k classes in the remaining positions.
    a = [0] * n

    def rec(i: int, m: int):
        if i == n:
            if m == k:
                yield a
            return
        if k - m > n - i:
            return
        for v in range(min(m + 1, k)):
            a[i] = v
            yield from rec(i + 1, max(m, v + 1))

    yield from rec(1, 1) if n else iter(())


def k_partitions(n: int, k: int) -> Iterator[Partition]:
    """Yield every k-block partition of ``{1..n}`` exactly once.

    >>> [str(p) for p in k_partitions(3, 2)]
    ['1,2|3', '1,3|2', '1|2,3']
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    for a in _rgs(n, k):
        blocks: list[list[int]] = [[] for _ in range(k)]
        for site, label in enumerate(a, start=1):
            blocks[label].append(site)
        yield Partition(tuple(tuple(b) for b in blocks))


def bipartitions(n: int) -> Iterator[Partition]:
    """All ``2**(n-1) - 1`` unordered bipartitions of ``{1..n}``."""
    if n < 2:
        raise ValueError(f"bipartitions need n >= 2, got {n}")
    return k_partitions(n, 2)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind, S(n, k)."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if n > STIRLING_MAX_N:
        raise ValueError(f"stirling2 is limited to n <= {STIRLING_MAX_N}")
    if n == k:
        return 1
    if k == 0:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


@lru_cache(maxsize=64)
def partition_list(n: int, k: int) -> tuple[Partition, ...]:
    return tuple(k_partitions(n, k))
