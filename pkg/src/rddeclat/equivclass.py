"""1-length-prefix equivalence classes and the three class partitioners."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

import numpy as np

from .trimatrix import TriangularMatrix
from .vertical import VerticalDB, intersect


@dataclass
class EquivalenceClass:
    prefix: int
    prefix_rank: int
    # (suffix item, tidset of {prefix, suffix}) in item_order sequence
    atoms: list[tuple[int, np.ndarray]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.atoms)

    def two_itemsets(self) -> list[tuple[tuple[int, ...], int]]:
        out = []
        for suffix, tids in self.atoms:
            a, b = (self.prefix, suffix) if self.prefix < suffix else (suffix, self.prefix)
            out.append(((a, b), int(tids.size)))
        return out


@dataclass(frozen=True)
class PartitionAssignment:
    num_partitions: int
    mapping: dict[int, int]
    balance: tuple[int, ...]

    def partition_of(self, prefix_rank: int) -> int:
        return self.mapping[prefix_rank]


def build_classes(v: VerticalDB, min_count: int, matrix: TriangularMatrix | None = None) -> list[EquivalenceClass]:
    """One class per prefix position 0..n-2, atoms restricted to frequent pairs.

    A class that ends up with no atoms is still returned (with an empty atom
    list) so the caller can see which prefixes had nothing to mine.
    When ``matrix`` is given, pairs it reports as infrequent are skipped
    without intersecting their tidsets.
    """
    ordered = v.ordered()
    n = len(ordered)
    classes = []
    for i in range(n - 1):
        item_i, tids_i = ordered[i]
        ec = EquivalenceClass(item_i, i)
        for j in range(i + 1, n):
            item_j, tids_j = ordered[j]
            if matrix is not None and matrix.get(i, j) < min_count:
                continue
            tids_ij = intersect(tids_i, tids_j)
            if tids_ij.size >= min_count:
                ec.atoms.append((item_j, tids_ij))
        classes.append(ec)
    return classes


def _assignment(classes, p: int, rule) -> PartitionAssignment:
    mapping = {}
    totals = [0] * p
    for ec in classes:
        pid = rule(ec.prefix_rank)
        mapping[ec.prefix_rank] = pid
        totals[pid] += ec.size
    return PartitionAssignment(p, mapping, tuple(totals))


def default_partitioner(classes, n: int) -> PartitionAssignment:
    """n - 1 partitions, class of rank r alone in partition r."""
    if n < 2:
        raise ValueError("the default partitioner needs at least two frequent items")
    return _assignment(classes, n - 1, lambda r: r)


def hash_partitioner(classes, p: int) -> PartitionAssignment:
    if p < 1:
        raise ValueError("p must be >= 1")
    return _assignment(classes, p, lambda r: r % p)


def reverse_hash_rank(r: int, p: int, mode: str = "stated") -> int:
    """Partition of the class with prefix rank ``r``.

    ``stated``: ranks below p go straight, every rank >= p is mirrored,
    (p - 1) - (r mod p). ``boustrophedon``: mirror only every other block of
    p ranks, giving a full snake sweep.
    """
    if r < p:
        return r
    if mode == "stated":
        return (p - 1) - (r % p)
    if mode == "boustrophedon":
        return (p - 1) - (r % p) if (r // p) % 2 else r % p
    raise ValueError(f"unknown reverse-hash mode {mode!r}")


def reverse_hash_partitioner(classes, p: int, mode: str = "stated") -> PartitionAssignment:
    if p < 1:
        raise ValueError("p must be >= 1")
    return _assignment(classes, p, lambda r: reverse_hash_rank(r, p, mode))


def balance_metric(assignment: PartitionAssignment) -> tuple[tuple[int, ...], float]:
    """Per-partition atom totals and their coefficient of variation (population stddev / mean)."""
    totals = assignment.balance
    if len(totals) <= 1:
        return totals, 0.0
    mean = statistics.fmean(totals)
    if mean == 0:
        return totals, 0.0
    return totals, statistics.pstdev(totals) / mean
