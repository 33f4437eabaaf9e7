"""Upper-triangular 2-itemset support counter indexed by frequent-item rank."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dataset import FrequentItemTable, TransactionDB
from .engine import Accumulator, Engine, PartitionedCollection, repartition

# cells are held as int64 but must stay within 32-bit range
_COUNT_MAX = np.iinfo(np.int32).max


def cell_index(r1: int, r2: int, n: int) -> int:
    if r1 > r2:
        r1, r2 = r2, r1
    if r1 == r2 or r1 < 0 or r2 >= n:
        raise IndexError(f"no cell ({r1}, {r2}) in a {n}-item triangular matrix")
    return r1 * (2 * n - r1 - 1) // 2 + (r2 - r1 - 1)


@dataclass
class TriangularMatrix:
    dim: int
    counts: np.ndarray
    rank_of: dict[int, int]

    @classmethod
    def zeros(cls, freq: FrequentItemTable) -> "TriangularMatrix":
        n = len(freq)
        return cls(n, np.zeros(n * (n - 1) // 2, dtype=np.int64), freq.rank_of)

    def get(self, r1: int, r2: int) -> int:
        return int(self.counts[cell_index(r1, r2, self.dim)])

    def support(self, item_i: int, item_j: int) -> int:
        try:
            r1, r2 = self.rank_of[item_i], self.rank_of[item_j]
        except KeyError as exc:
            raise KeyError(f"item {exc.args[0]} is not frequent; it has no matrix row") from None
        return self.get(r1, r2)

    def merged(self, other: "TriangularMatrix") -> "TriangularMatrix":
        if self.dim != other.dim:
            raise ValueError("matrix dimensions differ")
        return TriangularMatrix(self.dim, self.counts + other.counts, self.rank_of)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TriangularMatrix) and self.dim == other.dim
                and np.array_equal(self.counts, other.counts))


def pair_support(m: TriangularMatrix, item_i: int, item_j: int) -> int:
    return m.support(item_i, item_j)


@lru_cache(maxsize=256)
def _triu_pairs(width: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(width, k=1)


def _count_partition(rows, rank_lut: np.ndarray, n: int) -> np.ndarray:
    """Pair counts of one partition as a flat triangular array.

    Rows are flattened to rank arrays, infrequent items dropped, then rows of
    equal width are processed as one 2-D block.
    """
    size = n * (n - 1) // 2
    out = np.zeros(size, dtype=np.int64)
    if not rows:
        return out
    lengths = np.fromiter((len(t) for t in rows), dtype=np.int64, count=len(rows))
    total = int(lengths.sum())
    items = np.fromiter((i for t in rows for i in t), dtype=np.int64, count=total)
    row_id = np.repeat(np.arange(len(rows), dtype=np.int64), lengths)
    inside = items < rank_lut.size
    ranks = np.full(total, -1, dtype=np.int64)
    ranks[inside] = rank_lut[items[inside]]
    keep = ranks >= 0
    # one sort on a (row, rank) key orders ranks inside each row
    key = np.sort(row_id[keep] * n + ranks[keep])
    row_id, ranks = np.divmod(key, n)
    widths = np.bincount(row_id, minlength=len(rows))
    starts = np.concatenate(([0], np.cumsum(widths)[:-1]))
    for w in np.unique(widths):
        if w < 2:
            continue
        w = int(w)
        first = starts[widths == w]
        block = ranks[first[:, None] + np.arange(w)]
        ii, jj = _triu_pairs(w)
        r1, r2 = block[:, ii], block[:, jj]
        flat = r1 * (2 * n - r1 - 1) // 2 + (r2 - r1 - 1)
        out += np.bincount(flat.ravel(), minlength=size)
    return out


def rank_lookup(rank_of: dict[int, int]) -> np.ndarray:
    """Dense item -> rank array, -1 for items without a rank."""
    top = max(rank_of, default=-1)
    lut = np.full(top + 1, -1, dtype=np.int64)
    for item, r in rank_of.items():
        lut[item] = r
    return lut


class _PartitionCounter:
    # module-level callable so the process backend can pickle it
    def __init__(self, rank_lut, n):
        self.rank_lut = rank_lut
        self.n = n

    def __call__(self, rows):
        return _count_partition(rows, self.rank_lut, self.n)


def count_pairs(db, freq: FrequentItemTable, engine: Engine | None = None) -> TriangularMatrix:
    """Count every frequent pair in one pass, one partial matrix per partition.

    ``db`` may be a TransactionDB (repartitioned over the engine's workers) or
    an already partitioned collection of transactions. Infrequent items are
    skipped, so raw and filtered transactions give the same matrix.
    """
    n = len(freq)
    if n < 1:
        raise ValueError("count_pairs needs at least one frequent item")
    engine = engine or Engine(1)
    if isinstance(db, TransactionDB):
        coll = repartition(PartitionedCollection.of([db.transactions]), engine.default_parallelism)
    else:
        coll = db
    size = n * (n - 1) // 2
    acc = Accumulator(lambda: np.zeros(size, dtype=np.int64), np.add)
    total = engine.aggregate(coll, _PartitionCounter(rank_lookup(freq.rank_of), n), acc)
    if __debug__ and total.size and total.max() > _COUNT_MAX:
        raise OverflowError("pair count exceeds 32-bit cell capacity")
    return TriangularMatrix(n, total, freq.rank_of)
