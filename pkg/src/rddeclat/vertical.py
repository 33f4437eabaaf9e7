"""Vertical tidset database and sorted-array tidset intersection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FrequentItemTable, TransactionDB

TID_DTYPE = np.int32


def as_tidset(tids) -> np.ndarray:
    arr = np.asarray(tids, dtype=TID_DTYPE)
    if arr.ndim != 1:
        raise ValueError("a tidset is one-dimensional")
    return arr


def is_tidset(arr: np.ndarray) -> bool:
    return arr.ndim == 1 and (arr.size < 2 or bool(np.all(arr[1:] > arr[:-1])))


def merge_intersect(a, b) -> list[int]:
    """Linear two-pointer intersection of ascending sequences."""
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            out.append(int(x))
            i += 1
            j += 1
    return out


def intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Intersection of two ascending tidsets, result ascending.

    Probes the shorter array into the longer one by binary search, which
    beats a linear merge whenever the sizes are lopsided.
    """
    if a.size > b.size:
        a, b = b, a
    if a.size == 0:
        return a[:0]
    pos = np.searchsorted(b, a)
    pos[pos == b.size] = b.size - 1
    return a[b[pos] == a]


def support(tids: np.ndarray) -> int:
    return int(tids.size)


@dataclass(frozen=True)
class VerticalDB:
    tidsets: dict[int, np.ndarray]
    item_order: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.item_order)

    def tidset(self, item: int) -> np.ndarray:
        return self.tidsets[item]

    def ordered(self) -> list[tuple[int, np.ndarray]]:
        return [(i, self.tidsets[i]) for i in self.item_order]


def tidsets_from_rows(rows, first_tid: int = 1, keep=None) -> dict[int, np.ndarray]:
    """Map item -> ascending tid array for consecutive rows starting at ``first_tid``."""
    rows = list(rows)
    lengths = np.fromiter((len(t) for t in rows), dtype=np.int64, count=len(rows))
    total = int(lengths.sum())
    if total == 0:
        return {}
    items = np.fromiter((i for t in rows for i in t), dtype=np.int64, count=total)
    tids = np.repeat(np.arange(first_tid, first_tid + len(rows), dtype=TID_DTYPE), lengths)
    if keep is not None:
        mask = np.isin(items, np.fromiter(keep, dtype=np.int64))
        items, tids = items[mask], tids[mask]
    order = np.argsort(items, kind="stable")
    items, tids = items[order], tids[order]
    uniq, starts = np.unique(items, return_index=True)
    bounds = list(starts[1:]) + [items.size]
    return {int(u): tids[s:e] for u, s, e in zip(uniq, starts, bounds)}


def build_vertical(db: TransactionDB, freq: FrequentItemTable) -> VerticalDB:
    """Tidset of every frequent item; tids are 1-based transaction positions."""
    keep = freq.rank_of
    sets = tidsets_from_rows(db.transactions, 1, keep=keep.keys() if keep else ())
    return VerticalDB({i: sets[i] for i in freq.items}, tuple(freq.items))
