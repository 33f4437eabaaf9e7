"""Eclat Bottom-Up search and the five parallel pipelines built on it.

Every pipeline emits the same set of frequent itemsets: frequent single
items come out of the item-counting phase, frequent pairs out of class
construction, and everything longer out of ``bottom_up``.
"""

from __future__ import annotations

import math
import operator
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .dataset import FrequentItemTable, TransactionDB, load_fimi
from .engine import (
    Accumulator,
    Engine,
    PartitionedCollection,
    coalesce_to_one,
    default_workers,
    partition_by,
    repartition,
)
from .equivclass import (
    EquivalenceClass,
    balance_metric,
    build_classes,
    default_partitioner,
    hash_partitioner,
    reverse_hash_partitioner,
)
from .trimatrix import count_pairs
from .vertical import VerticalDB, intersect, tidsets_from_rows

VARIANTS = ("apriori", "v1", "v2", "v3", "v4", "v5", "oracle")
ECLAT_VARIANTS = ("v1", "v2", "v3", "v4", "v5")
PHASES = ("phase1", "phase2", "phase3", "phase4")
MAX_DEPTH = 64


class MiningError(RuntimeError):
    pass


class Itemset(NamedTuple):
    items: tuple[int, ...]
    support: int


def canonical(itemsets) -> list[Itemset]:
    out = [Itemset(tuple(sorted(items)), int(sup)) for items, sup in itemsets]
    out.sort(key=lambda s: (len(s.items), s.items))
    return out


@dataclass(frozen=True)
class MiningConfig:
    variant: str = "v4"
    min_support: float | None = None
    min_count: int | None = None
    p: int = 10
    tri_matrix_mode: str = "auto"
    workers: int | None = None
    max_oracle_len: int | None = None
    backend: str = "process"
    reverse_mode: str = "stated"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {', '.join(VARIANTS)}")
        if (self.min_support is None) == (self.min_count is None):
            raise ValueError("give exactly one of min_support (relative) or min_count (absolute)")
        if self.min_support is not None and not 0 < self.min_support <= 1:
            raise ValueError(f"relative min_support must lie in (0, 1], got {self.min_support}")
        if self.min_count is not None and self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.tri_matrix_mode not in ("auto", "on", "off"):
            raise ValueError(f"tri_matrix_mode must be auto, on or off, got {self.tri_matrix_mode!r}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.max_oracle_len is not None and self.max_oracle_len < 1:
            raise ValueError("max_oracle_len must be >= 1")

    def absolute(self, num_transactions: int) -> int:
        if self.min_count is not None:
            return self.min_count
        return max(1, math.ceil(self.min_support * num_transactions - 1e-9))

    @property
    def use_matrix(self) -> bool:
        return self.tri_matrix_mode != "off"


@dataclass
class MiningResult:
    itemsets: list[Itemset]
    min_count: int
    config: MiningConfig
    workers: int
    phase_timings: dict[str, float] = field(default_factory=dict)
    total_ms: float = 0.0
    partition_balance: tuple[int, ...] | None = None
    balance_cv: float | None = None

    def __len__(self) -> int:
        return len(self.itemsets)

    def as_dict(self) -> dict[tuple[int, ...], int]:
        return {s.items: s.support for s in self.itemsets}

    def lines(self) -> list[str]:
        return [f"{' '.join(map(str, s.items))} #SUP: {s.support}" for s in self.itemsets]

    def write(self, path) -> None:
        with Path(path).open("w", encoding="ascii", newline="\n") as fh:
            for line in self.lines():
                fh.write(line + "\n")


class _PhaseClock:
    def __init__(self):
        self.timings = {p: 0.0 for p in PHASES}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] += (time.perf_counter() - t0) * 1000.0


# --------------------------------------------------------------------------
# Bottom-Up


def bottom_up(ec: EquivalenceClass, min_count: int, max_depth: int = MAX_DEPTH) -> list[Itemset]:
    """Frequent itemsets of length >= 3 rooted at this class.

    Atoms are joined pairwise in class order (i outer, j inner); each new
    atom's tidset is the intersection of its two parents, and a non-empty
    child class is searched before moving on to the next i.
    """
    out: list[tuple[tuple[int, ...], int]] = []
    _recurse((ec.prefix,), ec.atoms, min_count, out, max_depth)
    return [Itemset(tuple(sorted(items)), sup) for items, sup in out]


def _recurse(prefix, atoms, min_count, out, max_depth):
    length = len(prefix) + 2
    if length > max_depth:
        raise MiningError(f"itemset length {length} exceeds the recursion cap of {max_depth}")
    for i in range(len(atoms) - 1):
        item_i, tids_i = atoms[i]
        child = []
        for j in range(i + 1, len(atoms)):
            item_j, tids_j = atoms[j]
            tids = intersect(tids_i, tids_j)
            if tids.size >= min_count:
                assert tids.size <= min(tids_i.size, tids_j.size)
                child.append((item_j, tids))
                out.append((prefix + (item_i, item_j), int(tids.size)))
        if child:
            _recurse(prefix + (item_i,), child, min_count, out, max_depth)


class _MinePartition:
    def __init__(self, min_count):
        self.min_count = min_count

    def __call__(self, classes):
        out = []
        for ec in classes:
            if ec.atoms:
                out.extend(bottom_up(ec, self.min_count))
        return out


# --------------------------------------------------------------------------
# picklable stage functions


def _pairs_with_local_tid(index, rows):
    # single partition, so the local position is the global tid
    out = []
    for tid, t in enumerate(rows, start=1):
        for item in t:
            out.append((item, tid))
    return out


def _partition_item_counts(rows):
    # map-side combine of the (item, 1) pairs
    counts = Counter()
    for t in rows:
        counts.update(t)
    return counts.items()


class _Project:
    def __init__(self, keep):
        self.keep = keep

    def __call__(self, rows):
        keep = self.keep.value
        out = []
        for t in rows:
            ft = tuple(i for i in t if i in keep)
            if ft:
                out.append(ft)
        return out


class _PartitionTidsets:
    def __init__(self, offsets):
        self.offsets = offsets

    def __call__(self, index, rows):
        return list(tidsets_from_rows(rows, self.offsets[index] + 1).items())


def _merge_tidset_maps(a: dict, b: dict) -> dict:
    out = dict(a)
    for item, tids in b.items():
        if item in out:
            out[item] = np.union1d(out[item], tids).astype(tids.dtype)
        else:
            out[item] = tids
    return out


# --------------------------------------------------------------------------
# phases


def _frequent_items_wordcount(engine, coll, min_count, clock):
    """Parallel item word count; returns the table and the alphanumeric item list."""
    with clock.phase("phase1"):
        pairs = engine.map_partitions(coll, _partition_item_counts)
        counts = engine.reduce_by_key(pairs, operator.add).collect()
        freq_counts = {i: c for i, c in counts if c >= min_count}
        freq = FrequentItemTable.from_counts(freq_counts, min_count)
        alnum = sorted(freq_counts, key=str)
    return freq, alnum


def _filter_and_count(engine, coll, freq, cfg, clock):
    with clock.phase("phase2"):
        keep = engine.broadcast(frozenset(freq.rank_of))
        filtered = engine.map_partitions(coll, _Project(keep))
        matrix = count_pairs(filtered, freq, engine) if cfg.use_matrix and len(freq) >= 2 else None
    return filtered, matrix


def _mine_classes(engine, vdb, min_count, matrix, cfg, clock, phase):
    """Class construction, partitioning and the parallel Bottom-Up stage."""
    with clock.phase(phase):
        n = len(vdb)
        classes = build_classes(vdb, min_count, matrix)
        found = []
        for ec in classes:
            found.extend(ec.two_itemsets())
        if n < 2:
            return found, None
        if cfg.variant in ("v1", "v2", "v3"):
            assign = default_partitioner(classes, n)
        elif cfg.variant == "v4":
            assign = hash_partitioner(classes, cfg.p)
        else:
            assign = reverse_hash_partitioner(classes, cfg.p, cfg.reverse_mode)
        parts = partition_by(classes, lambda ec: assign.partition_of(ec.prefix_rank), assign.num_partitions)
        found.extend(engine.map_partitions(parts, _MinePartition(min_count)).collect())
    return found, assign


def _run_v1(engine, db, min_count, cfg, clock):
    with clock.phase("phase1"):
        single = PartitionedCollection.of([db.transactions])
        grouped = engine.group_by_key(engine.map_partitions_with_index(single, _pairs_with_local_tid))
        freq_tids = [(item, tids) for item, tids in grouped.collect() if len(tids) >= min_count]
        freq = FrequentItemTable.from_counts({i: len(t) for i, t in freq_tids}, min_count)
        vdb = VerticalDB({i: np.asarray(t, dtype=np.int32) for i, t in freq_tids}, tuple(freq.items))
    with clock.phase("phase2"):
        coll = repartition(single, engine.default_parallelism)
        matrix = count_pairs(coll, freq, engine) if cfg.use_matrix and len(freq) >= 2 else None
    singles = list(freq.entries)
    found, assign = _mine_classes(engine, vdb, min_count, matrix, cfg, clock, "phase3")
    return [((i,), c) for i, c in singles] + found, assign


def _run_v2(engine, db, min_count, cfg, clock):
    coll = repartition(PartitionedCollection.of([db.transactions]), engine.default_parallelism)
    freq, _ = _frequent_items_wordcount(engine, coll, min_count, clock)
    filtered, matrix = _filter_and_count(engine, coll, freq, cfg, clock)
    with clock.phase("phase3"):
        one = coalesce_to_one(filtered)
        grouped = engine.group_by_key(engine.map_partitions_with_index(one, _pairs_with_local_tid)).collect()
        tidsets = {i: np.asarray(t, dtype=np.int32) for i, t in grouped}
        order = sorted(tidsets, key=lambda i: (len(tidsets[i]), i))
        vdb = VerticalDB(tidsets, tuple(order))
    found, assign = _mine_classes(engine, vdb, min_count, matrix, cfg, clock, "phase4")
    return [((i,), c) for i, c in freq.entries] + found, assign


def _run_v3(engine, db, min_count, cfg, clock):
    """Shared by v3, v4 and v5; they differ only in the class partitioner."""
    coll = repartition(PartitionedCollection.of([db.transactions]), engine.default_parallelism)
    freq, alnum = _frequent_items_wordcount(engine, coll, min_count, clock)
    filtered, matrix = _filter_and_count(engine, coll, freq, cfg, clock)
    with clock.phase("phase3"):
        sizes = filtered.sizes()
        offsets = [sum(sizes[:k]) for k in range(len(sizes))]
        per_part = engine.map_partitions_with_index(filtered, _PartitionTidsets(offsets)).partitions
        acc = Accumulator(dict, _merge_tidset_maps)
        for part in per_part:
            acc.add(dict(part))
        tidsets = acc.value
        order = sorted(alnum, key=lambda i: (tidsets[i].size, i))
        vdb = VerticalDB(tidsets, tuple(order))
    found, assign = _mine_classes(engine, vdb, min_count, matrix, cfg, clock, "phase4")
    return [((i,), c) for i, c in freq.entries] + found, assign


_PIPELINES = {"v1": _run_v1, "v2": _run_v2, "v3": _run_v3, "v4": _run_v3, "v5": _run_v3}


def mine(source, cfg: MiningConfig) -> MiningResult:
    """Mine all frequent itemsets of ``source`` (a TransactionDB or FIMI path)."""
    db = source if isinstance(source, TransactionDB) else load_fimi(source)
    min_count = cfg.absolute(db.num_transactions)
    workers = cfg.workers or default_workers()
    if cfg.variant == "oracle":
        return oracle(db, min_count, cfg.max_oracle_len, cfg=cfg)
    if cfg.variant == "apriori":
        return apriori_baseline(db, min_count, cfg=cfg)

    clock = _PhaseClock()
    t0 = time.perf_counter()
    with Engine(workers, cfg.backend) as engine:
        found, assign = _PIPELINES[cfg.variant](engine, db, min_count, cfg, clock)
    total = (time.perf_counter() - t0) * 1000.0
    result = MiningResult(canonical(found), min_count, cfg, workers, clock.timings, total)
    if assign is not None:
        result.partition_balance, result.balance_cv = balance_metric(assign)
    return result


# --------------------------------------------------------------------------
# Apriori baseline


def apriori_gen(level: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Self-join frequent k-itemsets on their (k-1)-prefix, then prune by downward closure."""
    known = set(level)
    level = sorted(level)
    out = []
    for a in range(len(level)):
        x = level[a]
        for b in range(a + 1, len(level)):
            y = level[b]
            if x[:-1] != y[:-1]:
                break
            cand = x + (y[-1],)
            if all(cand[:k] + cand[k + 1:] in known for k in range(len(cand) - 2)):
                out.append(cand)
    return out


class _CountCandidates:
    def __init__(self, candidates, k):
        self.candidates = candidates
        self.k = k

    def __call__(self, rows):
        k = self.k
        cands = self.candidates.value
        counts = Counter()
        ncand = len(cands)
        for t in rows:
            if len(t) < k:
                continue
            if math.comb(len(t), k) <= ncand:
                counts.update(c for c in combinations(t, k) if c in cands)
            else:
                ts = set(t)
                counts.update(c for c in cands if ts.issuperset(c))
        return counts


def _merge_counters(a: Counter, b: Counter) -> Counter:
    a.update(b)
    return a


def apriori_baseline(db: TransactionDB, min_count: int, cfg: MiningConfig | None = None) -> MiningResult:
    """Level-wise Apriori with per-partition candidate counting."""
    cfg = cfg or MiningConfig("apriori", min_count=min_count, workers=1)
    workers = cfg.workers or default_workers()
    clock = _PhaseClock()
    t0 = time.perf_counter()
    found: list[tuple[tuple[int, ...], int]] = []
    with Engine(workers, cfg.backend) as engine:
        coll = repartition(PartitionedCollection.of([db.transactions]), engine.default_parallelism)
        freq, _ = _frequent_items_wordcount(engine, coll, min_count, clock)
        found.extend(((i,), c) for i, c in freq.entries)
        with clock.phase("phase2"):
            keep = engine.broadcast(frozenset(freq.rank_of))
            coll = engine.map_partitions(coll, _Project(keep))
        level = sorted((i,) for i in freq.items)
        k = 2
        while len(level) >= 2:
            with clock.phase("phase2" if k == 2 else "phase3"):
                cands = apriori_gen(level)
                if not cands:
                    break
                shared = engine.broadcast(frozenset(cands))
                acc = Accumulator(Counter, _merge_counters)
                counts = engine.aggregate(coll, _CountCandidates(shared, k), acc)
                level = sorted(c for c in cands if counts.get(c, 0) >= min_count)
                found.extend((c, counts[c]) for c in level)
            k += 1
    total = (time.perf_counter() - t0) * 1000.0
    return MiningResult(canonical(found), min_count, replace(cfg, variant="apriori"), workers,
                        clock.timings, total)


# --------------------------------------------------------------------------
# brute-force oracle


ORACLE_LIMIT = 2 ** 20


def oracle(db: TransactionDB, min_count: int, max_len: int | None = None,
           cfg: MiningConfig | None = None, limit: int = ORACLE_LIMIT) -> MiningResult:
    """Ground truth by depth-first extension and direct transaction scans.

    Each candidate is counted by scanning the transactions that hold its
    parent, testing membership of the new item. Extension stops at an
    infrequent candidate; nothing else is pruned. More than ``limit``
    visited candidates aborts the run.
    """
    cfg = cfg or MiningConfig("oracle", min_count=min_count, workers=1, max_oracle_len=max_len)
    t0 = time.perf_counter()
    txs = [frozenset(t) for t in db.transactions]
    items = sorted(set().union(*txs)) if txs else []
    cap = max_len if max_len is not None else len(items)
    found = []
    visited = 0

    def extend(prefix, holders, start):
        nonlocal visited
        if len(prefix) >= cap:
            return
        for idx in range(start, len(items)):
            item = items[idx]
            visited += 1
            if visited > limit:
                raise MiningError(f"oracle enumeration exceeded {limit} candidates; cap max_oracle_len")
            sub = [t for t in holders if item in t]
            if len(sub) >= min_count:
                cand = prefix + (item,)
                found.append((cand, len(sub)))
                extend(cand, sub, idx + 1)

    if min_count <= len(txs):
        extend((), txs, 0)
    total = (time.perf_counter() - t0) * 1000.0
    timings = {p: 0.0 for p in PHASES}
    timings["phase1"] = total
    return MiningResult(canonical(found), min_count, replace(cfg, variant="oracle"), 1, timings, total)
