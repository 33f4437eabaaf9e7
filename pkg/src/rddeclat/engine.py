"""Local emulation of the RDD execution contract.

Collections are eagerly materialized lists of partitions. Per-partition work
is fanned out to a fixed-size worker pool; results are always gathered back
in partition order so the logical output never depends on scheduling.

Two pool backends exist. ``thread`` accepts any callable but shares the GIL;
``process`` forks workers and gives real CPU parallelism, at the price of
requiring picklable (module-level) functions.
"""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, Generic, Hashable, Iterable, Sequence, TypeVar

T = TypeVar("T")
U = TypeVar("U")
A = TypeVar("A")


def default_workers() -> int:
    env = os.environ.get("ECLAT_WORKERS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("ECLAT_WORKERS must be >= 1")
        return n
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


@dataclass(frozen=True)
class PartitionedCollection(Generic[T]):
    partitions: tuple[tuple[T, ...], ...]

    def __post_init__(self):
        if len(self.partitions) < 1:
            raise ValueError("a collection has at least one partition")

    @classmethod
    def of(cls, parts: Iterable[Iterable[T]]) -> "PartitionedCollection[T]":
        return cls(tuple(tuple(p) for p in parts))

    @property
    def partition_count(self) -> int:
        return len(self.partitions)

    def collect(self) -> list[T]:
        out: list[T] = []
        for p in self.partitions:
            out.extend(p)
        return out

    def sizes(self) -> list[int]:
        return [len(p) for p in self.partitions]

    def __len__(self) -> int:
        return sum(self.sizes())


class Broadcast(Generic[T]):
    """Read-only value shared with every task."""

    __slots__ = ("value",)

    def __init__(self, value: T):
        self.value = value

    def __reduce__(self):
        return (Broadcast, (self.value,))


class Accumulator(Generic[A]):
    """Mergeable aggregate; partials are produced per partition and merged at stage end.

    ``merge`` must be associative and commutative, so the final value does
    not depend on the order partials arrive in.
    """

    def __init__(self, identity: Callable[[], A], merge: Callable[[A, A], A]):
        self._identity = identity
        self._merge = merge
        self._value = identity()

    def zero(self) -> A:
        return self._identity()

    def add(self, partial_value: A) -> None:
        self._value = self._merge(self._value, partial_value)

    def merge_all(self, partials: Iterable[A]) -> A:
        acc = self._identity()
        for p in partials:
            acc = self._merge(acc, p)
        return acc

    @property
    def value(self) -> A:
        return self._value


def _apply_flat(fn, part):
    out = []
    for x in part:
        out.extend(fn(x))
    return out


def _apply_map(fn, part):
    return [fn(x) for x in part]


def _apply_filter(fn, part):
    return [x for x in part if fn(x)]


def _apply_partition(fn, part):
    return list(fn(part))


def _apply_indexed(fn, args):
    index, part = args
    return list(fn(index, part))


def _local_combine(op, part):
    acc: dict = {}
    for k, v in part:
        if k in acc:
            acc[k] = op(acc[k], v)
        else:
            acc[k] = v
    return list(acc.items())


def _owner(key: Hashable, k: int) -> int:
    # int keys map by value so placement is stable across interpreter runs
    if isinstance(key, int):
        return key % k
    return hash(key) % k


class Engine:
    """Fixed-size worker pool running per-partition stages."""

    def __init__(self, workers: int | None = None, backend: str = "thread"):
        self.workers = default_workers() if workers is None else int(workers)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if backend not in ("thread", "process"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self._pool: Executor | None = None

    def __enter__(self) -> "Engine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True, cancel_futures=True)
            self._pool = None

    @property
    def default_parallelism(self) -> int:
        return self.workers

    def _executor(self) -> Executor:
        if self._pool is None:
            if self.backend == "process":
                ctx = multiprocessing.get_context("fork")
                self._pool = ProcessPoolExecutor(self.workers, mp_context=ctx)
            else:
                self._pool = ThreadPoolExecutor(self.workers)
        return self._pool

    def run_partitions(self, task: Callable[[Any], U], items: Sequence[Any]) -> list[U]:
        """Run ``task`` on every element of ``items``; results in input order.

        On failure, the error of the lowest-index failing task is raised.
        """
        if self.workers == 1 or len(items) <= 1:
            return [task(x) for x in items]
        futures = [self._executor().submit(task, x) for x in items]
        results = []
        first_error = None
        for f in futures:
            exc = f.exception()
            if exc is not None:
                if first_error is None:
                    first_error = exc
                results.append(None)
            else:
                results.append(f.result())
        if first_error is not None:
            raise first_error
        return results

    # -- constructors -------------------------------------------------

    def parallelize(self, data: Iterable[T], k: int | None = None) -> PartitionedCollection[T]:
        return repartition(PartitionedCollection.of([list(data)]), k or 1)

    # -- narrow transforms --------------------------------------------

    def map_partitions(self, coll: PartitionedCollection, fn) -> PartitionedCollection:
        return PartitionedCollection.of(self.run_partitions(partial(_apply_partition, fn), coll.partitions))

    def map_partitions_with_index(self, coll: PartitionedCollection, fn) -> PartitionedCollection:
        args = list(enumerate(coll.partitions))
        return PartitionedCollection.of(self.run_partitions(partial(_apply_indexed, fn), args))

    def flat_map(self, coll: PartitionedCollection, fn) -> PartitionedCollection:
        return PartitionedCollection.of(self.run_partitions(partial(_apply_flat, fn), coll.partitions))

    def map(self, coll: PartitionedCollection, fn) -> PartitionedCollection:
        return PartitionedCollection.of(self.run_partitions(partial(_apply_map, fn), coll.partitions))

    def filter(self, coll: PartitionedCollection, fn) -> PartitionedCollection:
        return PartitionedCollection.of(self.run_partitions(partial(_apply_filter, fn), coll.partitions))

    # -- shuffles -----------------------------------------------------

    def group_by_key(self, coll: PartitionedCollection, num_partitions: int | None = None) -> PartitionedCollection:
        """One (key, [values]) per key; values keep logical input order."""
        k = num_partitions or coll.partition_count
        buckets: list[dict] = [{} for _ in range(k)]
        for part in coll.partitions:
            for key, v in part:
                bucket = buckets[_owner(key, k)]
                if key in bucket:
                    bucket[key].append(v)
                else:
                    bucket[key] = [v]
        return PartitionedCollection.of([list(b.items()) for b in buckets])

    def reduce_by_key(self, coll: PartitionedCollection, op, num_partitions: int | None = None) -> PartitionedCollection:
        # map-side combine runs in the pool, the merge of combiners is the shuffle
        k = num_partitions or coll.partition_count
        combined = self.run_partitions(partial(_local_combine, op), coll.partitions)
        buckets: list[dict] = [{} for _ in range(k)]
        for part in combined:
            for key, v in part:
                bucket = buckets[_owner(key, k)]
                bucket[key] = op(bucket[key], v) if key in bucket else v
        return PartitionedCollection.of([list(b.items()) for b in buckets])

    # -- actions ------------------------------------------------------

    def aggregate(self, coll: PartitionedCollection, seq_fn, acc: Accumulator[A]) -> A:
        """Compute one partial per partition with ``seq_fn`` and fold them into ``acc``."""
        for p in self.run_partitions(seq_fn, coll.partitions):
            acc.add(p)
        return acc.value

    def broadcast(self, value: T) -> Broadcast[T]:
        return Broadcast(value)


def repartition(coll: PartitionedCollection[T], k: int) -> PartitionedCollection[T]:
    """Deal the logical sequence round-robin into ``k`` partitions."""
    if k < 1:
        raise ValueError("partition count must be >= 1")
    flat = coll.collect()
    return PartitionedCollection.of([flat[i::k] for i in range(k)])


def coalesce_to_one(coll: PartitionedCollection[T]) -> PartitionedCollection[T]:
    if coll.partition_count == 1:
        return coll
    return PartitionedCollection.of([coll.collect()])


def partition_by(items: Sequence[T], assign: Callable[[T], int], k: int) -> PartitionedCollection[T]:
    parts: list[list[T]] = [[] for _ in range(k)]
    for x in items:
        pid = assign(x)
        if not 0 <= pid < k:
            raise ValueError(f"partition id {pid} outside [0, {k})")
        parts[pid].append(x)
    return PartitionedCollection.of(parts)
