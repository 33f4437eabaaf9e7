"""Horizontal transaction databases: FIMI I/O, item counting, filtering, synthesis."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Transaction = tuple[int, ...]


class DatasetError(ValueError):
    """Raised for unreadable or malformed transaction files."""


@dataclass(frozen=True)
class TransactionDB:
    transactions: tuple[Transaction, ...]
    item_universe_max: int = -1

    @classmethod
    def from_lists(cls, rows: Iterable[Iterable[int]]) -> "TransactionDB":
        txs = []
        top = -1
        for row in rows:
            t = tuple(sorted(set(int(i) for i in row)))
            if t and t[0] < 0:
                raise DatasetError(f"negative item id {t[0]}")
            if t:
                top = max(top, t[-1])
            txs.append(t)
        return cls(tuple(txs), top)

    @property
    def num_transactions(self) -> int:
        return len(self.transactions)

    def __len__(self) -> int:
        return len(self.transactions)

    def __iter__(self):
        return iter(self.transactions)

    def replicate(self, k: int) -> "TransactionDB":
        """Concatenate the database with itself ``k`` times."""
        if k < 1:
            raise ValueError("replication factor must be >= 1")
        return TransactionDB(self.transactions * k, self.item_universe_max)


@dataclass(frozen=True)
class FrequentItemTable:
    """Frequent items with supports, ordered by ascending support then item id."""

    entries: tuple[tuple[int, int], ...]
    min_count: int
    rank_of: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rank_of", {item: r for r, (item, _) in enumerate(self.entries)})

    @classmethod
    def from_counts(cls, counts: dict[int, int], min_count: int) -> "FrequentItemTable":
        kept = [(i, c) for i, c in counts.items() if c >= min_count]
        kept.sort(key=lambda e: (e[1], e[0]))
        return cls(tuple(kept), min_count)

    @property
    def items(self) -> list[int]:
        return [i for i, _ in self.entries]

    @property
    def supports(self) -> dict[int, int]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, item) -> bool:
        return item in self.rank_of


def parse_fimi_lines(lines: Iterable[str], source: str = "<input>") -> TransactionDB:
    rows = []
    top = -1
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            items = {int(tok) for tok in tokens}
        except ValueError:
            bad = next(tok for tok in tokens if not tok.lstrip("+-").isdigit())
            raise DatasetError(f"{source}:{lineno}: non-integer token {bad!r}") from None
        t = tuple(sorted(items))
        if t[0] < 0:
            raise DatasetError(f"{source}:{lineno}: negative item id {t[0]}")
        top = max(top, t[-1])
        rows.append(t)
    return TransactionDB(tuple(rows), top)


def load_fimi(path) -> TransactionDB:
    """Read a FIMI file: one transaction per line, whitespace-separated item ids.

    Blank lines are skipped; items within a line are deduplicated and sorted.
    Transaction ids are implicit (1-based position among non-blank lines).
    """
    path = Path(path)
    try:
        with path.open("r", encoding="ascii") as fh:
            return parse_fimi_lines(fh, str(path))
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path}: not an ASCII FIMI file") from exc


def write_fimi(db: TransactionDB, path) -> None:
    with Path(path).open("w", encoding="ascii") as fh:
        for t in db.transactions:
            fh.write(" ".join(map(str, t)))
            fh.write("\n")


def count_items(db: TransactionDB, min_count: int) -> FrequentItemTable:
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    for t in db.transactions:
        counts.update(t)
    return FrequentItemTable.from_counts(counts, min_count)


def project(t: Sequence[int], keep) -> Transaction:
    return tuple(i for i in t if i in keep)


def filter_transactions(db: TransactionDB, freq: FrequentItemTable) -> TransactionDB:
    """Project every transaction onto the frequent items, dropping emptied ones."""
    keep = freq.rank_of
    out = []
    for t in db.transactions:
        ft = project(t, keep)
        if ft:
            out.append(ft)
    return TransactionDB(tuple(out), db.item_universe_max)


def generate_synthetic(
    num_transactions: int,
    num_items: int,
    avg_width: float,
    pattern_len: float,
    seed: int = 0,
    num_patterns: int | None = None,
    correlation: float = 0.5,
) -> TransactionDB:
    """IBM-Quest-flavoured generator.

    A pool of potentially frequent patterns is drawn first; pattern lengths are
    Poisson(``pattern_len``), consecutive patterns share a fraction of items
    (``correlation``) and pattern popularity is exponentially distributed.
    Each transaction has a Poisson(``avg_width``) target width and is filled
    with patterns picked by popularity until the target is reached.
    """
    for name, v in [("num_transactions", num_transactions), ("num_items", num_items),
                    ("avg_width", avg_width), ("pattern_len", pattern_len)]:
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    if avg_width > num_items:
        raise ValueError("avg_width cannot exceed num_items")

    rng = np.random.default_rng(seed)
    if num_patterns is None:
        num_patterns = max(10, min(2000, num_items))

    # item popularity skew makes some items much more frequent than others
    item_weights = rng.exponential(1.0, num_items)
    item_weights /= item_weights.sum()

    patterns: list[np.ndarray] = []
    prev = np.empty(0, dtype=np.int64)
    for _ in range(num_patterns):
        size = int(min(num_items, max(1, rng.poisson(pattern_len))))
        n_shared = min(len(prev), int(round(size * correlation * rng.random())))
        shared = rng.choice(prev, n_shared, replace=False) if n_shared else prev[:0]
        fresh = rng.choice(num_items, size, replace=False, p=item_weights)
        pat = np.unique(np.concatenate([shared, fresh]))[: max(size, 1)]
        patterns.append(pat)
        prev = pat
    pattern_weights = rng.exponential(1.0, num_patterns)
    pattern_weights /= pattern_weights.sum()

    widths = np.clip(rng.poisson(avg_width, num_transactions), 1, num_items)
    picks_per_round = 4
    rows = []
    for target in widths:
        target = int(target)
        chosen: set[int] = set()
        while len(chosen) < target:
            for pid in rng.choice(num_patterns, picks_per_round, p=pattern_weights):
                pat = patterns[pid]
                room = target - len(chosen)
                if len(pat) > room:
                    # keep a random part of an oversized pattern, as the IBM generator does
                    pat = rng.choice(pat, room, replace=False)
                chosen.update(pat.tolist())
                if len(chosen) >= target:
                    break
        rows.append(tuple(sorted(chosen)))
    top = max((t[-1] for t in rows), default=-1)
    return TransactionDB(tuple(rows), top)


def mean_width(db: TransactionDB) -> float:
    if not db.transactions:
        return math.nan
    return sum(map(len, db.transactions)) / len(db.transactions)
