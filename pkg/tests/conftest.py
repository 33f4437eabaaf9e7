from itertools import combinations
from pathlib import Path

import pytest

from rddeclat import TransactionDB

DATA = Path(__file__).parent / "data"

D1_ROWS = [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4], [1, 2, 3, 4]]


def brute_force(rows, min_count, max_len=None):
    """Every itemset over the items present, counted by subset test. Small inputs only."""
    txs = [set(t) for t in rows]
    items = sorted(set().union(*txs)) if txs else []
    top = len(items) if max_len is None else max_len
    out = {}
    for k in range(1, top + 1):
        level = False
        for c in combinations(items, k):
            s = sum(1 for t in txs if t.issuperset(c))
            if s >= min_count:
                out[c] = s
                level = True
        if not level:
            break
    return out


@pytest.fixture
def d1():
    return TransactionDB.from_lists(D1_ROWS)


@pytest.fixture
def d1_file(tmp_path):
    p = tmp_path / "d1.dat"
    p.write_text("1 2 3\n1 2 4\n1 3 4\n2 3 4\n1 2 3 4\n")
    return p


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
