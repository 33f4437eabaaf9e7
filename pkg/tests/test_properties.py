"""Randomized invariants, 1000 hypothesis examples each."""

from itertools import combinations

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from rddeclat.dataset import TransactionDB, count_items, filter_transactions, parse_fimi_lines
from rddeclat.engine import Accumulator, PartitionedCollection, coalesce_to_one, repartition
from rddeclat.equivclass import build_classes
from rddeclat.miner import MiningConfig, bottom_up, mine
from rddeclat.trimatrix import count_pairs
from rddeclat.vertical import as_tidset, build_vertical, intersect, merge_intersect

CASES = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])

rows_st = st.lists(st.lists(st.integers(0, 11), min_size=1, max_size=7), max_size=25)
tidset_st = st.lists(st.integers(1, 300), max_size=60, unique=True).map(sorted)


@CASES
@given(a=tidset_st, b=tidset_st)
def test_intersection_anti_monotone(a, b):
    got = intersect(as_tidset(a), as_tidset(b))
    assert got.size <= min(len(a), len(b))
    assert got.tolist() == merge_intersect(a, b) == sorted(set(a) & set(b))


@CASES
@given(rows=rows_st, mc=st.integers(1, 6))
def test_downward_closure_and_support_exactness(rows, mc):
    db = TransactionDB.from_lists(rows)
    res = mine(db, MiningConfig("v4", min_count=mc, workers=1, p=3)).as_dict()
    txs = [set(t) for t in db]
    for items, sup in res.items():
        assert sup >= mc
        assert sup == sum(1 for t in txs if t.issuperset(items))
        for sub in combinations(items, len(items) - 1):
            if sub:
                assert sub in res


@CASES
@given(rows=rows_st, mc=st.integers(1, 5))
def test_tidsets_shrink_along_recursion(rows, mc):
    db = TransactionDB.from_lists(rows)
    freq = count_items(db, mc)
    v = build_vertical(db, freq)
    for ec in build_classes(v, mc):
        base = v.tidset(ec.prefix).size
        for _, tids in ec.atoms:
            assert tids.size <= base
        # every emitted superset has a support no larger than its class atoms
        atom_sup = {suffix: tids.size for suffix, tids in ec.atoms}
        for s in bottom_up(ec, mc):
            assert all(s.support <= atom_sup[i] for i in s.items if i in atom_sup)


@CASES
@given(partials=st.lists(st.lists(st.integers(0, 1000), min_size=4, max_size=4), min_size=1, max_size=12),
       seed=st.integers(0, 2**32 - 1))
def test_accumulator_merge_order_free(partials, seed):
    arrs = [np.array(p) for p in partials]
    rng = np.random.default_rng(seed)
    acc_a = Accumulator(lambda: np.zeros(4, dtype=np.int64), np.add)
    acc_b = Accumulator(lambda: np.zeros(4, dtype=np.int64), np.add)
    for a in arrs:
        acc_a.add(a)
    for k in rng.permutation(len(arrs)):
        acc_b.add(arrs[k])
    assert acc_a.value.tolist() == acc_b.value.tolist()


@CASES
@given(items=st.lists(st.integers()), k=st.integers(1, 40))
def test_repartition_deterministic_and_lossless(items, k):
    coll = PartitionedCollection.of([items])
    a, b = repartition(coll, k), repartition(coll, k)
    assert a == b
    assert a.partition_count == k
    assert sorted(a.collect()) == sorted(items)
    sizes = a.sizes()
    assert max(sizes) - min(sizes) <= 1
    assert coalesce_to_one(a).partition_count == 1


@CASES
@given(rows=rows_st, mc=st.integers(1, 6))
def test_filter_idempotent_and_support_preserving(rows, mc):
    db = TransactionDB.from_lists(rows)
    freq = count_items(db, mc)
    once = filter_transactions(db, freq)
    assert filter_transactions(once, freq) == once
    assert count_items(once, 1).supports == freq.supports


@CASES
@given(rows=rows_st)
def test_fimi_roundtrip(rows):
    db = TransactionDB.from_lists(rows)
    text = "".join(" ".join(map(str, t)) + "\n" for t in db)
    assert parse_fimi_lines(text.splitlines()) == db


@CASES
@given(rows=rows_st, mc=st.integers(1, 4))
def test_pair_counts_equal_tidset_intersections(rows, mc):
    db = TransactionDB.from_lists(rows)
    freq = count_items(db, mc)
    if len(freq) < 2:
        return
    m = count_pairs(db, freq)
    v = build_vertical(db, freq)
    for a, b in combinations(freq.items, 2):
        assert m.support(a, b) == intersect(v.tidset(a), v.tidset(b)).size


@settings(max_examples=200, deadline=None)
@given(rows=rows_st, mc=st.integers(1, 5), variant=st.sampled_from(["v1", "v2", "v3", "v4", "v5", "apriori"]))
def test_variants_agree_with_oracle(rows, mc, variant):
    db = TransactionDB.from_lists(rows)
    ref = mine(db, MiningConfig("oracle", min_count=mc)).itemsets
    assert mine(db, MiningConfig(variant, min_count=mc, workers=1)).itemsets == ref
