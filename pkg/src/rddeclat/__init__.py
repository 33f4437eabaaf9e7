"""Parallel Eclat frequent-itemset mining over a local partitioned dataflow engine."""

from .dataset import (
    FrequentItemTable,
    TransactionDB,
    count_items,
    filter_transactions,
    generate_synthetic,
    load_fimi,
    write_fimi,
)
from .miner import MiningConfig, MiningResult, apriori_baseline, mine, oracle

__all__ = [
    "FrequentItemTable",
    "MiningConfig",
    "MiningResult",
    "TransactionDB",
    "apriori_baseline",
    "count_items",
    "filter_transactions",
    "generate_synthetic",
    "load_fimi",
    "mine",
    "oracle",
    "write_fimi",
]

__version__ = "0.1.0"
