"""Benchmark driver: single runs, min-support sweeps, dataset scaling, synthesis."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import DatasetError, TransactionDB, generate_synthetic, load_fimi, write_fimi
from .engine import default_workers
from .miner import VARIANTS, MiningConfig, MiningResult, mine

log = logging.getLogger("rddeclat")

CSV_HEADER = [
    "dataset", "variant", "min_support", "p", "tri_matrix", "workers", "num_frequent",
    "total_ms", "phase1_ms", "phase2_ms", "phase3_ms", "phase4_ms", "balance_cv",
]

EXIT_OK, EXIT_CONFIG, EXIT_DATASET, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunReport:
    rows: list[dict] = field(default_factory=list)

    def add(self, dataset: str, support_label, result: MiningResult) -> dict:
        cfg = result.config
        t = result.phase_timings
        row = {
            "dataset": dataset,
            "variant": cfg.variant,
            "min_support": support_label,
            "p": cfg.p,
            "tri_matrix": cfg.tri_matrix_mode,
            "workers": result.workers,
            "num_frequent": len(result),
            "total_ms": f"{result.total_ms:.3f}",
            "phase1_ms": f"{t.get('phase1', 0.0):.3f}",
            "phase2_ms": f"{t.get('phase2', 0.0):.3f}",
            "phase3_ms": f"{t.get('phase3', 0.0):.3f}",
            "phase4_ms": f"{t.get('phase4', 0.0):.3f}",
            "balance_cv": "" if result.balance_cv is None else f"{result.balance_cv:.6f}",
        }
        self.rows.append(row)
        return row

    def append_csv(self, path) -> None:
        path = Path(path)
        fresh = not path.exists() or path.stat().st_size == 0
        with path.open("a", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_HEADER)
            if fresh:
                w.writeheader()
            w.writerows(self.rows)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def _variants(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in VARIANTS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {bad}; choose from {', '.join(VARIANTS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rddeclat", description=__doc__)
    ap.add_argument("--input", metavar="PATH", help="FIMI transaction file")
    ap.add_argument("--algorithm", type=_variants, default=["v4"],
                    help="apriori|v1|v2|v3|v4|v5|oracle, comma-separated for sweeps")
    sup = ap.add_mutually_exclusive_group()
    sup.add_argument("--min-sup", type=float, help="relative minimum support in (0, 1]")
    sup.add_argument("--min-count", type=int, help="absolute minimum support count")
    sup.add_argument("--sweep-min-sup", type=_float_list, metavar="LIST",
                     help="comma-separated relative supports, one run each")
    ap.add_argument("--partitions", type=int, default=10, help="p for v4/v5 (default 10)")
    ap.add_argument("--tri-matrix", choices=["auto", "on", "off"], default="auto")
    ap.add_argument("--workers", type=int, help="worker pool size (env ECLAT_WORKERS, else CPU count)")
    ap.add_argument("--backend", choices=["process", "thread"], default="process")
    ap.add_argument("--reverse-mode", choices=["stated", "boustrophedon"], default="stated")
    ap.add_argument("--max-oracle-len", type=int)
    ap.add_argument("--output", metavar="PATH", help="frequent itemsets (or generated dataset)")
    ap.add_argument("--stats", metavar="PATH", help="CSV file that receives one row per run")
    ap.add_argument("--scale-factors", type=_int_list, metavar="LIST",
                    help="replicate the input k times for each k and rerun")
    ap.add_argument("--warmup", type=int, default=0, help="untimed repetitions before each run")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--generate", metavar="T,I,D,N",
                    help="write a synthetic dataset (avg width T, pattern length I, "
                         "D transactions, N items) to --output and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _run_name(output: Path, variant: str, support, many: bool) -> Path:
    if not many:
        return output
    return output.with_name(f"{output.stem}.{variant}-{support}{output.suffix or '.txt'}")


def _configs(args) -> list[tuple[object, MiningConfig]]:
    workers = args.workers
    if workers is None:
        try:
            workers = default_workers()
        except ValueError as exc:
            raise ConfigError(f"bad ECLAT_WORKERS: {exc}") from None
    if args.sweep_min_sup:
        supports = [("rel", s) for s in args.sweep_min_sup]
    elif args.min_sup is not None:
        supports = [("rel", args.min_sup)]
    elif args.min_count is not None:
        supports = [("abs", args.min_count)]
    else:
        raise ConfigError("one of --min-sup, --min-count or --sweep-min-sup is required")
    out = []
    for kind, s in supports:
        for variant in args.algorithm:
            try:
                cfg = MiningConfig(
                    variant,
                    min_support=s if kind == "rel" else None,
                    min_count=s if kind == "abs" else None,
                    p=args.partitions,
                    tri_matrix_mode=args.tri_matrix,
                    workers=workers,
                    max_oracle_len=args.max_oracle_len,
                    backend=args.backend,
                    reverse_mode=args.reverse_mode,
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            out.append((s, cfg))
    return out


def _timed(db: TransactionDB, cfg: MiningConfig, warmup: int) -> MiningResult:
    for _ in range(warmup):
        mine(db, cfg)
    return mine(db, cfg)


def run_scaling_suite(db: TransactionDB, name: str, configs, factors, warmup: int = 0) -> RunReport:
    """Rerun every config on the database replicated k times, k in ``factors``."""
    report = RunReport()
    for k in factors:
        scaled = db.replicate(k)
        for label, cfg in configs:
            res = _timed(scaled, cfg, warmup)
            report.add(f"{name}x{k}", label, res)
            log.info("x%d %s: %d itemsets in %.1f ms", k, cfg.variant, len(res), res.total_ms)
    return report


def _generate(args) -> int:
    try:
        t, i, d, n = (float(x) for x in args.generate.split(","))
    except ValueError:
        raise ConfigError("--generate expects T,I,D,N") from None
    if not args.output:
        raise ConfigError("--generate needs --output")
    try:
        db = generate_synthetic(int(d), int(n), t, i, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    write_fimi(db, args.output)
    log.info("wrote %d transactions to %s", db.num_transactions, args.output)
    return EXIT_OK


def _main(argv) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    for name in ("partitions", "warmup"):
        if getattr(args, name) < (1 if name == "partitions" else 0):
            raise ConfigError(f"--{name} out of range")
    if args.workers is not None and args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.generate:
        return _generate(args)
    if not args.input:
        raise ConfigError("--input is required")
    configs = _configs(args)
    db = load_fimi(args.input)
    name = Path(args.input).name

    if args.scale_factors:
        if any(k < 1 for k in args.scale_factors):
            raise ConfigError("scale factors must be >= 1")
        report = run_scaling_suite(db, name, configs, args.scale_factors, args.warmup)
    else:
        report = RunReport()
        many = len(configs) > 1
        for label, cfg in configs:
            res = _timed(db, cfg, args.warmup)
            report.add(name, label, res)
            if args.output:
                res.write(_run_name(Path(args.output), cfg.variant, label, many))
            log.info("%s: %d itemsets in %.1f ms", cfg.variant, len(res), res.total_ms)
    if args.stats:
        report.append_csv(args.stats)
    return EXIT_OK


def run(argv=None) -> int:
    """Entry point returning the process exit code."""
    try:
        return _main(argv)
    except ConfigError as exc:
        print(f"rddeclat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"rddeclat: dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"rddeclat: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())
