"""Command-line entry point: benchmark runs, the TCP store server, corpus generation."""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading
from pathlib import Path

from .bench import PHASES, WorkloadSpec, emit_report, gen_corpus, run_bench
from .cache import CacheConfig
from .netkv.protocol import DEFAULT_PORT
from .netkv.server import serve
from .store.memory import FileStore, MemoryStore
from .store.types import StoreConfig


def _phases(text: str) -> tuple[str, ...]:
    phases = tuple(p.strip() for p in text.split(",") if p.strip())
    for p in phases:
        if p not in PHASES:
            raise argparse.ArgumentTypeError(f"unknown phase {p!r}")
    return phases


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cloudtree", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the insert/query/delete workload")
    b.add_argument("--tree", choices=("prefix", "bst"), default="prefix")
    b.add_argument("--backend", default="memory", help="memory | file:<path> | tcp:<host:port>")
    b.add_argument("--rtt-ms", type=float, default=20.0, help="simulated cost per remote request")
    b.add_argument("--size", type=int, default=1000)
    b.add_argument("--string-len", type=int, default=8)
    b.add_argument("--corpus", help="text file to cut strings from (default: synthetic corpus)")
    b.add_argument("--order", choices=("balanced", "random"), default="balanced")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--phases", type=_phases, default=PHASES)
    b.add_argument("--samples", type=int, default=200)
    b.add_argument("--cache-lines", type=int, default=10000)
    b.add_argument("--prefetch", type=int, default=25)
    b.add_argument("--batch-limit", type=int, default=25)
    b.add_argument("--no-cache", action="store_true")
    b.add_argument("--no-prefetch", action="store_true")
    b.add_argument("--no-aggregation", action="store_true")
    b.add_argument("--no-optimizations", action="store_true")
    b.add_argument("--paired", action="store_true", help="also run with optimizations off and report speedups")
    b.add_argument("--out", help="write the CSV report here (a table is printed either way)")

    s = sub.add_parser("serve", help="serve a key-value store over TCP")
    s.add_argument("--bind", default=f"127.0.0.1:{DEFAULT_PORT}")
    s.add_argument("--snapshot", help="snapshot file to load at start and save at exit")
    s.add_argument("--rtt-ms", type=float, default=0.0, help="artificial delay added to every response")
    s.add_argument("--batch-limit", type=int, default=25)
    s.add_argument("--token", help="shared token clients must send")

    g = sub.add_parser("gen-corpus", help="write a synthetic text corpus")
    g.add_argument("--bytes", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    return parser


def cmd_bench(args: argparse.Namespace) -> int:
    off = args.no_optimizations
    cache = CacheConfig(
        capacity_lines=args.cache_lines,
        prefetch_size=args.prefetch,
        caching_enabled=not (off or args.no_cache),
        prefetch_enabled=not (off or args.no_prefetch),
        aggregation_enabled=not (off or args.no_aggregation),
    )
    spec = WorkloadSpec(
        tree=args.tree, size=args.size, string_len=args.string_len, corpus=args.corpus,
        order=args.order, seed=args.seed, phases=args.phases, samples=args.samples,
        cache=cache, rtt=args.rtt_ms / 1000.0, batch_limit=args.batch_limit, backend=args.backend,
    )
    report = run_bench(spec, paired=args.paired)
    sys.stdout.write(emit_report(report, "table").decode())
    if args.out:
        Path(args.out).write_bytes(emit_report(report, "csv"))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = StoreConfig(batch_limit=args.batch_limit)
    store = FileStore(args.snapshot, config) if args.snapshot else MemoryStore(config)
    server = serve(args.bind, store, rtt=args.rtt_ms / 1000.0, token=args.token)
    print(f"serving on {server.address}", flush=True)
    done = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: done.set())
    done.wait()
    server.stop()
    store.sync()
    return 0


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    Path(args.out).write_text(gen_corpus(args.bytes, args.seed), encoding="ascii")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"bench": cmd_bench, "serve": cmd_serve, "gen-corpus": cmd_gen_corpus}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
