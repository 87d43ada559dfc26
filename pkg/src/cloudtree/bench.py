"""Datasets and the insert/query/delete measurement protocol.

Time is accounted per remote request (``requests x rtt``) so results are
deterministic for a fixed seed; wall-clock time is recorded alongside but is
never the primary number unless the backend is a real network store.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import random
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

from .cache import CacheConfig
from .session import CloudTree, open_tree
from .store.base import KVStore
from .store.memory import FileStore, MemoryStore
from .store.types import REQUEST_KINDS, StoreConfig

log = logging.getLogger(__name__)

PHASES = ("insert", "query", "delete")
CSV_COLUMNS = (
    "phase", "dataset", "size", "flags", "mean_ms", "median_ms",
    "requests_get", "requests_batch_get", "requests_put", "requests_update",
    "requests_delete", "requests_batch_write", "items_read", "items_written", "speedup",
)

# published reference factors, printed next to measured speedups
REFERENCE_SPEEDUP = {"prefix": 3.49, "bst": 5.5}


# -- datasets ------------------------------------------------------------------


def gen_balanced_order(count: int) -> list[int]:
    """Permutation of ``0..count-1`` whose in-order insertion gives a
    height-minimal BST: the median first, then the left half, then the right."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[int] = []
    stack = [(0, count)]
    while stack:
        lo, hi = stack.pop()
        if lo >= hi:
            continue
        mid = (lo + hi) // 2
        out.append(mid)
        stack.append((mid + 1, hi))
        stack.append((lo, mid))
    return out


def gen_random_order(count: int, seed: int) -> list[int]:
    values = list(range(count))
    random.Random(seed).shuffle(values)
    return values


_PRINTABLE = {chr(c) for c in range(0x20, 0x7F)}


def split_text(text: str, string_len: int) -> list[str]:
    if string_len < 1:
        raise ValueError("string_len must be >= 1")
    text = "".join(ch if ch in _PRINTABLE else "_" for ch in text)
    return [text[i:i + string_len] for i in range(0, len(text) - string_len + 1, string_len)]


def split_corpus(path: str | os.PathLike, string_len: int) -> list[str]:
    """Cut a text file into consecutive ``string_len``-character strings.

    The trailing partial chunk is dropped and characters outside printable
    ASCII become ``_``.
    """
    if string_len not in (8, 16, 32):
        log.warning("unusual string length %d (expected 8, 16 or 32)", string_len)
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8", errors="replace")
    return split_text(text, string_len)


_ONSETS = ["", "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "w",
           "th", "st", "ch", "sh", "pr", "tr", "gr", "bl"]
_VOWELS = ["a", "e", "i", "o", "u", "ea", "ou", "ai", "ee", "y"]
_CODAS = ["", "", "n", "r", "s", "t", "d", "l", "ng", "ck", "st", "m"]


def gen_corpus(n_bytes: int, seed: int = 0, vocabulary: int = 3000) -> str:
    """Seeded English-looking printable-ASCII text of exactly ``n_bytes`` chars.

    Words are drawn from a pseudo-word vocabulary with Zipf-like frequencies,
    so strings cut from it share prefixes roughly like natural text does.
    """
    rng = random.Random(seed)
    words = set()
    while len(words) < vocabulary:
        syllables = rng.choice((1, 1, 2, 2, 2, 3, 3, 4))
        words.add("".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) + rng.choice(_CODAS)
                          for _ in range(syllables)))
    ordered = sorted(words)
    rng.shuffle(ordered)
    weights = [1.0 / (rank + 1) for rank in range(len(ordered))]
    parts: list[str] = []
    size = 0
    while size < n_bytes:
        chunk = rng.choices(ordered, weights, k=64)
        for i, word in enumerate(chunk):
            if i and rng.random() < 0.08:
                word = word.capitalize()
            sep = rng.choices((" ", ", ", ". ", "\n"), (0.85, 0.07, 0.06, 0.02))[0]
            parts.append(word + sep)
            size += len(word) + len(sep)
    return "".join(parts)[:n_bytes]


# -- workload ------------------------------------------------------------------


@dataclass
class WorkloadSpec:
    tree: str = "prefix"  # "prefix" | "bst"
    size: int = 1000
    string_len: int = 8
    corpus: str | None = None  # None -> synthetic corpus from ``seed``
    order: str = "balanced"  # bst only: "balanced" | "random"
    seed: int = 0
    phases: tuple[str, ...] = PHASES
    samples: int = 200
    cache: CacheConfig = field(default_factory=CacheConfig)
    rtt: float = 0.020
    batch_limit: int = 25
    backend: str = "memory"  # "memory" | "file:<path>" | "tcp:<host:port>"

    def __post_init__(self) -> None:
        if self.tree not in ("prefix", "bst"):
            raise ValueError(f"unknown tree kind {self.tree!r}")
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if self.order not in ("balanced", "random"):
            raise ValueError(f"unknown order {self.order!r}")
        bad = set(self.phases) - set(PHASES)
        if bad or not self.phases:
            raise ValueError(f"phases must be a non-empty subset of {PHASES}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    @property
    def dataset_name(self) -> str:
        if self.tree == "bst":
            return f"{self.order}-int"
        source = Path(self.corpus).name if self.corpus else "synthetic"
        return f"{source}-len{self.string_len}"

    def dataset(self) -> list[Any]:
        if self.tree == "bst":
            if self.order == "balanced":
                return gen_balanced_order(self.size)
            return gen_random_order(self.size, self.seed)
        if self.corpus:
            strings = split_corpus(self.corpus, self.string_len)
        else:
            strings = split_text(gen_corpus(self.size * self.string_len, self.seed), self.string_len)
        if len(strings) < self.size:
            log.warning("corpus yields only %d strings (asked for %d)", len(strings), self.size)
        return strings[:self.size]


@dataclass
class PhaseResult:
    phase: str
    dataset: str
    size: int
    flags: str
    ops: int
    mean_ms: float
    median_ms: float
    requests: dict[str, int]
    items_read: int
    items_written: int
    wall_mean_ms: float
    speedup: float | None = None

    @property
    def total_requests(self) -> int:
        return sum(self.requests.values())

    @property
    def mean_requests(self) -> float:
        return self.total_requests / self.ops if self.ops else 0.0


@dataclass
class BenchReport:
    spec: WorkloadSpec
    phases: list[PhaseResult] = field(default_factory=list)
    baseline: list[PhaseResult] = field(default_factory=list)  # unoptimized half of a paired run

    def phase(self, name: str, baseline: bool = False) -> PhaseResult:
        for result in (self.baseline if baseline else self.phases):
            if result.phase == name:
                return result
        raise KeyError(name)

    @property
    def speedup(self) -> float | None:
        """Mean of the per-phase speedups of a paired run."""
        factors = [p.speedup for p in self.phases if p.speedup is not None]
        return statistics.fmean(factors) if factors else None

    @property
    def total_speedup(self) -> float | None:
        """Ratio of summed simulated time over all operations."""
        if not self.baseline:
            return None
        base = sum(p.mean_ms * p.ops for p in self.baseline)
        opt = sum(p.mean_ms * p.ops for p in self.phases)
        return base / opt if opt else None


def make_backend(backend: str, batch_limit: int = 25) -> KVStore:
    config = StoreConfig(batch_limit=batch_limit)
    if backend == "memory":
        return MemoryStore(config)
    if backend.startswith("file:"):
        return FileStore(backend[5:], config)
    if backend.startswith("tcp:"):
        from .netkv.client import RemoteStore

        return RemoteStore(backend[4:], batch_limit=batch_limit)
    raise ValueError(f"unknown backend {backend!r}")


def _sample(rng: random.Random, population: Sequence[Any], k: int) -> list[Any]:
    return rng.sample(list(population), min(k, len(population)))


def run_workload(spec: WorkloadSpec, store: KVStore | None = None) -> list[PhaseResult]:
    """Build a tree from the dataset and run the requested phases on it.

    Query and delete each pick ``spec.samples`` distinct members of the tree
    with a seeded RNG; request counters are reset between phases, the cache is
    not.
    """
    own_store = store is None
    store = store if store is not None else make_backend(spec.backend, spec.batch_limit)
    simulated = not spec.backend.startswith("tcp:")
    data = spec.dataset()
    name = f"bench-{spec.tree}-{spec.cache.flags.replace('+', '-')}-{spec.seed}"
    if name in store.list_tables():
        store.delete_table(name)
    tree = open_tree(name, spec.tree, True, store=store, cache=spec.cache, rtt=spec.rtt)
    rng = random.Random(spec.seed ^ 0x5EED)
    members = sorted(set(data))
    results = []
    try:
        for phase in PHASES:
            if phase not in spec.phases and phase != "insert":
                continue
            if phase == "insert":
                ops = data
                fn = tree.insert
            elif phase == "query":
                ops = _sample(rng, members, spec.samples)
                fn = tree.query
            else:
                ops = _sample(rng, members, spec.samples)
                fn = tree.delete
            result = _measure(tree, fn, ops, phase, spec, simulated)
            if phase == "delete":
                gone = set(ops)
                members = [m for m in members if m not in gone]
            if phase in spec.phases:
                results.append(result)
    finally:
        tree.close()
        if own_store:
            store.close()
    return results


def _measure(tree: CloudTree, fn, ops: Sequence[Any], phase: str, spec: WorkloadSpec,
             simulated: bool) -> PhaseResult:
    metrics = tree.metrics
    metrics.reset()
    sim_ms: list[float] = []
    wall_ms: list[float] = []
    for arg in ops:
        before = metrics.simulated_elapsed
        t0 = time.perf_counter()
        fn(arg)
        wall_ms.append((time.perf_counter() - t0) * 1000.0)
        sim_ms.append((metrics.simulated_elapsed - before) * 1000.0)
    times = sim_ms if simulated else wall_ms
    snap = metrics.snapshot()
    return PhaseResult(
        phase=phase,
        dataset=spec.dataset_name,
        size=spec.size,
        flags=spec.cache.flags,
        ops=len(ops),
        mean_ms=statistics.fmean(times) if times else 0.0,
        median_ms=statistics.median(times) if times else 0.0,
        requests={kind: snap[kind] for kind in REQUEST_KINDS},
        items_read=snap["items_read"],
        items_written=snap["items_written"],
        wall_mean_ms=statistics.fmean(wall_ms) if wall_ms else 0.0,
    )


def run_bench(spec: WorkloadSpec, paired: bool = False) -> BenchReport:
    """Run ``spec``; with ``paired`` also run it with every optimization off
    on the same dataset and seed, and fill in per-phase speedups."""
    report = BenchReport(spec)
    if paired:
        base_spec = replace(spec, cache=CacheConfig.unoptimized())
        report.baseline = run_workload(base_spec)
    report.phases = run_workload(spec)
    if paired:
        for base, opt in zip(report.baseline, report.phases):
            opt.speedup = base.mean_ms / opt.mean_ms if opt.mean_ms else float("inf")
    return report


# -- output ----------------------------------------------------------------------


def _row(p: PhaseResult) -> list[str]:
    return [
        p.phase, p.dataset, str(p.size), p.flags, f"{p.mean_ms:.3f}", f"{p.median_ms:.3f}",
        *(str(p.requests[k]) for k in ("get", "batch_get", "put", "update", "delete", "batch_write")),
        str(p.items_read), str(p.items_written),
        "" if p.speedup is None else f"{p.speedup:.3f}",
    ]


def emit_report(report: BenchReport, fmt: str = "csv") -> bytes:
    rows = [_row(p) for p in report.baseline + report.phases]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
        return buf.getvalue().encode("utf-8")
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    header = ["phase", "flags", "ops", "mean_ms", "median_ms", "req/op", "wall_ms", "speedup"]
    body = [[p.phase, p.flags, str(p.ops), f"{p.mean_ms:.2f}", f"{p.median_ms:.2f}",
             f"{p.mean_requests:.2f}", f"{p.wall_mean_ms:.3f}",
             "" if p.speedup is None else f"{p.speedup:.2f}x"]
            for p in report.baseline + report.phases]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = [f"dataset {report.spec.dataset_name}, size {report.spec.size}, "
             f"rtt {report.spec.rtt * 1000:g} ms"]
    for r in [header, *body]:
        lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    if report.speedup is not None:
        lines.append(f"mean speedup {report.speedup:.2f}x (all operations: {report.total_speedup:.2f}x; "
                     f"reference {REFERENCE_SPEEDUP[report.spec.tree]}x)")
    return ("\n".join(lines) + "\n").encode("utf-8")
