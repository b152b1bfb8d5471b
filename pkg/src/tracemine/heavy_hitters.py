"""Frequent-items summary over the sampled trace stream and two-pass mining.

The summary is the classic k-counter scheme: a hit increments, a miss either
takes a free slot or decrements every counter (evicting those that reach
zero). Any item occurring more than ``n / (k + 1)`` times in a stream of
length ``n`` survives. A second pass over the sample (regenerated from the
same seed, or freshly drawn) replaces the surviving counters by exact counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable

import numpy as np

from .counting import PathCountTable, count_traces, total_traces
from .dag import LabeledDag
from .errors import DomainError
from .hashing import DEFAULT_HASHER, MERSENNE_61, TraceHasher, format_hash
from .sampling import SEED_MASK, TraceSampler, choose_p

MODES = ("same-seed", "fresh")
FRESH_EXTRA_C = 2.0


class CounterSet:
    """At most ``k`` (item, counter) pairs; counters are always net values."""

    __slots__ = ("k", "entries", "n", "peak_entries")

    def __init__(self, k: int):
        if k < 1:
            raise DomainError(f"summary capacity must be >= 1, got {k}")
        self.k = k
        self.entries: dict[Hashable, int] = {}
        self.n = 0
        self.peak_entries = 0

    def process(self, item: Hashable) -> None:
        self.n += 1
        entries = self.entries
        if item in entries:
            entries[item] += 1
        elif len(entries) < self.k:
            entries[item] = 1
            if len(entries) > self.peak_entries:
                self.peak_entries = len(entries)
        else:
            for key in list(entries):
                c = entries[key] - 1
                if c:
                    entries[key] = c
                else:
                    del entries[key]

    def update(self, items: Iterable[Hashable]) -> "CounterSet":
        for item in items:
            self.process(item)
        return self

    def candidates(self) -> list:
        return list(self.entries)

    def __contains__(self, item):
        return item in self.entries

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"CounterSet(k={self.k}, n={self.n}, entries={self.entries!r})"


def mg_new(k: int) -> CounterSet:
    return CounterSet(k)


def mg_process(cs: CounterSet, item: Hashable) -> None:
    cs.process(item)


def mg_candidates(cs: CounterSet) -> list:
    return cs.candidates()


def summary_capacity(epsilon: float) -> int:
    """``ceil(2 / epsilon)`` entries, which equals ``2 p |S_m| / C`` for an
    unclamped p and still covers the ``epsilon |S_m| / 2`` threshold when p = 1."""
    k = 2.0 / epsilon
    return max(1, math.ceil(k - 1e-9 * k))


@dataclass
class ReportEntry:
    trace: tuple
    hash: int
    sample_count: int
    est_frequency: float


@dataclass
class CandidateReport:
    entries: list[ReportEntry]
    sample_size: int
    threshold: float
    metadata: dict = field(default_factory=dict)

    def traces(self) -> list[tuple]:
        return [e.trace for e in self.entries]

    def as_dict(self) -> dict[tuple, int]:
        return {e.trace: e.sample_count for e in self.entries}

    def to_tsv(self, dag: LabeledDag | None = None, hashed: bool = False) -> str:
        lines = ["trace\tsample_count\test_relative_frequency"]
        for e in self.entries:
            if hashed:
                key = format_hash(e.hash)
            elif dag is not None:
                key = dag.format_trace(e.trace)
            else:
                key = "-".join(str(x) for x in e.trace)
            lines.append(f"{key}\t{e.sample_count}\t{e.est_frequency:.6g}")
        return "\n".join(lines) + "\n"


def report_threshold(epsilon: float, C: float, total: int) -> float:
    """Minimum verification count: ``C / 2``, or ``epsilon |S_m| / 2`` when the
    whole of ``S_m`` is sampled (p clamped to 1)."""
    return min(C, epsilon * total) / 2


def derive_fresh_seed(seed: int) -> int:
    ss = np.random.SeedSequence([seed & SEED_MASK, 0xF2E5])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class _Digest:
    """Order-sensitive fingerprint of an emitted hash stream."""

    __slots__ = ("value", "count")

    def __init__(self):
        self.value = 0
        self.count = 0

    def add(self, h):
        self.value = (self.value * 1_000_003 + h + 1) % MERSENNE_61
        self.count += 1


def _pass_one(sampler: TraceSampler, seed: int, k: int, workers: int):
    cs = CounterSet(k)
    digest = _Digest()
    process = cs.process

    def emit(h, stack):
        digest.add(h)
        process(h)

    stats = sampler.run(seed, emit, workers=workers)
    return cs, digest, stats


def second_pass_verify(
    dag: LabeledDag,
    table: PathCountTable,
    cfg: dict,
    candidates: Iterable[int],
    mode: str = "same-seed",
    *,
    sampler: TraceSampler | None = None,
    workers: int = 1,
    hasher: TraceHasher = DEFAULT_HASHER,
) -> CandidateReport:
    """Count candidate hashes exactly in a second sample and keep those with
    at least ``C / 2`` occurrences (see :func:`report_threshold`).

    ``cfg`` carries ``epsilon``, ``C``, ``m``, ``seed`` and optionally
    ``fresh_extra_c`` and ``law``. In ``same-seed`` mode the pass-one sample is
    regenerated bit for bit; in ``fresh`` mode an independent sample is drawn
    with ``C`` raised by ``fresh_extra_c``.
    """
    if mode not in MODES:
        raise DomainError(f"unknown verification mode {mode!r}")
    total = total_traces(table, cfg["m"])
    C = cfg["C"]
    if mode == "same-seed":
        seed = cfg["seed"]
        c_used = C
    else:
        seed = derive_fresh_seed(cfg["seed"])
        c_used = C + cfg.get("fresh_extra_c", FRESH_EXTRA_C)
    p = choose_p(cfg["epsilon"], c_used, total)
    if sampler is None or sampler.p != p:
        sampler = TraceSampler(dag, table, p, m=cfg["m"], law=cfg.get("law", "exact"), hasher=hasher)

    counts = {h: 0 for h in candidates}
    traces: dict[int, tuple] = {}
    digest = _Digest()
    n = [0]

    def emit(h, stack):
        digest.add(h)
        n[0] += 1
        if h in counts:
            counts[h] += 1
            if h not in traces:
                traces[h] = tuple(stack)

    sampler.run(seed, emit, workers=workers)
    scale = p * total
    threshold = report_threshold(cfg["epsilon"], C, total)
    keep = [
        ReportEntry(traces[h], h, x, x / scale)
        for h, x in counts.items()
        if x >= threshold
    ]
    keep.sort(key=lambda e: (-e.sample_count, e.trace))
    meta = {
        "mode": mode,
        "seed": seed,
        "p": p,
        "C_used": c_used,
        "sample_size": n[0],
        "stream_digest": f"{digest.value:016x}",
        "candidates": len(counts),
    }
    return CandidateReport(keep, n[0], threshold, meta)


def mine_frequent(
    dag: LabeledDag,
    m: int,
    epsilon: float,
    C: float = 10.0,
    seed: int = 0,
    mode: str = "same-seed",
    *,
    table: PathCountTable | None = None,
    fresh_extra_c: float = FRESH_EXTRA_C,
    law: str = "exact",
    workers: int = 1,
    hasher: TraceHasher = DEFAULT_HASHER,
) -> CandidateReport:
    """Report traces whose relative frequency in ``S_m`` is likely >= epsilon.

    Pipeline: path counts, inclusion probability ``p = C / (epsilon |S_m|)``,
    first sample streamed through a ``ceil(2/epsilon)``-entry summary, then an
    exact recount of the survivors. Every reported trace has at least ``C/2``
    occurrences in the verification sample; its ``est_frequency`` is
    ``X_t / (p |S_m|)``.
    """
    if mode not in MODES:
        raise DomainError(f"unknown verification mode {mode!r}")
    if table is None:
        table = count_traces(dag, m)
    total = total_traces(table, m)
    meta = {"epsilon": epsilon, "C": C, "m": m, "seed": seed, "mode": mode, "total_traces": total,
            "hash_base": f"{hasher.base:#x}", "law": law}
    if total == 0:
        choose_p(epsilon, C, 1)  # validate parameters even on an empty graph
        return CandidateReport([], 0, C / 2, {**meta, "p": 0.0, "sample_size": 0, "summary_capacity": 0})

    p = choose_p(epsilon, C, total)
    k = summary_capacity(epsilon)
    sampler = TraceSampler(dag, table, p, m=m, law=law, hasher=hasher)
    cs, digest, stats = _pass_one(sampler, seed, k, workers)

    cfg = {"epsilon": epsilon, "C": C, "m": m, "seed": seed, "fresh_extra_c": fresh_extra_c, "law": law}
    report = second_pass_verify(dag, table, cfg, cs.candidates(), mode, sampler=sampler, workers=workers, hasher=hasher)
    if mode == "same-seed" and report.metadata["stream_digest"] != f"{digest.value:016x}":
        raise RuntimeError("same-seed regeneration produced a different sample stream")
    report.metadata = {
        **meta,
        "p": p,
        "summary_capacity": k,
        "summary_peak_entries": cs.peak_entries,
        "pass1_sample_size": stats.emitted,
        "pass1_digest": f"{digest.value:016x}",
        "empty_invocations": stats.empty_invocations,
        **{f"verify_{key}": v for key, v in report.metadata.items()},
    }
    report.metadata["sample_size"] = report.sample_size
    return report
