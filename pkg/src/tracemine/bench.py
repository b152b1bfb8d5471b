"""Sweep over (delta, m) on synthetic event data.

One row per setting with the graph size, trace totals from the count table,
exact distinct/top-100 figures from the enumeration oracle, the space ratio
``distinct / (2 / epsilon)`` and the size of one drawn sample.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from .counting import count_traces, total_traces
from .enumeration import DEFAULT_BUDGET, exact_frequencies
from .ingestion import EventRecord, ingest
from .sampling import TraceSampler, choose_p

COLUMNS = (
    "delta", "m", "V", "E", "total_traces", "distinct_traces", "top100_freq",
    "epsilon", "space_ratio", "expected_samples", "samples", "time_ratio",
    "count_seconds", "sample_seconds",
)


@dataclass
class BenchRow:
    delta: float
    m: int
    V: int = 0
    E: int = 0
    total_traces: int = 0
    distinct_traces: int | None = 0
    top100_freq: int | None = 0
    epsilon: float = 0.0
    space_ratio: float | None = 0.0
    expected_samples: float = 0.0
    samples: int = 0
    time_ratio: float = 0.0
    count_seconds: float = 0.0
    sample_seconds: float = 0.0

    def cells(self) -> list[str]:
        out = []
        for key in COLUMNS:
            v = getattr(self, key)
            if v is None:
                out.append("NA")
            elif isinstance(v, float):
                out.append(f"{v:.6g}")
            else:
                out.append(str(v))
        return out


def bench_rows(
    events: list[EventRecord],
    deltas: list[float],
    ms: list[int],
    *,
    epsilon: float | None = None,
    C: float = 10.0,
    seed: int = 0,
    exact: bool = True,
    budget: int = DEFAULT_BUDGET,
    top: int = 100,
) -> list[BenchRow]:
    """Compute one :class:`BenchRow` per ``(delta, m)``.

    When ``epsilon`` is None the threshold is the relative frequency of the
    ``top``-th most frequent trace (requires ``exact``). With ``exact`` the
    oracle raises :class:`BudgetExceeded` past ``budget`` traces.
    """
    rows = []
    for delta in deltas:
        dag = ingest(events, delta).dag
        for m in ms:
            row = BenchRow(delta=delta, m=m, V=dag.vertex_count, E=dag.edge_count)
            rows.append(row)
            if dag.vertex_count == 0:
                continue
            t0 = time.perf_counter()
            table = count_traces(dag, m)
            row.count_seconds = time.perf_counter() - t0
            row.total_traces = total = total_traces(table)
            if exact:
                ms_ = exact_frequencies(dag, m, budget=budget, hashed=True)
                row.distinct_traces = ms_.distinct
                row.top100_freq = ms_.kth_count(top)
            else:
                row.distinct_traces = row.top100_freq = None
            eps = epsilon
            if eps is None:
                if not exact:
                    raise ValueError("epsilon must be given when the exact columns are disabled")
                eps = (row.top100_freq or 1) / total
            row.epsilon = eps
            row.space_ratio = row.distinct_traces / (2.0 / eps) if row.distinct_traces is not None else None
            p = choose_p(eps, C, total)
            row.expected_samples = p * total
            n = [0]
            t0 = time.perf_counter()
            TraceSampler(dag, table, p).run(seed, lambda h, st: n.__setitem__(0, n[0] + 1))
            row.sample_seconds = time.perf_counter() - t0
            row.samples = n[0]
            row.time_ratio = total / n[0] if n[0] else 0.0
    return rows


def rows_to_tsv(rows: list[BenchRow]) -> str:
    lines = ["\t".join(COLUMNS)]
    lines += ["\t".join(r.cells()) for r in rows]
    return "\n".join(lines) + "\n"


def rows_as_dicts(rows: list[BenchRow]) -> list[dict]:
    return [asdict(r) for r in rows]
