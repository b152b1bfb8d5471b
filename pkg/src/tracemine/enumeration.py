"""Exhaustive generation of the trace multiset ``S_m``.

This is the slow, exact path. It is used as the oracle that the counting
table and the sampler are checked against, and by the ``enumerate`` command.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Hashable

from .counting import count_traces, total_traces
from .dag import LabeledDag
from .errors import BudgetExceeded, DomainError
from .hashing import DEFAULT_HASHER, MERSENNE_61, TraceHasher

DEFAULT_BUDGET = 10**8

Emit = Callable[[int, list], None]


def walk_all(dag: LabeledDag, m: int, emit: Emit, hasher: TraceHasher = DEFAULT_HASHER, roots=None) -> None:
    """Depth-first walk calling ``emit(hash, label_stack)`` once per path.

    ``label_stack`` is a live list owned by the walker; copy it if it must
    outlive the call. Paths are visited from each root in vertex order, trace
    before extensions, children in sorted order.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    adj = dag.adjacency
    labels = dag.label_list
    base = hasher.base
    stack: list[int] = []

    def visit(v, h, i):
        lab = labels[v]
        h = (h * base + lab + 1) % MERSENNE_61
        stack.append(lab)
        emit(h, stack)
        if i > 1:
            for w in adj[v]:
                visit(w, h, i - 1)
        stack.pop()

    for v in range(dag.vertex_count) if roots is None else roots:
        visit(v, 0, m)


def all_traces(dag: LabeledDag, m: int, sink: Callable, *, hashed: bool = False, hasher: TraceHasher = DEFAULT_HASHER) -> None:
    """Feed every trace of ``S_m`` to ``sink``, one call per path.

    With ``hashed=True`` the sink receives the integer trace hash instead of
    a tuple of labels.
    """
    if hashed:
        walk_all(dag, m, lambda h, stack: sink(h), hasher)
    else:
        walk_all(dag, m, lambda h, stack: sink(tuple(stack)), hasher)


@dataclass
class TraceMultiset:
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def distinct(self) -> int:
        return len(self.counts)

    def __getitem__(self, key: Hashable) -> int:
        return self.counts[key]

    def __contains__(self, key):
        return key in self.counts

    def __len__(self):
        return len(self.counts)

    def most_common(self, n=None):
        return self.counts.most_common(n)

    def frequency(self, key) -> float:
        total = self.total
        return self.counts[key] / total if total else 0.0

    def kth_count(self, k: int) -> int:
        """Occurrence count of the k-th most frequent trace (0 if fewer exist)."""
        if k < 1 or len(self.counts) < k:
            return 0
        return sorted(self.counts.values(), reverse=True)[k - 1]


def exact_frequencies(
    dag: LabeledDag,
    m: int,
    *,
    budget: int = DEFAULT_BUDGET,
    hashed: bool = False,
    hasher: TraceHasher = DEFAULT_HASHER,
) -> TraceMultiset:
    """Materialize the occurrence count of every distinct trace in ``S_m``.

    Raises :class:`BudgetExceeded` before doing any work if ``|S_m|`` is
    larger than ``budget``.
    """
    total = total_traces(count_traces(dag, m)) if dag.vertex_count else 0
    if total > budget:
        raise BudgetExceeded(f"|S_{m}| = {total} exceeds the enumeration budget of {budget}")
    counts: Counter = Counter()
    if hashed:
        def emit(h, stack):
            counts[h] += 1
    else:
        def emit(h, stack):
            counts[tuple(stack)] += 1
    if dag.vertex_count:
        walk_all(dag, m, emit, hasher)
    return TraceMultiset(counts)
