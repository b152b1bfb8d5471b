"""Independent Bernoulli sampling of ``S_m`` without enumerating it.

Every trace of ``S_m`` ends up in the sample independently with probability
``p``. A root ``v`` is entered only when its subtree must contribute at least
one trace (probability ``1 - (1-p)**c[v][m]``); inside, the walk descends into
a child only when that child's subtree is selected, so each invocation emits
at least one trace and the work is proportional to the sample size.

Two child-selection laws are available:

``exact`` (default)
    Children are decided in order, conditioned on what is still required: as
    long as nothing has been emitted, the probability that child ``j`` and all
    children before it stay silent is
    ``q_j = (1-p)**C_j * (1 - (1-p)**(N - C_j)) / (1 - (1-p)**N)`` with ``C_j``
    the prefix sum of child counts and ``N = c[v][i]``. After the first
    recursion the remaining children are unconditional,
    ``u_j / u_prev = (1-p)**(C_j - C_prev)``. This reproduces the conditional
    law of the independent sample exactly.

``literal``
    Every child uses the fixed quotient
    ``(1-p)**c[v'][i-1] / (1 - (1-p)**c[v][i])`` clamped into ``[0, 1]``. The
    quotient exceeds one for small ``p`` and the resulting law is biased; it is
    kept for comparison.

With ``refined=True`` the recursing children are found by binary search over
prefix products of the no-recursion probabilities (O(log d) per recursion);
``refined=False`` runs the per-child Bernoulli loop.

All powers ``(1-p)**k`` are handled as ``k * log1p(-p)``, so huge counts never
underflow.
"""
from __future__ import annotations

import math
import multiprocessing
import random
from bisect import bisect_right
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .counting import PathCountTable, total_traces
from .dag import LabeledDag
from .errors import DomainError
from .hashing import DEFAULT_HASHER, MERSENNE_61, TraceHasher

LAWS = ("exact", "literal")
MIN_PROBABILITY = 2.0**-60
ROOT_CHUNK = 1 << 12
PARALLEL_MIN_ROOTS = 4096
SEED_MASK = (1 << 64) - 1


def choose_p(epsilon: float, C: float, total: int) -> float:
    """Inclusion probability giving an expected ``C / epsilon`` samples.

    A trace with relative frequency ``f`` is then sampled ``C * f / epsilon``
    times in expectation. Clamped to 1 when ``S_m`` is small.
    """
    if not (0 < epsilon <= 1):
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not C > 1:
        raise DomainError(f"C must be > 1, got {C}")
    if total < 1:
        raise DomainError(f"|S_m| must be >= 1, got {total}")
    return min(1.0, C / (epsilon * total))


@dataclass(frozen=True)
class SampleConfig:
    m: int
    p: float
    seed: int = 0
    epsilon: float | None = None
    C: float | None = None
    law: str = "exact"
    refined: bool = True

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be >= 1")
        if not (0 < self.p <= 1):
            raise DomainError(f"p must lie in (0, 1], got {self.p}")
        if self.law not in LAWS:
            raise DomainError(f"unknown sampling law {self.law!r}")

    @classmethod
    def for_threshold(cls, epsilon, C, m, seed, total, **kw) -> "SampleConfig":
        return cls(m=m, p=choose_p(epsilon, C, total), seed=seed, epsilon=epsilon, C=C, **kw)

    def expected_sample_size(self, total: int) -> float:
        return self.p * total


@dataclass
class SampleStats:
    seed: int
    p: float
    emitted: int = 0
    roots_entered: int = 0
    invocations: int = 0
    empty_invocations: int = 0
    length_histogram: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["length_histogram"] = {str(k): v for k, v in sorted(self.length_histogram.items())}
        return d


# -- prefix-product selection -------------------------------------------------


def _select(neg_first: Sequence[float], neg_rest: Sequence[float], rand: Callable[[], float]) -> list[int]:
    """Binary-search selection on cumulative ``-log`` no-recursion probabilities.

    Indices are 1-based child positions. ``neg_*[j] = -log q_j`` with
    ``neg_*[0] = 0``; the arrays are non-decreasing.
    """
    d = len(neg_first) - 1
    # first recursing child: smallest j with q_j < r, r ~ U(0, 1]
    j = bisect_right(neg_first, -math.log(1.0 - rand()), 1)
    if j > d:
        return []
    chosen = [j]
    while True:
        # next one: r ~ U(0, q_prev]
        j = bisect_right(neg_rest, neg_rest[j] - math.log(1.0 - rand()), j + 1)
        if j > d:
            return chosen
        chosen.append(j)


def select_recursing_children(q: Sequence[float], rng, rest_q: Sequence[float] | None = None) -> list[int]:
    """Pick the children that recurse, given prefix products ``q_0..q_d``.

    ``q_j`` is the probability that none of the first ``j`` children recurses
    (``q_0 = 1``, non-increasing, ``q_d > 0``). Returns 0-based child indices in
    increasing order, distributed exactly like the loop that recurses into
    child ``j`` with probability ``1 - q_j / q_{j-1}``. When ``rest_q`` is given
    it replaces ``q`` for every search after the first.
    """
    neg_first = _neg_log_prefix(q)
    neg_rest = neg_first if rest_q is None else _neg_log_prefix(rest_q)
    return [j - 1 for j in _select(neg_first, neg_rest, rng.random)]


def _neg_log_prefix(q: Sequence[float]) -> list[float]:
    if not q or q[0] != 1.0:
        raise ValueError("prefix products must start with q_0 = 1")
    out = []
    prev = 1.0
    for x in q:
        if not 0.0 < x <= prev:
            raise ValueError("prefix products must be positive and non-increasing")
        out.append(-math.log(x))
        prev = x
    return out


def naive_select(pbar: Sequence[float], rng) -> list[int]:
    """Per-child Bernoulli loop: child ``j`` recurses iff ``rand() > pbar[j]``."""
    return [j for j, pb in enumerate(pbar) if rng.random() > pb]


# -- the sampler ---------------------------------------------------------------


class TraceSampler:
    """Reusable sampler over one DAG, count table and inclusion probability.

    Skip tables for each visited ``(v, i)`` are built on first use and kept.
    Root ``v`` under run seed ``s`` draws from its own stream seeded with
    ``(s, v)``; which roots are entered is decided from a stream seeded with
    ``s`` alone, so the output does not depend on how roots are scheduled.
    """

    def __init__(
        self,
        dag: LabeledDag,
        table: PathCountTable,
        p: float,
        *,
        m: int | None = None,
        law: str = "exact",
        refined: bool = True,
        hasher: TraceHasher = DEFAULT_HASHER,
    ):
        if law not in LAWS:
            raise DomainError(f"unknown sampling law {law!r}")
        if not 0 < p <= 1:
            raise DomainError(f"p must lie in (0, 1], got {p}")
        self.m = table.m if m is None else m
        if not 1 <= self.m <= table.m:
            raise DomainError(f"count table horizon {table.m} does not cover m={self.m}")
        self.dag = dag
        self.table = table
        self.p = p
        self.law = law
        self.refined = refined
        self.hasher = hasher
        self.log_q = math.log1p(-p) if p < 1 else -math.inf
        self._skip: dict[tuple[int, int], tuple] = {}
        self._adj = dag.adjacency if dag.vertex_count <= 1 << 20 else None
        self._labels = dag.label_list
        self.stats = SampleStats(seed=0, p=p)

    @classmethod
    def from_config(cls, dag, table, cfg: SampleConfig, **kw):
        return cls(dag, table, cfg.p, m=cfg.m, law=cfg.law, refined=cfg.refined, **kw)

    # skip tables
    def _children(self, v):
        if self._adj is not None:
            return self._adj[v]
        return self.dag.successors(v)

    def skip_entry(self, v: int, i: int):
        """``(children, neg_first, neg_rest)`` for ``(v, i)``, or None if ``v`` has no children."""
        key = (v, i)
        entry = self._skip.get(key)
        if entry is None and key not in self._skip:
            entry = self._build_entry(v, i)
            self._skip[key] = entry
        return entry

    def _build_entry(self, v, i):
        children = self._children(v)
        if not children:
            return None
        counts = self.table.c[children, i - 1].tolist()
        N = int(self.table.c[v, i])
        lq = self.log_q
        log_any = math.log(-math.expm1(N * lq))  # log P(some trace of S_i(v) sampled)
        neg_first = [0.0]
        neg_rest = [0.0]
        if self.law == "exact":
            C = 0
            for k in counts:
                C += k
                silent = -C * lq
                neg_rest.append(silent)
                neg_first.append(silent - math.log(-math.expm1((N - C) * lq)) + log_any)
        else:
            acc = 0.0
            for k in counts:
                acc -= min(0.0, k * lq - log_any)
                neg_first.append(acc)
            neg_rest = neg_first
        return children, neg_first, neg_rest

    def edge_skip_table(self, v: int, i: int) -> dict:
        """Probabilities for ``(v, i)`` in plain (non-log) form, for inspection."""
        entry = self.skip_entry(v, i)
        if entry is None:
            return {"children": [], "q": [1.0], "q_rest": [1.0], "pbar": []}
        children, nf, nr = entry
        q = [math.exp(-x) for x in nf]
        return {
            "children": list(children),
            "q": q,
            "q_rest": [math.exp(-x) for x in nr],
            "pbar": [math.exp(nf[j - 1] - nf[j]) for j in range(1, len(nf))],
        }

    # sampling
    def entered_roots(self, seed: int):
        """Yield, in vertex order, the roots whose subtree yields >= 1 trace."""
        n = self.dag.vertex_count
        rng = np.random.Generator(np.random.PCG64(seed & SEED_MASK))
        col = self.table.c[:, self.m]
        for lo in range(0, n, ROOT_CHUNK):
            hi = min(n, lo + ROOT_CHUNK)
            u = rng.random(hi - lo)
            if self.p >= 1:
                yield from range(lo, hi)
                continue
            c = col[lo:hi].astype(np.float64)
            with np.errstate(divide="ignore"):
                enter = (np.log(u) > c * self.log_q) & (-np.expm1(c * self.log_q) >= MIN_PROBABILITY)
            yield from (lo + np.flatnonzero(enter)).tolist()

    @staticmethod
    def root_rng(seed: int, v: int) -> random.Random:
        return random.Random(((seed & SEED_MASK) << 64) | v)

    def sample_root(self, v: int, rng, emit: Callable[[int, list], None]) -> None:
        """Run the conditional sampler for one root (at least one trace comes out)."""
        labels = self._labels
        base = self.hasher.base
        p = self.p
        stats = self.stats
        stack: list[int] = []
        refined = self.refined
        rand = rng.random
        skip_entry = self.skip_entry
        emitted = [0]

        def out(h):
            emitted[0] += 1
            emit(h, stack)

        def body(v, h, i):
            lab = labels[v]
            h = (h * base + lab + 1) % MERSENNE_61
            stack.append(lab)
            before = emitted[0]
            recursed = False
            if i > 1 and p < 1:
                entry = skip_entry(v, i)
                if entry is not None:
                    children, nf, nr = entry
                    if refined:
                        for j in _select(nf, nr, rand):
                            body(children[j - 1], h, i - 1)
                            recursed = True
                    else:
                        for j in range(1, len(nf)):
                            neg = nr if recursed else nf
                            if rand() > math.exp(neg[j - 1] - neg[j]):
                                body(children[j - 1], h, i - 1)
                                recursed = True
            elif i > 1:
                for w in self._children(v):
                    body(w, h, i - 1)
                    recursed = True
            if not recursed or rand() < p:
                out(h)
            stats.invocations += 1
            if emitted[0] == before:
                stats.empty_invocations += 1
            stack.pop()

        body(v, 0, self.m)
        stats.emitted += emitted[0]

    def run(self, seed: int, emit: Callable[[int, list], None], workers: int = 1) -> SampleStats:
        """Sample ``S_m`` once; ``emit(hash, label_stack)`` gets every sampled trace."""
        self.stats = stats = SampleStats(seed=seed, p=self.p)
        hist = stats.length_histogram

        def counted(h, stack):
            hist[len(stack)] += 1
            emit(h, stack)

        if workers > 1:
            roots = list(self.entered_roots(seed))
            if len(roots) >= PARALLEL_MIN_ROOTS:
                self._run_parallel(seed, roots, counted, workers)
                return stats
            root_iter = roots
        else:
            root_iter = self.entered_roots(seed)
        for v in root_iter:
            stats.roots_entered += 1
            self.sample_root(v, self.root_rng(seed, v), counted)
        return stats

    def _run_parallel(self, seed, roots, emit, workers):
        global _WORKER_SAMPLER
        step = max(1, len(roots) // (4 * workers))
        chunks = [roots[k : k + step] for k in range(0, len(roots), step)]
        _WORKER_SAMPLER = self
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                # map preserves chunk order, so the merged stream matches a serial run
                for emissions, sub in pool.map(_sample_chunk, [(seed, c) for c in chunks]):
                    for h, trace in emissions:
                        emit(h, list(trace))
                    self.stats.emitted += len(emissions)
                    self.stats.roots_entered += sub["roots_entered"]
                    self.stats.invocations += sub["invocations"]
                    self.stats.empty_invocations += sub["empty_invocations"]
        finally:
            _WORKER_SAMPLER = None


_WORKER_SAMPLER: TraceSampler | None = None


def _sample_chunk(args):
    seed, roots = args
    sampler = _WORKER_SAMPLER
    sampler.stats = SampleStats(seed=seed, p=sampler.p)
    out = []
    for v in roots:
        sampler.stats.roots_entered += 1
        sampler.sample_root(v, sampler.root_rng(seed, v), lambda h, stack: out.append((h, tuple(stack))))
    s = sampler.stats
    return out, {"roots_entered": s.roots_entered, "invocations": s.invocations, "empty_invocations": s.empty_invocations}


def sample_traces(
    dag: LabeledDag,
    table: PathCountTable,
    cfg: SampleConfig,
    sink: Callable,
    *,
    hashed: bool = False,
    workers: int = 1,
    hasher: TraceHasher = DEFAULT_HASHER,
) -> SampleStats:
    """Draw one independent-Bernoulli sample of ``S_m`` into ``sink``.

    The sink receives label tuples, or integer hashes when ``hashed=True``.
    """
    sampler = TraceSampler.from_config(dag, table, cfg, hasher=hasher)
    if hashed:
        return sampler.run(cfg.seed, lambda h, stack: sink(h), workers=workers)
    return sampler.run(cfg.seed, lambda h, stack: sink(tuple(stack)), workers=workers)


def build_skip_table(dag: LabeledDag, table: PathCountTable, p: float, *, law: str = "exact") -> dict:
    """Skip tables for every ``(v, i)`` with children, keyed by ``(v, i)``.

    The sampler builds these lazily; this eager form is for inspection and
    tests on small graphs.
    """
    sampler = TraceSampler(dag, table, p, law=law)
    out = {}
    for v in range(dag.vertex_count):
        if dag.out_degree(v) == 0:
            continue
        for i in range(2, table.m + 1):
            out[(v, i)] = sampler.edge_skip_table(v, i)
    return out


def expected_sample_size(table: PathCountTable, p: float) -> float:
    return p * total_traces(table)
