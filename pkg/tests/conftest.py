import itertools
import math
import random

import numpy as np
import pytest

from tracemine.dag import build_dag
from tracemine.enumeration import walk_all
from tracemine.synthetic import random_dag

EXAMPLE_LABELS = [1, 2, 3, 6, 7]
EXAMPLE_EDGES = [(0, 1), (0, 2), (1, 2), (3, 4)]


@pytest.fixture
def example_dag():
    """Movement DAG of one tag seen at zones 1,2,3,6,7 at t=10,20,30,60,70, delta=20."""
    return build_dag(EXAMPLE_LABELS, EXAMPLE_EDGES)


def random_corpus(count, seed=12345, max_n=12, max_prob=0.5):
    """Deterministic stream of (dag, m) pairs for oracle comparisons."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        prob = float(rng.uniform(0.0, max_prob))
        dag = random_dag(n, prob, n_labels=int(rng.integers(1, 6)), rng=rng)
        yield dag, int(rng.integers(1, 6))


def brute_paths(dag, m):
    """All paths of length <= m, by extending every path one edge at a time.

    Independent of the package walker: works from an explicit edge set.
    """
    edges = set(dag.edges())
    labels = dag.labels.tolist()
    frontier = [(v,) for v in range(dag.vertex_count)]
    paths = list(frontier)
    for _ in range(m - 1):
        frontier = [p + (w,) for p in frontier for w in range(dag.vertex_count) if (p[-1], w) in edges]
        paths += frontier
    return [tuple(labels[v] for v in p) for p in paths], paths


def root_paths(dag, m, root):
    out = []
    walk_all(dag, m, lambda h, st: out.append(tuple(st)), roots=[root])
    return out


def exact_conditional_law(k, p):
    """Law of the set of included items among k independent Bernoulli(p)
    items, conditioned on the set being non-empty. Keys are index tuples."""
    norm = -math.expm1(k * math.log1p(-p))
    law = {}
    for r in range(1, k + 1):
        for sub in itertools.combinations(range(k), r):
            law[sub] = p**r * (1 - p) ** (k - r) / norm
    return law


def rejection_sample(k, p, rng):
    while True:
        picked = tuple(j for j in range(k) if rng.random() < p)
        if picked:
            return picked


def total_variation(a, b):
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(x, 0.0) - b.get(x, 0.0)) for x in keys)


def empirical(counter, n):
    return {k: v / n for k, v in counter.items()}


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
