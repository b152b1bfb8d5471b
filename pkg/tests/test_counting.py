import numpy as np
import pytest

from tracemine.counting import count_traces, total_traces
from tracemine.dag import build_dag
from tracemine.enumeration import walk_all
from tracemine.errors import DomainError

from conftest import random_corpus


def test_single_vertex():
    t = count_traces(build_dag([0], []), 3)
    assert t.c[0].tolist() == [0, 1, 1, 1]


def test_chain_two():
    t = count_traces(build_dag([0, 1], [(0, 1)]), 2)
    assert t.c[0].tolist() == [0, 1, 2]
    assert t.c[1].tolist() == [0, 1, 1]
    assert total_traces(t) == 3


def test_example(example_dag):
    t = count_traces(example_dag, 5)
    assert t.c[:, 5].tolist() == [4, 2, 1, 2, 1]
    assert total_traces(t) == 10


def test_edgeless():
    assert total_traces(count_traces(build_dag([1] * 6, []), 4)) == 6


def test_chain_of_three_m2():
    assert total_traces(count_traces(build_dag([0, 1, 2], [(0, 1), (1, 2)]), 2)) == 5


def test_m_must_be_positive(example_dag):
    with pytest.raises(DomainError):
        count_traces(example_dag, 0)


def test_per_root_counts_match_enumeration():
    for dag, m in random_corpus(300, seed=31):
        t = count_traces(dag, m)
        for v in range(dag.vertex_count):
            n = [0]
            walk_all(dag, m, lambda h, st: n.__setitem__(0, n[0] + 1), roots=[v])
            assert t.c[v, m] == n[0]


def test_recurrence_and_monotonicity():
    for dag, m in random_corpus(200, seed=32):
        c = count_traces(dag, m).c
        assert (c[:, 0] == 0).all()
        assert (np.diff(c, axis=1) >= 0).all()
        for v in range(dag.vertex_count):
            for i in range(1, m + 1):
                assert c[v, i] == 1 + sum(c[w, i - 1] for w in dag.successors(v))


def _complete_dag(n):
    return build_dag([0] * n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def test_overflow_is_an_error():
    # a complete DAG on 70 vertices has far more than 2**63 paths of length <= 40
    with pytest.raises(OverflowError):
        count_traces(_complete_dag(70), 40)


def test_large_values_exact_below_limit():
    # complete DAG on n vertices: paths starting at vertex 0 = 2**(n-1)
    t = count_traces(_complete_dag(62), 62)
    assert int(t.c[0, 62]) == 2**61
    assert total_traces(t) == 2**62 - 1


def test_tsv_dump(example_dag):
    text = count_traces(example_dag, 2).to_tsv().splitlines()
    assert text[0] == "vertex\tc[0]\tc[1]\tc[2]"
    assert text[1] == "0\t0\t1\t3"
