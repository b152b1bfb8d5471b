import math
import random
from collections import Counter

import numpy as np
import pytest

from tracemine import sampling
from tracemine.counting import count_traces, total_traces
from tracemine.dag import build_dag
from tracemine.enumeration import exact_frequencies
from tracemine.errors import DomainError
from tracemine.sampling import (
    SampleConfig,
    TraceSampler,
    build_skip_table,
    choose_p,
    naive_select,
    sample_traces,
    select_recursing_children,
)

from conftest import empirical, exact_conditional_law, rejection_sample, root_paths, total_variation


def test_choose_p_examples():
    assert choose_p(0.1, 10, 10_000) == pytest.approx(0.01)
    assert choose_p(0.1, 10, 10_000) * 10_000 == pytest.approx(100)
    assert choose_p(1, 2, 1) == 1.0
    assert choose_p(0.5, 10, 10) == 1.0


@pytest.mark.parametrize("args", [(0, 10, 5), (1.5, 10, 5), (0.1, 1, 5), (0.1, 10, 0)])
def test_choose_p_domain(args):
    with pytest.raises(DomainError):
        choose_p(*args)


def test_config_derives_p():
    cfg = SampleConfig.for_threshold(0.1, 10, m=5, seed=3, total=10_000)
    assert cfg.p == pytest.approx(0.01)
    assert cfg.expected_sample_size(10_000) == pytest.approx(100)


def test_single_vertex_half():
    dag = build_dag([0], [])
    sampler = TraceSampler(dag, count_traces(dag, 1), 0.5)
    R = 40_000
    hits = 0
    for seed in range(R):
        out = []
        sampler.run(seed, lambda h, st: out.append(tuple(st)))
        assert out in ([], [(0,)])
        hits += bool(out)
    sd = math.sqrt(0.25 / R)
    assert abs(hits / R - 0.5) < 4 * sd


def test_p_one_is_enumeration(example_dag):
    table = count_traces(example_dag, 5)
    got = Counter()
    sample_traces(example_dag, table, SampleConfig(m=5, p=1.0, seed=1), lambda t: got.update([t]))
    assert got == exact_frequencies(example_dag, 5).counts


def test_marginals_short_run(example_dag):
    table = count_traces(example_dag, 5)
    sampler = TraceSampler(example_dag, table, 0.1)
    R = 30_000
    cnt = Counter()
    for seed in range(R):
        sampler.run(seed, lambda h, st: cnt.update([tuple(st)]))
        assert sampler.stats.empty_invocations == 0
    band = 4 * math.sqrt(0.1 * 0.9 / R)
    assert len(cnt) == 10
    for trace, n in cnt.items():
        assert abs(n / R - 0.1) < band, trace


def test_same_seed_same_stream(example_dag):
    table = count_traces(example_dag, 5)
    a, b = [], []
    sampler = TraceSampler(example_dag, table, 0.3)
    sampler.run(42, lambda h, st: a.append((h, tuple(st))))
    TraceSampler(example_dag, table, 0.3).run(42, lambda h, st: b.append((h, tuple(st))))
    assert a == b


def test_parallel_matches_serial(monkeypatch):
    rng = np.random.default_rng(3)
    from tracemine.synthetic import random_dag

    dag = random_dag(400, 0.02, 7, rng)
    table = count_traces(dag, 4)
    monkeypatch.setattr(sampling, "PARALLEL_MIN_ROOTS", 1)
    serial, par = [], []
    s1 = TraceSampler(dag, table, 0.05).run(9, lambda h, st: serial.append((h, tuple(st))))
    s2 = TraceSampler(dag, table, 0.05).run(9, lambda h, st: par.append((h, tuple(st))), workers=3)
    assert serial == par
    assert s1.emitted == s2.emitted
    assert s1.length_histogram == s2.length_histogram


# -- child selection -----------------------------------------------------------


def prefix_products(pbar):
    q = [1.0]
    for x in pbar:
        q.append(q[-1] * x)
    return q


def test_select_single_child():
    rng = random.Random(1)
    R = 100_000
    hits = sum(bool(select_recursing_children([1.0, 0.3], rng)) for _ in range(R))
    assert abs(hits / R - 0.7) < 4 * math.sqrt(0.21 / R)


class FixedRng:
    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def test_r_below_qd_selects_nothing():
    q = prefix_products([0.5, 0.5, 0.5])  # q_d = 0.125
    # r = 1 - u lands below every prefix product: no child recurses
    assert select_recursing_children(q, FixedRng([0.95])) == []
    # r = 1 picks child 0; the follow-up r is tiny relative to q_1, so nothing else
    assert select_recursing_children(q, FixedRng([0.0, 1 - 1e-9])) == [0]
    # r = 1 then r = q_1 (u = 0): child 1 is next
    assert select_recursing_children(q, FixedRng([0.0, 0.0, 1 - 1e-9])) == [0, 1]


def test_select_matches_naive_loop():
    pbar = [0.5, 0.5, 0.5]
    q = prefix_products(pbar)
    rng = random.Random(11)
    R = 200_000
    fast = Counter(tuple(select_recursing_children(q, rng)) for _ in range(R))
    slow = Counter(tuple(naive_select(pbar, rng)) for _ in range(R))
    assert total_variation(empirical(fast, R), empirical(slow, R)) < 0.01


def test_select_validates_prefix():
    with pytest.raises(ValueError):
        select_recursing_children([0.9, 0.5], random.Random())
    with pytest.raises(ValueError):
        select_recursing_children([1.0, 0.5, 0.7], random.Random())


def test_skip_table_shapes(example_dag):
    table = count_traces(example_dag, 5)
    skip = build_skip_table(example_dag, table, 0.1)
    entry = skip[(0, 5)]
    assert entry["children"] == [1, 2]
    q = entry["q"]
    assert q[0] == 1.0 and all(a >= b for a, b in zip(q, q[1:]))
    # q_d is the chance that only the singleton is sampled, given >= 1 sample
    p, N = 0.1, 4
    assert q[-1] == pytest.approx(p * (1 - p) ** (N - 1) / (1 - (1 - p) ** N))


def test_literal_law_clamps(example_dag):
    table = count_traces(example_dag, 5)
    entry = TraceSampler(example_dag, table, 0.1, law="literal").edge_skip_table(0, 5)
    assert entry["pbar"] == [1.0, 1.0]


# -- conditional law per root ------------------------------------------------


def branching_dag():
    # root 0 with traces a, ab, ac, abd, acd (5 paths)
    return build_dag([0, 1, 2, 3], [(0, 1), (0, 2), (1, 3), (2, 3)])


def sampler_root_law(dag, m, root, p, trials, seed, **kw):
    table = count_traces(dag, m)
    sampler = TraceSampler(dag, table, p, **kw)
    paths = root_paths(dag, m, root)
    index = {t: j for j, t in enumerate(paths)}
    rng = random.Random(seed)
    law = Counter()
    for _ in range(trials):
        got = []
        sampler.sample_root(root, rng, lambda h, st: got.append(index[tuple(st)]))
        law[tuple(sorted(got))] += 1
    assert sampler.stats.empty_invocations == 0
    return empirical(law, trials), len(paths)


@pytest.mark.parametrize("refined", [True, False])
@pytest.mark.parametrize("p", [0.1, 0.5])
def test_root_law_matches_oracle(p, refined):
    dag = branching_dag()
    emp, k = sampler_root_law(dag, 3, 0, p, 100_000, seed=5, refined=refined)
    assert k == 5
    assert total_variation(emp, exact_conditional_law(k, p)) < 0.02


def test_rejection_oracle_agrees_with_closed_form():
    rng = random.Random(0)
    R = 100_000
    emp = empirical(Counter(rejection_sample(5, 0.3, rng) for _ in range(R)), R)
    assert total_variation(emp, exact_conditional_law(5, 0.3)) < 0.02


def test_literal_law_deviation_is_visible():
    dag = branching_dag()
    emp, k = sampler_root_law(dag, 3, 0, 0.1, 50_000, seed=6, law="literal")
    assert total_variation(emp, exact_conditional_law(k, 0.1)) > 0.2


# -- sample size and numerics ------------------------------------------------


def test_expected_sample_size(example_dag):
    table = count_traces(example_dag, 5)
    p = 0.3
    sampler = TraceSampler(example_dag, table, p)
    R = 10_000
    sizes = []
    for seed in range(R):
        sizes.append(sampler.run(seed, lambda h, st: None).emitted)
    mean = float(np.mean(sizes))
    se = math.sqrt(10 * p * (1 - p) / R)
    assert abs(mean - p * 10) < 3 * se


def test_huge_counts_stay_finite():
    n = 62
    dag = build_dag([0] * n, [(u, v) for u in range(n) for v in range(u + 1, n)])
    table = count_traces(dag, n)
    total = total_traces(table)
    p = 40 / total
    sampler = TraceSampler(dag, table, p)
    sizes = [sampler.run(seed, lambda h, st: None).emitted for seed in range(200)]
    assert abs(np.mean(sizes) - 40) < 4 * math.sqrt(40 / 200)
    assert sampler.stats.empty_invocations == 0


def test_length_histogram(example_dag):
    table = count_traces(example_dag, 5)
    stats = sample_traces(example_dag, table, SampleConfig(m=5, p=1.0, seed=0), lambda t: None)
    assert dict(stats.length_histogram) == {1: 5, 2: 4, 3: 1}
    assert stats.to_dict()["length_histogram"] == {"1": 5, "2": 4, "3": 1}
