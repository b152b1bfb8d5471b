import random

from hypothesis import given, strategies as st

from tracemine.enumeration import all_traces
from tracemine.hashing import MERSENNE_61, TraceHasher, extend_hash, format_hash, trace_hash

from conftest import random_corpus


def test_deterministic():
    assert trace_hash((1, 2, 3)) == trace_hash([1, 2, 3])
    assert 0 <= trace_hash((5,)) < MERSENNE_61


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=12), st.integers(0, 10**6))
def test_extend_matches_recompute(trace, label):
    assert extend_hash(trace_hash(trace), label) == trace_hash(trace + [label])


def test_extend_matches_recompute_bulk():
    rng = random.Random(7)
    hasher = TraceHasher.from_seed(99)
    for _ in range(10**5):
        t = [rng.randrange(1000) for _ in range(rng.randint(1, 8))]
        assert hasher.extend(hasher.hash(t[:-1]), t[-1]) == hasher.hash(t)


def test_label_zero_prefix_is_distinguished():
    assert trace_hash((0,)) != trace_hash((0, 0))
    assert trace_hash((0, 1)) != trace_hash((1,))


def test_hex_form():
    assert format_hash(255) == "00000000000000ff"


def test_no_collisions_on_random_dags():
    for dag, m in random_corpus(100, seed=2024):
        distinct = set()
        all_traces(dag, m, distinct.add)
        hashes = {trace_hash(t) for t in distinct}
        assert len(hashes) == len(distinct)
