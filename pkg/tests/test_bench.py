import math

import numpy as np
import pytest

from tracemine.bench import bench_rows, rows_to_tsv
from tracemine.errors import BudgetExceeded
from tracemine.synthetic import GeneratorSpec, synthetic_events


@pytest.fixture(scope="module")
def events():
    return synthetic_events(GeneratorSpec(tags=80, readings_per_tag=20, zones=25, seed=7))


def test_empty_row_is_zero():
    rows = bench_rows([], [10.0], [5])
    assert rows[0].cells()[2:7] == ["0", "0", "0", "0", "0"]


def test_columns_and_ratio(events):
    rows = bench_rows(events, [20.0, 5.0], [3], epsilon=0.02)
    for r in rows:
        assert r.space_ratio == pytest.approx(r.distinct_traces / (2 / 0.02))
        assert r.expected_samples == pytest.approx(min(10 / 0.02, r.total_traces))
    # |E| shrinks with delta, |V| fixed
    assert rows[0].V == rows[1].V and rows[0].E >= rows[1].E
    assert rows_to_tsv(rows).count("\n") == 3


def test_default_epsilon_from_top100(events):
    (row,) = bench_rows(events, [10.0], [3])
    assert row.epsilon == pytest.approx(row.top100_freq / row.total_traces)


def test_budget(events):
    with pytest.raises(BudgetExceeded):
        bench_rows(events, [20.0], [5], epsilon=0.05, budget=10)
    (row,) = bench_rows(events, [20.0], [5], epsilon=0.05, exact=False)
    assert row.distinct_traces is None and "NA" in row.cells()


def test_sample_count_tracks_c_over_epsilon(events):
    eps, C = 0.01, 10
    (row,) = bench_rows(events, [20.0], [5], epsilon=eps, exact=False)
    assert row.expected_samples == pytest.approx(C / eps)
    sizes = [bench_rows(events, [20.0], [5], epsilon=eps, exact=False, seed=s)[0].samples for s in range(100)]
    mean = np.mean(sizes)
    # binomial(|S_m|, p): standard error of the mean over 100 runs
    assert abs(mean - C / eps) < 4 * math.sqrt(C / eps / 100)
