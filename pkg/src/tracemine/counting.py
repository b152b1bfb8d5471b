"""Per-vertex path counts ``c[v][i]``: the number of paths of length at most
``i`` that start at ``v``.

The table is filled one horizon at a time: column ``i`` only needs column
``i - 1``, so every column is a single vectorized segment-sum over the CSR
edge list and no recursion or explicit topological pass is needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dag import LabeledDag
from .errors import DomainError

INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class PathCountTable:
    c: np.ndarray  # shape (|V|, m + 1), int64
    m: int

    def __getitem__(self, v):
        return self.c[v]

    def count(self, v: int, i: int) -> int:
        return int(self.c[v, i])

    def column(self, i: int) -> np.ndarray:
        return self.c[:, i]

    def to_tsv(self) -> str:
        head = "vertex\t" + "\t".join(f"c[{i}]" for i in range(self.m + 1))
        rows = [head]
        for v, row in enumerate(self.c.tolist()):
            rows.append("\t".join(str(x) for x in [v, *row]))
        return "\n".join(rows) + "\n"


class _ColumnStep:
    """Reusable buffers for ``next[v] = 1 + sum(prev[w] for w in succ(v))``."""

    def __init__(self, dag: LabeledDag):
        self.indptr, self.indices = dag.indptr, dag.indices
        self.n = dag.vertex_count
        self.nonempty = np.flatnonzero(self.indptr[1:] > self.indptr[:-1])
        self.starts = self.indptr[self.nonempty]
        self.dense = self.nonempty.size == self.n
        self.gather = np.empty(self.indices.size, dtype=np.int64)
        self.max_deg = int(np.diff(self.indptr).max()) if self.n else 0

    def __call__(self, prev: np.ndarray, out: np.ndarray) -> None:
        peak = int(prev.max()) if prev.size else 0
        if peak * self.max_deg >= INT64_MAX:
            self._check_overflow(prev)
        np.take(prev, self.indices, out=self.gather)
        if self.dense:
            np.add.reduceat(self.gather, self.starts, out=out)
        else:
            out[:] = 0
            out[self.nonempty] = np.add.reduceat(self.gather, self.starts)
        out += 1

    def _check_overflow(self, prev):
        # some sums may not fit; confirm with exact integers where a float
        # estimate says we are close to the limit
        indptr, indices = self.indptr, self.indices
        est = np.bincount(
            np.repeat(np.arange(self.n), np.diff(indptr)),
            weights=prev[indices].astype(np.float64),
            minlength=self.n,
        )
        for v in np.flatnonzero(est >= 2.0**62).tolist():
            exact = 1 + sum(int(x) for x in prev[indices[indptr[v] : indptr[v + 1]]].tolist())
            if exact > INT64_MAX:
                raise OverflowError(f"path count at vertex {v} exceeds the 64-bit range")


def count_traces(dag: LabeledDag, m: int) -> PathCountTable:
    """Fill ``c[v][i]`` for ``0 <= i <= m`` via ``c[v][i] = 1 + sum c[v'][i-1]``.

    Runs in O(|E| m) time and O(|V| m) space. Raises ``OverflowError`` if any
    count leaves the signed 64-bit range.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    n = dag.vertex_count
    # column-major: each horizon is one contiguous vector
    c = np.zeros((n, m + 1), dtype=np.int64, order="F")
    if n == 0:
        return PathCountTable(c, m)
    c[:, 1] = 1
    if dag.edge_count == 0:
        c[:, 2:] = 1
        return PathCountTable(c, m)
    step = _ColumnStep(dag)
    for i in range(2, m + 1):
        step(c[:, i - 1], c[:, i])
    return PathCountTable(c, m)


def total_traces(table: PathCountTable, i: int | None = None) -> int:
    """``|S_i|`` = sum over vertices of ``c[v][i]`` (defaults to ``i = m``)."""
    col = table.c[:, table.m if i is None else i]
    if float(col.sum(dtype=np.float64)) < 2.0**62:
        total = int(col.sum())
    else:
        total = sum(int(x) for x in col.tolist())
    if total > INT64_MAX:
        raise OverflowError("total trace count exceeds the 64-bit range")
    return total
