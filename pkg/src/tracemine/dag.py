"""Labeled DAG data model, construction, validation and the text file format.

A :class:`LabeledDag` stores its forward adjacency in CSR form (``indptr`` /
``indices`` numpy arrays) so that graphs with millions of edges stay cheap to
build and to scan column-wise. Labels are dense non-negative integers; the
original label strings travel with the graph in ``label_names``.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CycleError, ParseError, RangeError

__all__ = [
    "LabeledDag",
    "build_dag",
    "intern_labels",
    "load_dag",
    "save_dag",
    "read_dag",
    "write_dag",
]


def _is_int_literal(s: str) -> bool:
    return s.isdigit() and s.isascii()


def intern_labels(names: Iterable[str]) -> dict[str, int]:
    """Map label strings to integer ids.

    When every name is a non-negative integer literal the id is its value (so
    arithmetic on zone numbers keeps its meaning); otherwise names receive dense
    ids in sorted order. The rule depends only on the set of names, which makes
    save/load round trips label-stable.
    """
    distinct = sorted(set(names))
    if all(_is_int_literal(s) for s in distinct):
        table = {s: int(s) for s in distinct}
        if len(set(table.values())) != len(table):
            # "07" and "7" would collide; fall back to dense ids
            return {s: i for i, s in enumerate(distinct)}
        return table
    return {s: i for i, s in enumerate(distinct)}


@dataclass(frozen=True, eq=False)
class LabeledDag:
    labels: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    topo_order: np.ndarray
    label_names: dict[int, str] = field(default_factory=dict)

    @property
    def vertex_count(self) -> int:
        return int(self.labels.shape[0])

    @property
    def edge_count(self) -> int:
        return int(self.indices.shape[0])

    def __len__(self):
        return self.vertex_count

    def out_degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def successors(self, v: int) -> list[int]:
        return self.indices[self.indptr[v] : self.indptr[v + 1]].tolist()

    @property
    def adjacency(self) -> list[list[int]]:
        """Successor lists for every vertex (built once, then cached)."""
        adj = self.__dict__.get("_adjacency")
        if adj is None:
            flat = self.indices.tolist()
            ptr = self.indptr.tolist()
            adj = [flat[ptr[v] : ptr[v + 1]] for v in range(self.vertex_count)]
            object.__setattr__(self, "_adjacency", adj)
        return adj

    @property
    def label_list(self) -> list[int]:
        lab = self.__dict__.get("_label_list")
        if lab is None:
            lab = self.labels.tolist()
            object.__setattr__(self, "_label_list", lab)
        return lab

    def edges(self) -> Iterable[tuple[int, int]]:
        adj = self.adjacency
        for u in range(self.vertex_count):
            for v in adj[u]:
                yield u, v

    def label_name(self, label: int) -> str:
        return self.label_names.get(label, str(label))

    def format_trace(self, trace: Sequence[int]) -> str:
        return "-".join(self.label_name(lab) for lab in trace)

    def structurally_equal(self, other: "LabeledDag") -> bool:
        return (
            np.array_equal(self.labels, other.labels)
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and all(self.label_name(x) == other.label_name(x) for x in set(self.label_list))
        )

    def __eq__(self, other):
        if not isinstance(other, LabeledDag):
            return NotImplemented
        return self.structurally_equal(other)

    __hash__ = None


def _find_cycle(n, src, dst, alive):
    """Walk predecessors inside the unresolved remnant until a vertex repeats."""
    preds: dict[int, int] = {}
    for u, v in zip(src.tolist(), dst.tolist()):
        if alive[u] and alive[v] and v not in preds:
            preds[v] = u
    start = int(np.flatnonzero(alive)[0])
    seen: dict[int, int] = {}
    path = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = preds[v]
    cycle = path[seen[v]:]
    cycle.reverse()
    return cycle


def _topological_order(n, indptr, indices, src):
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if src.size == 0 or bool(np.all(src < indices)):
        # vertex order is already topological
        return np.arange(n, dtype=np.int64)

    # Kahn's algorithm, one frontier (level) at a time
    indeg = np.bincount(indices, minlength=n).astype(np.int64)
    deg = np.diff(indptr)
    frontier = np.flatnonzero(indeg == 0)
    order = []
    done = 0
    while frontier.size:
        order.append(frontier)
        done += frontier.size
        counts = deg[frontier]
        total = int(counts.sum())
        if total == 0:
            break
        starts = np.repeat(indptr[frontier] - np.cumsum(counts) + counts, counts)
        targets = indices[starts + np.arange(total)]
        uniq, hits = np.unique(targets, return_counts=True)
        indeg[uniq] -= hits
        frontier = uniq[indeg[uniq] == 0]
    if done < n:
        alive = np.ones(n, dtype=bool)
        alive[np.concatenate(order) if order else []] = False
        raise CycleError(_find_cycle(n, src, indices, alive))
    return np.concatenate(order).astype(np.int64)


def build_dag(
    vertex_labels: Sequence[int] | np.ndarray,
    edges: Iterable[tuple[int, int]] | np.ndarray,
    label_names: dict[int, str] | None = None,
) -> LabeledDag:
    """Build and validate a labeled DAG.

    ``edges`` may be a list of pairs or an ``(k, 2)`` integer array. Duplicate
    edges are collapsed. Raises :class:`RangeError` for endpoints outside
    ``[0, n)`` and :class:`CycleError` (self loops included) if the graph is
    not acyclic.
    """
    labels = np.asarray(vertex_labels, dtype=np.int64).reshape(-1)
    n = labels.shape[0]
    if labels.size and labels.min() < 0:
        raise ValueError("labels must be non-negative integers")
    if isinstance(edges, np.ndarray):
        e = edges.astype(np.int64, copy=False).reshape(-1, 2)
    else:
        e = np.array(list(edges), dtype=np.int64).reshape(-1, 2)

    if e.size:
        bad = (e < 0) | (e >= n)
        if bad.any():
            row = int(np.flatnonzero(bad.any(axis=1))[0])
            raise RangeError(f"edge {tuple(e[row].tolist())} has an endpoint outside [0, {n})")
        loops = np.flatnonzero(e[:, 0] == e[:, 1])
        if loops.size:
            raise CycleError([int(e[loops[0], 0])])
        keys = np.unique(e[:, 0] * n + e[:, 1])
        src = keys // n
        dst = keys % n
    else:
        src = dst = np.zeros(0, dtype=np.int64)

    indptr = np.zeros(n + 1, dtype=np.int64)
    if src.size:
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    topo = _topological_order(n, indptr, dst, src)

    names = dict(label_names) if label_names else {}
    for lab in np.unique(labels).tolist():
        names.setdefault(lab, str(lab))
    return LabeledDag(labels=labels, indptr=indptr, indices=dst, topo_order=topo, label_names=names)


def write_dag(dag: LabeledDag, fh) -> None:
    fh.write(f"dag v={dag.vertex_count} e={dag.edge_count}\n")
    for v, lab in enumerate(dag.label_list):
        fh.write(f"vertex {v} {dag.label_name(lab)}\n")
    for u, v in dag.edges():
        fh.write(f"edge {u} {v}\n")


def save_dag(dag: LabeledDag, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_dag(dag, fh)


def read_dag(fh, source: str | None = None) -> LabeledDag:
    """Parse the ``dag v=<n> e=<k>`` text format from an open text stream."""
    lines = iter(enumerate(fh, start=1))

    def fail(msg, lineno):
        raise ParseError(msg, line=lineno, source=source)

    header = None
    for lineno, raw in lines:
        if raw.strip():
            header = (lineno, raw.rstrip("\n"))
            break
    if header is None:
        fail("missing 'dag' header", 1)
    lineno, text = header
    parts = text.split()
    try:
        if len(parts) != 3 or parts[0] != "dag" or not parts[1].startswith("v=") or not parts[2].startswith("e="):
            raise ValueError
        n = int(parts[1][2:])
        k = int(parts[2][2:])
        if n < 0 or k < 0:
            raise ValueError
    except ValueError:
        fail(f"bad header {text!r}; expected 'dag v=<n> e=<k>'", lineno)

    names: list[str | None] = [None] * n
    edges = []
    for lineno, raw in lines:
        text = raw.rstrip("\n")
        if not text.strip():
            continue
        kind, _, rest = text.partition(" ")
        if kind == "vertex":
            vid, _, name = rest.partition(" ")
            try:
                v = int(vid)
            except ValueError:
                fail(f"bad vertex id {vid!r}", lineno)
            if not 0 <= v < n:
                fail(f"vertex id {v} outside declared range [0, {n})", lineno)
            if names[v] is not None:
                fail(f"vertex {v} declared twice", lineno)
            if not name:
                fail(f"vertex {v} has no label", lineno)
            names[v] = name
        elif kind == "edge":
            fields = rest.split()
            try:
                u, v = (int(x) for x in fields)
            except ValueError:
                fail(f"bad edge line {text!r}", lineno)
            for end in (u, v):
                if not 0 <= end < n or names[end] is None:
                    fail(f"edge references undeclared vertex {end}", lineno)
            edges.append((u, v))
        else:
            fail(f"unknown record type {kind!r}", lineno)

    missing = [v for v, s in enumerate(names) if s is None]
    if missing:
        fail(f"vertex {missing[0]} declared in header but never defined", None)
    if len(edges) != k:
        fail(f"header declares {k} edges, found {len(edges)}", None)
    ids = intern_labels(names)
    labels = [ids[s] for s in names]
    return build_dag(labels, edges, {i: s for s, i in ids.items()})


def load_dag(path: str | os.PathLike) -> LabeledDag:
    with open(path, encoding="utf-8") as fh:
        return read_dag(fh, source=str(path))


def dag_to_text(dag: LabeledDag) -> str:
    buf = io.StringIO()
    write_dag(dag, buf)
    return buf.getvalue()
