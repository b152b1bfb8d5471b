"""Synthetic graphs and event streams for tests and the ``bench`` command."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dag import LabeledDag, build_dag
from .ingestion import EventRecord


def random_dag(n: int, edge_prob: float, n_labels: int, rng: np.random.Generator, shuffle: bool = True) -> LabeledDag:
    """Erdos-Renyi style DAG: each forward pair ``(u, v)`` is an edge with
    probability ``edge_prob``; vertex ids are permuted when ``shuffle``."""
    labels = rng.integers(0, max(1, n_labels), size=n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < edge_prob
    src, dst = iu[keep], ju[keep]
    if shuffle and n:
        perm = rng.permutation(n)
        src, dst = perm[src], perm[dst]
        labels = labels[np.argsort(perm)]
    return build_dag(labels, np.column_stack([src, dst]))


def sparse_forward_dag(n: int, out_degree: int, n_labels: int, seed: int = 0, window: int = 64) -> LabeledDag:
    """Large sparse DAG with about ``n * out_degree`` edges, each pointing at
    most ``window`` vertices ahead (so counts stay bounded)."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_labels, size=n)
    src = np.repeat(np.arange(n, dtype=np.int64), out_degree)
    dst = src + rng.integers(1, window + 1, size=src.size)
    keep = dst < n
    return build_dag(labels, np.column_stack([src[keep], dst[keep]]))


def planted_dag(
    patterns: list[tuple[int, ...]],
    copies: int,
    noise_chains: int,
    noise_len: int = 3,
    seed: int = 0,
) -> LabeledDag:
    """Disjoint chains: ``copies`` chains per planted label pattern, plus
    ``noise_chains`` chains whose vertices all carry unique labels.

    Noise labels start above every planted label, so each noise trace occurs
    exactly once while every sub-trace of a planted pattern occurs
    ``copies`` times (if patterns share no labels).
    """
    rng = np.random.default_rng(seed)
    labels: list[int] = []
    edges: list[tuple[int, int]] = []

    def chain(seq):
        start = len(labels)
        labels.extend(seq)
        edges.extend((start + j, start + j + 1) for j in range(len(seq) - 1))

    next_label = 1 + max((max(p) for p in patterns), default=-1)
    order = [("p", i) for i in range(len(patterns)) for _ in range(copies)]
    order += [("n", None)] * noise_chains
    for kind, idx in (order[i] for i in rng.permutation(len(order))):
        if kind == "p":
            chain(patterns[idx])
        else:
            chain(range(next_label, next_label + noise_len))
            next_label += noise_len
    return build_dag(labels, edges)


def chain_traces(length: int, m: int) -> int:
    """Number of paths of length <= m in a chain of ``length`` vertices."""
    return sum(length - j for j in range(min(length, m)))


@dataclass
class GeneratorSpec:
    """Parameters for :func:`synthetic_events`.

    Each tag walks between zones with exponential gaps of mean ``mean_gap``
    minutes; with probability ``planted_prob`` a walk follows one of the
    ``planted`` zone routes instead of a random zone. ``overlap_prob`` and
    ``repeat_prob`` inject the two kinds of reader noise.
    """

    tags: int = 200
    readings_per_tag: int = 30
    zones: int = 40
    mean_gap: float = 6.0
    planted: list[tuple[str, ...]] = field(default_factory=lambda: [("1", "2", "3"), ("4", "5")])
    planted_prob: float = 0.3
    overlap_prob: float = 0.05
    repeat_prob: float = 0.1
    seed: int = 0

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """``key=value`` pairs separated by commas, e.g. ``tags=100,zones=20``.
        Planted routes use ``planted=1-2-3;4-5``."""
        spec = cls()
        if not text:
            return spec
        for item in text.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            if key == "planted":
                spec.planted = [tuple(r.split("-")) for r in value.split(";") if r]
            elif key in ("tags", "readings_per_tag", "zones", "seed"):
                setattr(spec, key, int(value))
            elif key in ("mean_gap", "planted_prob", "overlap_prob", "repeat_prob"):
                setattr(spec, key, float(value))
            else:
                raise ValueError(f"unknown generator key {key!r}")
        return spec


def synthetic_events(spec: GeneratorSpec) -> list[EventRecord]:
    rng = np.random.default_rng(spec.seed)
    events: list[EventRecord] = []
    zones = [str(z) for z in range(1, spec.zones + 1)]
    for tag_no in range(spec.tags):
        tag = f"tag{tag_no:05d}"
        t = float(rng.uniform(0, 60))
        route: list[str] = []
        emitted = 0
        while emitted < spec.readings_per_tag:
            if not route and spec.planted and rng.random() < spec.planted_prob:
                route = list(spec.planted[rng.integers(len(spec.planted))])
            zone = route.pop(0) if route else zones[rng.integers(len(zones))]
            events.append(EventRecord(round(t, 3), tag, zone))
            emitted += 1
            if rng.random() < spec.repeat_prob:
                t += float(rng.exponential(1.0))
                events.append(EventRecord(round(t, 3), tag, zone))
                emitted += 1
            if rng.random() < spec.overlap_prob:
                other = zones[rng.integers(len(zones))]
                if other != zone:
                    for z in (other, zone, other):
                        t += float(rng.exponential(0.5))
                        events.append(EventRecord(round(t, 3), tag, z))
                        emitted += 1
            t += float(rng.exponential(spec.mean_gap))
    events.sort(key=lambda r: (r.tag, r.t))
    return events
