"""Timestamped tag readings -> labeled DAG.

Pipeline per tag: sort by time, replace alternating two-zone runs by an
overlap zone, merge consecutive readings of the same zone, then connect
each reading to later readings of the same tag at a different zone whose
first timestamp lies within ``delta`` minutes of its last timestamp.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace
from itertools import groupby
from typing import Iterable, Sequence, TextIO

import numpy as np

from .dag import LabeledDag, build_dag, intern_labels
from .errors import DomainError, ParseError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EventRecord:
    t: float
    tag: str
    location: str


@dataclass(frozen=True)
class CollapsedReading:
    tag: str
    label: str
    t_first: float
    t_last: float
    overlap: bool = False  # synthesized by collapse_overlap


def parse_events(stream: TextIO | Iterable[str], source: str | None = None) -> list[EventRecord]:
    """Read ``t,tag,location`` CSV rows and sort them by ``(tag, t)``.

    The header line is optional. Raises :class:`ParseError` naming the line
    for malformed rows and non-finite timestamps.
    """
    records = []
    reader = csv.reader(stream)
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if lineno == 1 and [c.strip().lower() for c in row] == ["t", "tag", "location"]:
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields (t,tag,location), got {len(row)}", line=lineno, source=source)
        t_raw, tag, loc = (c.strip() for c in row)
        try:
            t = float(t_raw)
        except ValueError:
            raise ParseError(f"bad timestamp {t_raw!r}", line=lineno, source=source) from None
        if not math.isfinite(t):
            raise ParseError(f"non-finite timestamp {t_raw!r}", line=lineno, source=source)
        if not tag or not loc:
            raise ParseError("empty tag or location", line=lineno, source=source)
        records.append(EventRecord(t, tag, loc))
    records.sort(key=lambda r: (r.tag, r.t))
    return records


def read_events(path) -> list[EventRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_events(fh, source=str(path))


def _overlap_label(x: str, y: str) -> str:
    if x.isdigit() and y.isdigit():
        a, b = sorted((int(x), int(y)))
        return str(a * 100 + b)
    a, b = sorted((x, y))
    return f"{a}×{b}"


def _as_readings(readings) -> list[CollapsedReading]:
    out = []
    for r in readings:
        if isinstance(r, EventRecord):
            out.append(CollapsedReading(r.tag, r.location, r.t, r.t))
        else:
            out.append(r)
    return out


def collapse_overlap(readings: Sequence[EventRecord | CollapsedReading]) -> list[CollapsedReading]:
    """Replace alternating runs ``(x+ y+)(x+ y+)+`` by one overlap-zone reading.

    Runs are found greedily from the left and extended as far as the
    alternation continues, rounded down to whole ``x+ y+`` pairs. Readings that
    are already overlap zones never take part in a run.
    """
    rs = _as_readings(readings)
    # blocks of consecutive equal raw labels: (label, start, stop)
    blocks = []
    for (label, synth), grp in groupby(enumerate(rs), key=lambda ir: (ir[1].label, ir[1].overlap)):
        idx = [i for i, _ in grp]
        blocks.append((label, synth, idx[0], idx[-1] + 1))

    out: list[CollapsedReading] = []
    b = 0
    while b < len(blocks):
        label, synth, start, stop = blocks[b]
        run = 1
        if not synth and b + 1 < len(blocks) and not blocks[b + 1][1]:
            run = 2
            while (
                b + run < len(blocks)
                and not blocks[b + run][1]
                and blocks[b + run][0] == blocks[b + run - 2][0]
            ):
                run += 1
        run -= run % 2
        if run >= 4:
            first = rs[start]
            last = rs[blocks[b + run - 1][3] - 1]
            out.append(CollapsedReading(
                first.tag,
                _overlap_label(label, blocks[b + 1][0]),
                first.t_first,
                last.t_last,
                overlap=True,
            ))
            b += run
        else:
            out.extend(rs[start:stop])
            b += 1
    return out


def dedup_same_zone(readings: Sequence[EventRecord | CollapsedReading]) -> list[CollapsedReading]:
    """Merge consecutive readings of the same zone into one, keeping the
    first and last timestamps."""
    out: list[CollapsedReading] = []
    for r in _as_readings(readings):
        if out and out[-1].label == r.label:
            out[-1] = replace(out[-1], t_last=r.t_last)
        else:
            out.append(r)
    return out


def clean_tag(readings: Sequence[EventRecord | CollapsedReading]) -> list[CollapsedReading]:
    return dedup_same_zone(collapse_overlap(readings))


@dataclass
class IngestResult:
    dag: LabeledDag
    readings: list[CollapsedReading]
    long_gap_merges: int

    @property
    def vertex_count(self):
        return self.dag.vertex_count

    @property
    def edge_count(self):
        return self.dag.edge_count


def _long_gaps(raw: Sequence[EventRecord], delta: float) -> int:
    # merges that hid a same-zone gap larger than delta
    n = 0
    for prev, cur in zip(raw, raw[1:]):
        if prev.location == cur.location and cur.t - prev.t > delta:
            n += 1
    return n


def ingest(events: Sequence[EventRecord], delta: float, *, allow_zero_gap: bool = False) -> IngestResult:
    """Clean the readings of every tag and build the movement DAG.

    Vertex ids follow ``(tag, t_first)`` order, so every edge points forward in
    vertex order.
    """
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    events = sorted(events, key=lambda r: (r.tag, r.t))
    readings: list[CollapsedReading] = []
    long_gaps = 0
    for _, grp in groupby(events, key=lambda r: r.tag):
        raw = list(grp)
        long_gaps += _long_gaps(raw, delta)
        readings.extend(clean_tag(raw))
    if long_gaps:
        log.warning("%d same-zone merges span more than delta=%g minutes", long_gaps, delta)

    ids = intern_labels(r.label for r in readings)
    labels = [ids[r.label] for r in readings]
    tags = [r.tag for r in readings]
    first = np.array([r.t_first for r in readings], dtype=np.float64)
    last = np.array([r.t_last for r in readings], dtype=np.float64)

    src, dst = [], []
    n = len(readings)
    for u in range(n):
        t_end = last[u]
        w = u + 1
        while w < n and tags[w] == tags[u]:
            gap = first[w] - t_end
            if gap > delta:
                break
            if labels[w] != labels[u] and (gap > 0 or (allow_zero_gap and gap == 0)):
                src.append(u)
                dst.append(w)
            w += 1
    edges = np.column_stack([np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)])
    dag = build_dag(labels, edges, {i: s for s, i in ids.items()})
    return IngestResult(dag, readings, long_gaps)


def build_event_dag(events: Sequence[EventRecord], delta: float, *, allow_zero_gap: bool = False) -> LabeledDag:
    return ingest(events, delta, allow_zero_gap=allow_zero_gap).dag


def events_to_csv(events: Iterable[EventRecord]) -> str:
    buf = io.StringIO()
    buf.write("t,tag,location\n")
    for e in events:
        buf.write(f"{e.t:g},{e.tag},{e.location}\n")
    return buf.getvalue()
