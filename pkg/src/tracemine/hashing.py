"""Incremental polynomial (Karp-Rabin style) hashing of label sequences.

Hashes live in ``[0, 2**61 - 1)``. Appending a label costs one multiply-add,
so a depth-first walk can hash every emitted trace in constant time.
"""
from __future__ import annotations

import random
from typing import Iterable

MERSENNE_61 = (1 << 61) - 1
DEFAULT_HASH_SEED = 0x7E11_ACE5


class TraceHasher:
    __slots__ = ("base",)

    def __init__(self, base: int):
        if not 1 < base < MERSENNE_61 - 1:
            raise ValueError("hash base must lie in (1, 2**61 - 2)")
        self.base = base

    @classmethod
    def from_seed(cls, seed: int = DEFAULT_HASH_SEED) -> "TraceHasher":
        return cls(random.Random(seed).randrange(1 << 32, MERSENNE_61 - 1))

    def extend(self, h: int, label: int) -> int:
        # label + 1 keeps label 0 from vanishing at the front of a trace
        return (h * self.base + label + 1) % MERSENNE_61

    def hash(self, trace: Iterable[int]) -> int:
        h = 0
        base = self.base
        for label in trace:
            h = (h * base + label + 1) % MERSENNE_61
        return h

    def __repr__(self):
        return f"TraceHasher(base={self.base:#x})"


DEFAULT_HASHER = TraceHasher.from_seed()


def trace_hash(trace: Iterable[int], hasher: TraceHasher = DEFAULT_HASHER) -> int:
    return hasher.hash(trace)


def extend_hash(h: int, label: int, hasher: TraceHasher = DEFAULT_HASHER) -> int:
    return hasher.extend(h, label)


def format_hash(h: int) -> str:
    return f"{h:016x}"
