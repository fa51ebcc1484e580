"""Dense bit-indexed sets of fact ids."""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

# above this many ids, build/unpack masks through numpy instead of bit loops
_BULK = 4096


def mask_of(ids: Iterable[int]) -> int:
    ids = list(ids)
    if len(ids) < _BULK:
        m = 0
        for i in ids:
            m |= 1 << i
        return m
    arr = np.asarray(ids, dtype=np.int64)
    bits = np.zeros(int(arr.max()) + 1, dtype=np.uint8)
    bits[arr] = 1
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def ids_of(mask: int) -> list[int]:
    """Set bit positions of ``mask`` in increasing order."""
    if mask.bit_length() < _BULK:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out
    raw = mask.to_bytes((mask.bit_length() + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return np.flatnonzero(bits).tolist()


class FactSet:
    """Immutable set of non-negative fact ids stored as a Python int bitmask."""

    __slots__ = ("mask",)

    def __init__(self, ids: Iterable[int] = ()):
        self.mask = mask_of(ids)

    @classmethod
    def from_mask(cls, mask: int) -> FactSet:
        fs = cls.__new__(cls)
        fs.mask = mask
        return fs

    def __contains__(self, i: object) -> bool:
        return isinstance(i, int) and i >= 0 and (self.mask >> i) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter(ids_of(self.mask))

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FactSet):
            return self.mask == other.mask
        if isinstance(other, (set, frozenset)):
            return self.mask == mask_of(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.mask)

    def __or__(self, other: FactSet) -> FactSet:
        return FactSet.from_mask(self.mask | other.mask)

    def __and__(self, other: FactSet) -> FactSet:
        return FactSet.from_mask(self.mask & other.mask)

    def __sub__(self, other: FactSet) -> FactSet:
        return FactSet.from_mask(self.mask & ~other.mask)

    def __xor__(self, other: FactSet) -> FactSet:
        return FactSet.from_mask(self.mask ^ other.mask)

    def __le__(self, other: FactSet) -> bool:
        return self.mask & ~other.mask == 0

    def __lt__(self, other: FactSet) -> bool:
        return self.mask != other.mask and self <= other

    def __ge__(self, other: FactSet) -> bool:
        return other <= self

    def __gt__(self, other: FactSet) -> bool:
        return other < self

    def issubset(self, other: FactSet) -> bool:
        return self <= other

    def isdisjoint(self, other: FactSet) -> bool:
        return self.mask & other.mask == 0

    def add(self, i: int) -> FactSet:
        return FactSet.from_mask(self.mask | (1 << i))

    def remove(self, i: int) -> FactSet:
        return FactSet.from_mask(self.mask & ~(1 << i))

    def __repr__(self) -> str:
        items = ids_of(self.mask)
        if len(items) > 20:
            head = ", ".join(map(str, items[:20]))
            return f"FactSet({{{head}, ... ({len(items)} ids)}})"
        return f"FactSet({{{', '.join(map(str, items))}}})"


EMPTY = FactSet()
