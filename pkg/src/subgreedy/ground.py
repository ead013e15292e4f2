"""Ground-set elements and simple partition matroids.

Elements are plain strings. A set of elements is a ``frozenset[str]``. Part
order given at construction is the canonical 0..m-1 index order used by
arrival permutations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DuplicateName, EmptyPart, InvalidName, OverlappingParts, UnknownElement

ElementSet = frozenset

_BAD_NAME = re.compile(r"[\s,]")


def check_name(name: str, what: str = "element") -> str:
    if not isinstance(name, str) or not name or _BAD_NAME.search(name):
        raise InvalidName(f"invalid {what} name {name!r}: must be non-empty, no whitespace or commas")
    return name


@dataclass(frozen=True)
class PartitionMatroid:
    """Disjoint non-empty named parts covering the ground set.

    Use :func:`make_partition` to build one; it validates the invariants.
    """

    parts: tuple[tuple[str, tuple[str, ...]], ...]
    _part_of: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self._part_of is None:
            index = {u: k for k, (_, elems) in enumerate(self.parts) for u in elems}
            object.__setattr__(self, "_part_of", index)

    @property
    def m(self) -> int:
        return len(self.parts)

    @property
    def part_names(self) -> list[str]:
        return [name for name, _ in self.parts]

    @property
    def ground_set(self) -> frozenset:
        return frozenset(self._part_of)

    def elements(self) -> list[str]:
        """All elements, part by part, in construction order."""
        return [u for _, elems in self.parts for u in elems]

    def part(self, k: int) -> tuple[str, ...]:
        return self.parts[k][1]

    def part_index(self, name: str) -> int:
        for k, (pname, _) in enumerate(self.parts):
            if pname == name:
                return k
        raise KeyError(name)

    def part_of(self, u: str) -> int:
        try:
            return self._part_of[u]
        except KeyError:
            raise UnknownElement(u) from None

    def check_subset(self, S: Iterable[str]) -> frozenset:
        S = frozenset(S)
        unknown = S - self._part_of.keys()
        if unknown:
            raise UnknownElement(", ".join(sorted(unknown)))
        return S

    def is_independent(self, S: Iterable[str]) -> bool:
        return is_independent(self, S)

    def is_base(self, S: Iterable[str]) -> bool:
        return is_base(self, S)


def make_partition(parts: Sequence[tuple[str, Iterable[str]]]) -> PartitionMatroid:
    if not parts:
        raise EmptyPart("a partition matroid needs at least one part")
    seen_parts: set[str] = set()
    owner: dict[str, str] = {}
    frozen = []
    for pname, elems in parts:
        check_name(pname, "part")
        if pname in seen_parts:
            raise DuplicateName(f"part name {pname!r} used twice")
        seen_parts.add(pname)
        elems = tuple(elems)
        if not elems:
            raise EmptyPart(f"part {pname!r} is empty")
        for u in elems:
            check_name(u)
            if u in owner:
                if owner[u] == pname:
                    raise DuplicateName(f"element {u!r} listed twice in part {pname!r}")
                raise OverlappingParts(f"element {u!r} is in both {owner[u]!r} and {pname!r}")
            owner[u] = pname
        frozen.append((pname, elems))
    return PartitionMatroid(tuple(frozen))


def _part_counts(M: PartitionMatroid, S) -> list[int]:
    counts = [0] * M.m
    for u in M.check_subset(S):
        counts[M.part_of(u)] += 1
    return counts


def is_independent(M: PartitionMatroid, S: Iterable[str]) -> bool:
    return all(c <= 1 for c in _part_counts(M, S))


def is_base(M: PartitionMatroid, S: Iterable[str]) -> bool:
    return all(c == 1 for c in _part_counts(M, S))
