#!/usr/bin/env python
import functools
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx

from conmat.core.errors import CycleError, InstanceError, NotAnInterval, UnknownElement


@dataclass(frozen=True)
class Interval:
    """Subset of a poset, members kept in the poset's element order."""

    members: tuple[str, ...]

    @property
    def key(self) -> str:
        return ",".join(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[str]:
        return iter(self.members)

    def __contains__(self, item: object) -> bool:
        return item in self.members

    def __str__(self) -> str:
        return "{" + self.key + "}"


EMPTY = Interval(())


@dataclass(frozen=True)
class Poset:
    """Finite strict partial order; `gt` holds (q, p) for q > p, transitively closed."""

    elements: tuple[str, ...]
    gt: frozenset[tuple[str, str]]

    @functools.cached_property
    def _positions(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.elements)}

    @functools.cached_property
    def heights(self) -> dict[str, int]:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.elements)
        graph.add_edges_from(self.gt)
        heights: dict[str, int] = {}
        for p in reversed(list(nx.topological_sort(graph))):
            heights[p] = max((heights[r] + 1 for r in graph.successors(p)), default=0)
        return heights

    def greater(self, q: str, p: str) -> bool:
        return (q, p) in self.gt

    def position(self, p: str) -> int:
        try:
            return self._positions[p]
        except KeyError:
            raise UnknownElement(f"unknown poset element '{p}'") from None

    def subset(self, members: Iterable[str]) -> Interval:
        """Canonically ordered subset; convexity is not checked."""
        return Interval(tuple(sorted(set(members), key=self.position)))

    def interval(self, members: Iterable[str]) -> Interval:
        candidate = self.subset(members)
        if not is_interval(self, candidate):
            raise NotAnInterval(f"{candidate} is not an interval")
        return candidate

    def union(self, *parts: Iterable[str]) -> Interval:
        return self.subset(p for part in parts for p in part)

    def image(self, members: Iterable[str], mapping: Mapping[str, str]) -> Interval:
        return self.subset(mapping[p] for p in members)

    def is_automorphism(self, mapping: Mapping[str, str]) -> bool:
        if sorted(mapping) != sorted(self.elements):
            return False
        if sorted(mapping.values()) != sorted(self.elements):
            return False
        return {(mapping[q], mapping[p]) for q, p in self.gt} == set(self.gt)

    def sort_key(self, interval: Interval) -> tuple[int, tuple[int, ...]]:
        return len(interval), tuple(self.position(p) for p in interval)


def poset_from_relations(
    elements: Sequence[str], relations: Iterable[tuple[str, str]]
) -> Poset:
    if not elements:
        raise InstanceError("a poset needs at least one element")
    if len(set(elements)) != len(elements):
        raise InstanceError(f"duplicate poset elements in {list(elements)}")

    graph = nx.DiGraph()
    graph.add_nodes_from(elements)
    for q, p in relations:
        for e in (q, p):
            if e not in graph:
                raise UnknownElement(f"relation ({q} > {p}) names unknown element '{e}'")
        if q == p:
            raise CycleError(f"relation ({q} > {p}) is reflexive")
        graph.add_edge(q, p)

    if not nx.is_directed_acyclic_graph(graph):
        cycle = " > ".join(q for q, _ in nx.find_cycle(graph))
        raise CycleError(f"relations force a cycle: {cycle}")

    closure = nx.transitive_closure_dag(graph)
    poset = Poset(tuple(elements), frozenset(closure.edges()))
    logging.debug(
        "poset on %(n)d elements with %(pairs)d ordered pairs",
        {"n": len(elements), "pairs": len(poset.gt)},
    )
    return poset


def is_interval(poset: Poset, members: Iterable[str]) -> bool:
    inside = set(members)
    for p in inside:
        poset.position(p)
    for r in poset.elements:
        if r in inside:
            continue
        above = any(poset.greater(q, r) for q in inside)
        below = any(poset.greater(r, p) for p in inside)
        if above and below:
            return False
    return True


@functools.cache
def intervals(poset: Poset) -> tuple[Interval, ...]:
    found = []
    for size in range(len(poset.elements) + 1):
        for members in combinations(poset.elements, size):
            if is_interval(poset, members):
                found.append(Interval(members))
    return tuple(found)


def _extends(poset: Poset, earlier: Interval, part: Interval) -> bool:
    if set(earlier) & set(part):
        return False
    if any(poset.greater(p, q) for p in earlier for q in part):
        return False
    return is_interval(poset, (*earlier, *part))


def is_adjacent(poset: Poset, parts: Sequence[Interval]) -> bool:
    seen: set[str] = set()
    for part in parts:
        if seen & set(part):
            return False
        seen |= set(part)
    if not is_interval(poset, seen):
        return False
    for j, lower in enumerate(parts):
        for upper in parts[j + 1 :]:
            if any(poset.greater(p, q) for p in lower for q in upper):
                return False
    return True


@functools.cache
def adjacent_tuples(
    poset: Poset, n: int, nonempty: bool = False
) -> tuple[tuple[Interval, ...], ...]:
    if n < 1:
        raise ValueError(f"tuple length must be positive, got {n}")
    candidates = [i for i in intervals(poset) if i.members or not nonempty]
    if n == 1:
        return tuple((i,) for i in candidates)

    extended = []
    for prefix in adjacent_tuples(poset, n - 1, nonempty):
        covered = poset.union(*prefix)
        for part in candidates:
            if _extends(poset, covered, part):
                extended.append((*prefix, part))
    return tuple(extended)


def noncomparable(poset: Poset, first: Interval, second: Interval) -> bool:
    return is_adjacent(poset, (first, second)) and is_adjacent(poset, (second, first))
