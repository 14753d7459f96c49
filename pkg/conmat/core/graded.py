#!/usr/bin/env python
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Sequence

from conmat.core.errors import DimensionMismatch, RingMismatch
from conmat.core.linalg import Matrix, Ring, RingKind, rank, smith_normal_form


@dataclass(frozen=True)
class Component:
    free_rank: int
    torsion: tuple[int, ...] = ()

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion


def _normalize_torsion(ring: Ring, factors: Sequence[int]) -> tuple[int, ...]:
    factors = [abs(int(d)) for d in factors if abs(int(d)) != 1]
    if not factors:
        return ()
    if any(d == 0 for d in factors):
        raise ValueError("torsion factor 0 is a free summand; list it as rank")
    diagonal = [[factors[i] if i == j else 0 for j in range(len(factors))] for i in range(len(factors))]
    return smith_normal_form(Matrix.from_rows(ring, diagonal)).invariant_factors


@dataclass(frozen=True)
class GradedModule:
    """Finitely generated graded module; degree n -> (free rank, invariant factors)."""

    ring: Ring
    components: Mapping[int, Component] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned = {}
        for degree in sorted(self.components):
            component = self.components[degree]
            if component.free_rank < 0:
                raise ValueError(f"negative rank in degree {degree}")
            if component.torsion and self.ring.kind is not RingKind.INTEGERS:
                raise ValueError(f"torsion over the field {self.ring} in degree {degree}")
            torsion = _normalize_torsion(self.ring, component.torsion)
            if component.free_rank or torsion:
                cleaned[int(degree)] = Component(component.free_rank, torsion)
        object.__setattr__(self, "components", MappingProxyType(cleaned))

    def degrees(self) -> list[int]:
        return list(self.components)

    def component(self, degree: int) -> Component:
        return self.components.get(degree, Component(0))

    def rank(self, degree: int) -> int:
        return self.component(degree).free_rank

    def torsion(self, degree: int) -> tuple[int, ...]:
        return self.component(degree).torsion

    def is_free(self) -> bool:
        return all(not c.torsion for c in self.components.values())

    def is_zero(self) -> bool:
        return not self.components

    def euler_characteristic(self) -> int:
        return sum((-1) ** (n % 2) * c.free_rank for n, c in self.components.items())

    def describe(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for degree, component in self.components.items():
            summands = []
            if component.free_rank:
                summands.append(f"{self.ring}^{component.free_rank}")
            summands += [f"Z/{d}" for d in component.torsion]
            parts.append(f"H_{degree} = " + " + ".join(summands))
        return ", ".join(parts)


def graded_from_ranks(ring: Ring, ranks: Mapping[int, int]) -> GradedModule:
    return GradedModule(ring, {int(n): Component(int(r)) for n, r in ranks.items()})


def graded_from_index(ring: Ring, n: int) -> GradedModule:
    return graded_from_ranks(ring, {n: 1})


def graded_from_presentation(
    ring: Ring, presentation: Mapping[int, tuple[int, Sequence[Sequence[Any]]]]
) -> GradedModule:
    """Degree n -> (generator count, relation rows); each component is R^g / rowspace."""
    components = {}
    for degree, (generators, relations) in presentation.items():
        relations_matrix = Matrix.from_rows(ring, relations, cols=generators)
        if ring.kind is RingKind.INTEGERS:
            factors = smith_normal_form(relations_matrix).invariant_factors
            free = generators - len(factors)
            components[int(degree)] = Component(free, tuple(d for d in factors if d > 1))
        else:
            components[int(degree)] = Component(generators - rank(relations_matrix))
    return GradedModule(ring, components)


def iso_check(first: GradedModule, second: GradedModule) -> bool:
    if first.ring != second.ring:
        raise RingMismatch(f"modules over {first.ring} and {second.ring}")
    return dict(first.components) == dict(second.components)


@dataclass(frozen=True)
class DirectSum:
    module: GradedModule
    offsets: Mapping[int, tuple[int, ...]]

    def coordinates(self, summand: int, degree: int, width: int) -> range:
        start = self.offsets[degree][summand]
        return range(start, start + width)


def direct_sum(modules: Sequence[GradedModule], ring: Ring | None = None) -> DirectSum:
    rings = {m.ring for m in modules}
    if len(rings) > 1:
        raise RingMismatch(f"direct sum over mixed rings {sorted(map(str, rings))}")
    ring = next(iter(rings)) if rings else ring
    if ring is None:
        raise ValueError("direct sum of no modules needs an explicit ring")

    degrees = sorted({n for m in modules for n in m.degrees()})
    components: dict[int, Component] = {}
    offsets: dict[int, tuple[int, ...]] = {}
    for n in degrees:
        running, starts, torsion = 0, [], []
        for m in modules:
            starts.append(running)
            running += m.rank(n)
            torsion += m.torsion(n)
        components[n] = Component(running, tuple(torsion))
        offsets[n] = tuple(starts)
    return DirectSum(GradedModule(ring, components), MappingProxyType(offsets))


@dataclass(frozen=True)
class GradedMap:
    """Degree-shifting map of free parts; block n maps C_n(source) -> C_{n+degree}(target)."""

    source: GradedModule
    target: GradedModule
    degree: int
    blocks: Mapping[int, Matrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.source.ring != self.target.ring:
            raise RingMismatch("graded map between modules over different rings")
        for n, block in self.blocks.items():
            expected = (self.source.rank(n), self.target.rank(n + self.degree))
            if block.shape != expected:
                raise DimensionMismatch(
                    f"block in degree {n} has shape {block.shape}, expected {expected}"
                )
            if block.ring != self.source.ring:
                raise RingMismatch(f"block in degree {n} is over {block.ring}")
        kept = {n: b for n, b in sorted(self.blocks.items()) if not b.is_zero()}
        object.__setattr__(self, "blocks", MappingProxyType(kept))

    @classmethod
    def zero(cls, source: GradedModule, target: GradedModule, degree: int) -> "GradedMap":
        return cls(source, target, degree)

    @classmethod
    def identity(cls, module: GradedModule) -> "GradedMap":
        return cls(
            module,
            module,
            0,
            {n: Matrix.identity(module.ring, module.rank(n)) for n in module.degrees()},
        )

    @property
    def ring(self) -> Ring:
        return self.source.ring

    def block(self, n: int) -> Matrix:
        stored = self.blocks.get(n)
        if stored is not None:
            return stored
        return Matrix.zeros(self.ring, self.source.rank(n), self.target.rank(n + self.degree))

    def is_zero(self) -> bool:
        return not self.blocks

    def then(self, other: "GradedMap") -> "GradedMap":
        """Composite `self` followed by `other` (row convention product)."""
        if self.target != other.source:
            raise DimensionMismatch("graded maps do not compose")
        blocks = {
            n: self.block(n) @ other.block(n + self.degree) for n in self.source.degrees()
        }
        return GradedMap(self.source, other.target, self.degree + other.degree, blocks)
