#!/usr/bin/env python
"""Poset-indexed boundary maps, their interval restrictions and homology.

A block (q, p) is a degree -1 map C(q) -> C(p). Restricting to an interval I
gives the chain complex C^Δ(I); for an adjacent pair (I, J) the coordinate
inclusion and projection make 0 -> C^Δ(I) -> C^Δ(IJ) -> C^Δ(J) -> 0 short
exact, and the long exact sequence in homology is checked explicitly.
"""

import functools
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from sympy import primefactors

from conmat.core.errors import (
    DimensionMismatch,
    NotAComplex,
    NotAdjacent,
    NotAField,
    NotAnInterval,
    ShapeMismatch,
)
from conmat.core.graded import (
    Component,
    DirectSum,
    GradedMap,
    GradedModule,
    direct_sum,
)
from conmat.core.linalg import (
    Matrix,
    Ring,
    RingKind,
    kernel_basis,
    rank,
    row_space_basis,
    smith_normal_form,
    solve_left,
    stack,
)
from conmat.core.poset import Interval, Poset, is_adjacent, is_interval


@dataclass(frozen=True)
class BlockMap:
    poset: Poset
    summands: Mapping[str, GradedModule]
    blocks: Mapping[tuple[str, str], GradedMap] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if set(self.summands) != set(self.poset.elements):
            raise ShapeMismatch("summands must be given for exactly the poset elements")
        for (q, p), block in self.blocks.items():
            if block.degree != -1:
                raise ShapeMismatch(f"block ({q},{p}) has degree {block.degree}, not -1")
            if block.source != self.summands[q] or block.target != self.summands[p]:
                raise ShapeMismatch(f"block ({q},{p}) does not map C({q}) -> C({p})")
        kept = {
            key: self.blocks[key]
            for key in sorted(
                self.blocks,
                key=lambda k: (self.poset.position(k[0]), self.poset.position(k[1])),
            )
            if not self.blocks[key].is_zero()
        }
        object.__setattr__(self, "summands", MappingProxyType(dict(self.summands)))
        object.__setattr__(self, "blocks", MappingProxyType(kept))

    @classmethod
    def from_matrices(
        cls,
        poset: Poset,
        summands: Mapping[str, GradedModule],
        matrices: Mapping[tuple[str, str], Mapping[int, Matrix]],
    ) -> "BlockMap":
        blocks = {
            (q, p): GradedMap(summands[q], summands[p], -1, dict(per_degree))
            for (q, p), per_degree in matrices.items()
        }
        return cls(poset, summands, blocks)

    @property
    def ring(self) -> Ring:
        return self.summands[self.poset.elements[0]].ring

    @functools.cached_property
    def total(self) -> DirectSum:
        return direct_sum([self.summands[p] for p in self.poset.elements], self.ring)

    @functools.cached_property
    def window(self) -> range:
        degrees = [n for m in self.summands.values() for n in m.degrees()]
        if not degrees:
            return range(0)
        return range(min(degrees) - 1, max(degrees) + 2)

    def block(self, q: str, p: str) -> GradedMap:
        stored = self.blocks.get((q, p))
        if stored is not None:
            return stored
        return GradedMap.zero(self.summands[q], self.summands[p], -1)

    def is_lower_triangular(self, strict: bool = False) -> bool:
        for q, p in self.blocks:
            if q == p and strict:
                return False
            if q != p and not self.poset.greater(q, p):
                return False
        return True

    def coordinates(self, members: Iterable[str], n: int) -> list[int]:
        """Positions of C_n(members) inside C_n(P), in poset order."""
        offsets = self.total.offsets.get(n)
        if offsets is None:
            return []
        coords = []
        for p in sorted(members, key=self.poset.position):
            start = offsets[self.poset.position(p)]
            coords.extend(range(start, start + self.summands[p].rank(n)))
        return coords

    @functools.cached_property
    def _differentials(self) -> dict[int, Matrix]:
        assembled = {}
        for n in self.window:
            out = Matrix.zeros(
                self.ring, self.total.module.rank(n), self.total.module.rank(n - 1)
            ).array()
            for (q, p), block in self.blocks.items():
                piece = block.block(n)
                if piece.rows == 0 or piece.cols == 0:
                    continue
                rows = self.coordinates([q], n)
                cols = self.coordinates([p], n - 1)
                out[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = piece.array()
            assembled[n] = Matrix(self.ring, out)
        return assembled

    def differential(self, n: int) -> Matrix:
        """Total Δ_n : C_n(P) -> C_{n-1}(P)."""
        stored = self._differentials.get(n)
        if stored is not None:
            return stored
        return Matrix.zeros(
            self.ring, self.total.module.rank(n), self.total.module.rank(n - 1)
        )

    def base_change(self, ring: Ring) -> "BlockMap":
        def over(module: GradedModule) -> GradedModule:
            return GradedModule(
                ring, {n: Component(c.free_rank) for n, c in module.components.items()}
            )

        summands = {p: over(m) for p, m in self.summands.items()}
        matrices = {
            key: {n: b.change_ring(ring) for n, b in block.blocks.items()}
            for key, block in self.blocks.items()
        }
        return BlockMap.from_matrices(self.poset, summands, matrices)


@dataclass(frozen=True)
class ChainComplexInstance:
    interval: Interval
    ring: Ring
    modules: Mapping[int, int]
    differentials: Mapping[int, Matrix]

    def rank(self, n: int) -> int:
        return self.modules.get(n, 0)

    def degrees(self) -> list[int]:
        return sorted(self.modules)

    def differential(self, n: int) -> Matrix:
        stored = self.differentials.get(n)
        if stored is not None:
            return stored
        return Matrix.zeros(self.ring, self.rank(n), self.rank(n - 1))

    def check(self) -> None:
        for n in self.degrees():
            if not (self.differential(n) @ self.differential(n - 1)).is_zero():
                raise NotAComplex(f"d_{n} d_{n - 1} != 0 on {self.interval}")


def restrict(delta: BlockMap, interval: Interval) -> ChainComplexInstance:
    if not is_interval(delta.poset, interval):
        raise NotAnInterval(f"{interval} is not an interval")
    modules, differentials = {}, {}
    for n in delta.window:
        modules[n] = len(delta.coordinates(interval, n))
    for n in delta.window:
        differentials[n] = delta.differential(n).submatrix(
            delta.coordinates(interval, n), delta.coordinates(interval, n - 1)
        )
    return ChainComplexInstance(
        interval,
        delta.ring,
        MappingProxyType({n: r for n, r in modules.items() if r}),
        MappingProxyType(differentials),
    )


def boundary_defect(delta: BlockMap, q: str, p: str, n: int) -> Matrix:
    """Block (q, p) of Δ∘Δ on C_n(q) -> C_{n-2}(p)."""
    total = Matrix.zeros(delta.ring, delta.summands[q].rank(n), delta.summands[p].rank(n - 2))
    for r in delta.poset.elements:
        first, second = delta.blocks.get((q, r)), delta.blocks.get((r, p))
        if first is None or second is None:
            continue
        total = total + first.block(n) @ second.block(n - 1)
    return total


def check_boundary(delta: BlockMap) -> bool:
    return all(
        (delta.differential(n) @ delta.differential(n - 1)).is_zero() for n in delta.window
    )


def homology(complex_: ChainComplexInstance) -> GradedModule:
    complex_.check()
    ring = complex_.ring
    components = {}
    for n in complex_.degrees():
        outgoing = complex_.differential(n)
        incoming = complex_.differential(n + 1)
        free = complex_.rank(n) - rank(outgoing) - rank(incoming)
        torsion: tuple[int, ...] = ()
        if ring.kind is RingKind.INTEGERS and incoming.rows and incoming.cols:
            torsion = tuple(
                d for d in smith_normal_form(incoming).invariant_factors if d > 1
            )
        components[n] = (free, torsion)
    return GradedModule(ring, {n: Component(f, t) for n, (f, t) in components.items()})


@dataclass(frozen=True)
class HomologyBasis:
    """Cycle representatives of H_n over a field, complementing the boundaries."""

    representatives: Matrix
    boundaries: Matrix

    @property
    def dimension(self) -> int:
        return self.representatives.rows

    def coordinates(self, cycles: Matrix) -> Matrix:
        basis = stack(self.representatives, self.boundaries)
        rows = []
        for i in range(cycles.rows):
            solution = solve_left(basis, cycles.row(i))
            if solution is None:
                raise NotAComplex("vector is not a cycle of this complex")
            rows.append(solution.tolist()[0][: self.dimension])
        return Matrix.from_rows(cycles.ring, rows, cols=self.dimension)


def homology_basis(complex_: ChainComplexInstance, n: int) -> HomologyBasis:
    if not complex_.ring.is_field:
        raise NotAField(f"explicit homology classes need a field, got {complex_.ring}")
    cycles = kernel_basis(complex_.differential(n))
    boundaries = row_space_basis(complex_.differential(n + 1))
    chosen = Matrix.zeros(complex_.ring, 0, complex_.rank(n))
    spanned = boundaries
    for i in range(cycles.rows):
        candidate = stack(spanned, cycles.row(i))
        if rank(candidate) > spanned.rows:
            chosen = stack(chosen, cycles.row(i))
            spanned = candidate
    return HomologyBasis(chosen, boundaries)


def _coordinate_map(
    delta: BlockMap, source: Iterable[str], target: Iterable[str], n: int
) -> Matrix:
    rows = delta.coordinates(source, n)
    cols = delta.coordinates(target, n)
    out = Matrix.zeros(delta.ring, len(rows), len(cols)).array()
    position = {c: j for j, c in enumerate(cols)}
    for i, c in enumerate(rows):
        if c in position:
            out[i, position[c]] = delta.ring.element(1)
    return Matrix(delta.ring, out)


def inclusion_matrix(delta: BlockMap, part: Interval, whole: Interval, n: int) -> Matrix:
    """Chain-level i(I, IJ) in degree n."""
    if not set(part) <= set(whole):
        raise DimensionMismatch(f"{part} is not contained in {whole}")
    return _coordinate_map(delta, part, whole, n)


def projection_matrix(delta: BlockMap, whole: Interval, part: Interval, n: int) -> Matrix:
    """Chain-level p(IJ, J) in degree n."""
    if not set(part) <= set(whole):
        raise DimensionMismatch(f"{part} is not contained in {whole}")
    return _coordinate_map(delta, whole, part, n)


class _Bases:
    def __init__(self, delta: BlockMap) -> None:
        self.delta = delta
        self._complexes: dict[Interval, ChainComplexInstance] = {}
        self._bases: dict[tuple[Interval, int], HomologyBasis] = {}

    def complex(self, interval: Interval) -> ChainComplexInstance:
        if interval not in self._complexes:
            self._complexes[interval] = restrict(self.delta, interval)
        return self._complexes[interval]

    def basis(self, interval: Interval, n: int) -> HomologyBasis:
        if (interval, n) not in self._bases:
            self._bases[(interval, n)] = homology_basis(self.complex(interval), n)
        return self._bases[(interval, n)]


def _require_adjacent(delta: BlockMap, first: Interval, second: Interval) -> Interval:
    if not is_adjacent(delta.poset, (first, second)):
        raise NotAdjacent(f"({first}, {second}) is not an adjacent pair")
    return delta.poset.union(first, second)


def _connecting(bases: _Bases, first: Interval, second: Interval, n: int) -> Matrix:
    delta = bases.delta
    whole = delta.poset.union(first, second)
    source = bases.basis(second, n)
    target = bases.basis(first, n - 1)
    lifted = source.representatives @ inclusion_matrix(delta, second, whole, n)
    image = lifted @ bases.complex(whole).differential(n)
    landed = image @ projection_matrix(delta, whole, first, n - 1)
    return target.coordinates(landed)


def connecting_homomorphism(
    delta: BlockMap, first: Interval, second: Interval, n: int
) -> Matrix:
    """∂: H_n(J) -> H_{n-1}(I) in the chosen homology bases (rows index H_n(J))."""
    _require_adjacent(delta, first, second)
    return _connecting(_Bases(delta), first, second, n)


@dataclass(frozen=True)
class SequenceMap:
    label: str
    matrix: Matrix


def long_exact_sequence(
    delta: BlockMap, first: Interval, second: Interval
) -> list[SequenceMap]:
    """... -> H_n(I) -> H_n(IJ) -> H_n(J) -> H_{n-1}(I) -> ..., top degree first."""
    whole = _require_adjacent(delta, first, second)
    bases = _Bases(delta)
    sequence = []
    for n in reversed(delta.window):
        include = bases.basis(first, n).representatives @ inclusion_matrix(
            delta, first, whole, n
        )
        project = bases.basis(whole, n).representatives @ projection_matrix(
            delta, whole, second, n
        )
        sequence += [
            SequenceMap(
                f"i: H_{n}{first} -> H_{n}{whole}",
                bases.basis(whole, n).coordinates(include),
            ),
            SequenceMap(
                f"p: H_{n}{whole} -> H_{n}{second}",
                bases.basis(second, n).coordinates(project),
            ),
            SequenceMap(
                f"d: H_{n}{second} -> H_{n - 1}{first}",
                _connecting(bases, first, second, n),
            ),
        ]
    return sequence


def is_exact(sequence: list[SequenceMap]) -> bool:
    for incoming, outgoing in zip(sequence, sequence[1:]):
        if incoming.matrix.cols != outgoing.matrix.rows:
            raise DimensionMismatch(f"{incoming.label} does not feed {outgoing.label}")
        if not (incoming.matrix @ outgoing.matrix).is_zero():
            logging.debug("composite %s ; %s is nonzero", incoming.label, outgoing.label)
            return False
        if rank(incoming.matrix) + rank(outgoing.matrix) != incoming.matrix.cols:
            logging.debug("sequence not exact between %s and %s", incoming.label, outgoing.label)
            return False
    return True


def _check_fields(delta: BlockMap, intervals: Iterable[Interval]) -> list[Ring]:
    if delta.ring.is_field:
        return [delta.ring]
    primes: set[int] = set()
    for interval in intervals:
        module = homology(restrict(delta, interval))
        for n in module.degrees():
            for d in module.torsion(n):
                primes.update(primefactors(d))
    return [delta.ring.fraction_field()] + [Ring.gf(p) for p in sorted(primes)]


def verify_triangle(
    delta: BlockMap, first: Interval, second: Interval, rings: Optional[list[Ring]] = None
) -> bool:
    """Exactness of the homology long exact sequence of the pair (first, second).

    Over Z the sequence is checked after base change to Q and to GF(p) for each
    prime p dividing a torsion coefficient of H(I), H(J) or H(IJ).
    """
    whole = _require_adjacent(delta, first, second)
    for ring in rings or _check_fields(delta, (first, second, whole)):
        target = delta if ring == delta.ring else delta.base_change(ring)
        if not is_exact(long_exact_sequence(target, first, second)):
            logging.info(
                "exactness fails for (%(first)s, %(second)s) over %(ring)s",
                {"first": first, "second": second, "ring": ring},
            )
            return False
    return True
