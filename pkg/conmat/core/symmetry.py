#!/usr/bin/env python
"""Finite group actions on a poset and on the summands C(p).

Elements compose as (στ)(p) = σ(τ(p)). With row-convention matrices the
module part satisfies ψ(στ)_p = ψ(τ)_p @ ψ(σ)_{τ(p)}.
"""

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from conmat.core.blockmap import BlockMap
from conmat.core.errors import InvalidAction
from conmat.core.graded import GradedMap, GradedModule, iso_check
from conmat.core.linalg import Matrix, Ring, inverse, is_invertible, kernel_basis
from conmat.core.poset import Interval, Poset


@dataclass(frozen=True)
class GroupElement:
    permutation: Mapping[str, str]
    psi: Mapping[str, GradedMap]

    def key(self, poset: Poset) -> tuple[str, ...]:
        return tuple(self.permutation[p] for p in poset.elements)

    def matrix(self, p: str, n: int) -> Matrix:
        return self.psi[p].block(n)


@dataclass(frozen=True)
class Generator:
    """User-facing generator: a poset permutation plus optional ψ blocks per degree."""

    permutation: Mapping[str, str]
    psi: Mapping[str, Mapping[int, Matrix]]


class GroupAction:
    def __init__(
        self,
        poset: Poset,
        summands: Mapping[str, GradedModule],
        elements: Sequence[GroupElement],
    ) -> None:
        self.poset = poset
        self.summands = summands
        self.elements = tuple(elements)
        index = {e.key(poset): i for i, e in enumerate(self.elements)}
        self.table = tuple(
            tuple(index[self._compose_key(a, b)] for b in self.elements)
            for a in self.elements
        )
        self._check_table()

    @classmethod
    def generate(
        cls,
        poset: Poset,
        summands: Mapping[str, GradedModule],
        generators: Sequence[Generator],
    ) -> "GroupAction":
        """Close the generators under composition; ψ must be well defined on the closure."""
        gens = [cls._element(poset, summands, g) for g in generators]
        identity = GroupElement(
            {p: p for p in poset.elements},
            {p: GradedMap.identity(summands[p]) for p in poset.elements},
        )
        elements = [identity]
        seen = {identity.key(poset): identity}
        for current in elements:
            for g in gens:
                product = cls._product(poset, summands, g, current)
                key = product.key(poset)
                if key in seen:
                    if not _same_psi(seen[key], product):
                        raise InvalidAction(
                            f"ψ is not a homomorphism: permutation {key} "
                            "arises with two different module maps"
                        )
                    continue
                seen[key] = product
                elements.append(product)
        logging.debug("group action with %d elements", len(elements))
        return cls(poset, summands, elements)

    @staticmethod
    def _element(
        poset: Poset, summands: Mapping[str, GradedModule], generator: Generator
    ) -> GroupElement:
        perm = dict(generator.permutation)
        if not poset.is_automorphism(perm):
            raise InvalidAction(f"{perm} is not an order automorphism of the poset")
        psi = {}
        for p in poset.elements:
            source, target = summands[p], summands[perm[p]]
            if dict(source.components) != dict(target.components):
                raise InvalidAction(
                    f"C({p}) and C({perm[p]}) are not isomorphic; no ψ can link them"
                )
            given = generator.psi.get(p)
            if given is None:
                blocks = {n: Matrix.identity(source.ring, source.rank(n)) for n in source.degrees()}
            else:
                blocks = dict(given)
            try:
                mapping = GradedMap(source, target, 0, blocks)
            except ValueError as e:
                raise InvalidAction(f"ψ on C({p}): {e}") from e
            for n in source.degrees():
                if not is_invertible(mapping.block(n)):
                    raise InvalidAction(f"ψ on C_{n}({p}) is not invertible")
            psi[p] = mapping
        return GroupElement(perm, psi)

    @staticmethod
    def _product(
        poset: Poset,
        summands: Mapping[str, GradedModule],
        outer: GroupElement,
        inner: GroupElement,
    ) -> GroupElement:
        perm = {p: outer.permutation[inner.permutation[p]] for p in poset.elements}
        psi = {p: inner.psi[p].then(outer.psi[inner.permutation[p]]) for p in poset.elements}
        return GroupElement(perm, psi)

    def _compose_key(self, a: GroupElement, b: GroupElement) -> tuple[str, ...]:
        return tuple(a.permutation[b.permutation[p]] for p in self.poset.elements)

    def _check_table(self) -> None:
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                expected = self._product(self.poset, self.summands, a, b)
                if not _same_psi(self.elements[self.table[i][j]], expected):
                    raise InvalidAction("ψ(στ) differs from ψ(σ)ψ(τ)")

    @property
    def order(self) -> int:
        return len(self.elements)

    def act(self, sigma: GroupElement, p: str) -> str:
        return sigma.permutation[p]

    def image(self, sigma: GroupElement, interval: Interval) -> Interval:
        return self.poset.image(interval, sigma.permutation)

    def pair_orbits(self) -> list[list[tuple[str, str]]]:
        """Orbits of strict pairs q > p, in order of first appearance."""
        pairs = sorted(
            self.poset.gt,
            key=lambda qp: (
                self.poset.heights[qp[0]],
                self.poset.position(qp[0]),
                self.poset.position(qp[1]),
            ),
        )
        orbits, placed = [], set()
        for q, p in pairs:
            if (q, p) in placed:
                continue
            orbit = []
            for sigma in self.elements:
                image = (sigma.permutation[q], sigma.permutation[p])
                if image not in orbit:
                    orbit.append(image)
            placed.update(orbit)
            orbits.append(orbit)
        return orbits

    def carrier(self, q: str, p: str, target: tuple[str, str]) -> GroupElement:
        return next(
            s
            for s in self.elements
            if (s.permutation[q], s.permutation[p]) == target
        )

    def transport(
        self, sigma: GroupElement, q: str, p: str, n: int, block: Matrix
    ) -> Matrix:
        """Block of (σq, σp) in degree n forced by the block of (q, p)."""
        return inverse(sigma.matrix(q, n)) @ block @ sigma.matrix(p, n - 1)

    def fixed_space(self, q: str, p: str, n: int) -> list[Matrix]:
        """Basis of blocks C_n(q) -> C_{n-1}(p) invariant under the stabilizer of (q, p)."""
        ring = self.summands[q].ring
        rows, cols = self.summands[q].rank(n), self.summands[p].rank(n - 1)
        stabilizer = [
            s for s in self.elements if s.permutation[q] == q and s.permutation[p] == p
        ]
        units = unit_matrices(ring, rows, cols)
        if not units:
            return []
        # x @ constraints = 0 on the flattened block x
        constraint_rows = []
        for unit in units:
            row = []
            for sigma in stabilizer:
                row += sum((unit - self.transport(sigma, q, p, n, unit)).tolist(), [])
            constraint_rows.append(row)
        basis = kernel_basis(Matrix.from_rows(ring, constraint_rows))
        return [
            Matrix.from_rows(
                ring, [flat[k * cols : (k + 1) * cols] for k in range(rows)], cols=cols
            )
            for flat in basis.tolist()
        ]

    def is_symmetric(self, delta: BlockMap) -> bool:
        for sigma in self.elements:
            for q in self.poset.elements:
                for p in self.poset.elements:
                    there = delta.block(sigma.permutation[q], sigma.permutation[p])
                    here = delta.block(q, p)
                    for n in delta.window:
                        left = here.block(n) @ sigma.matrix(p, n - 1)
                        right = sigma.matrix(q, n) @ there.block(n)
                        if left != right:
                            return False
        return True

    def non_invariant_data(
        self, index_data: Mapping[Interval, GradedModule]
    ) -> Optional[tuple[Interval, Interval]]:
        """First pair (I, σI) with data whose modules are not isomorphic."""
        for sigma in self.elements:
            for interval, module in index_data.items():
                moved = self.image(sigma, interval)
                other = index_data.get(moved)
                if other is not None and not iso_check(module, other):
                    return interval, moved
        return None


def unit_matrices(ring: Ring, rows: int, cols: int) -> list[Matrix]:
    """Matrices E_kl in row-major order."""
    units = []
    for k in range(rows):
        for col in range(cols):
            unit = Matrix.zeros(ring, rows, cols).array()
            unit[k, col] = ring.element(1)
            units.append(Matrix(ring, unit))
    return units


def _same_psi(a: GroupElement, b: GroupElement) -> bool:
    return all(a.psi[p] == b.psi[p] for p in a.psi)
