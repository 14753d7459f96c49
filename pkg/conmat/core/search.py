#!/usr/bin/env python
"""Depth-first enumeration of connection and C-connection matrices.

Unknown scalars are grouped into parameters. Without symmetry each scalar is
its own parameter; with a group action each parameter is one basis element of
the stabilizer-invariant blocks of an orbit representative, transported along
the orbit. Every constraint is evaluated as soon as all parameters it depends
on are assigned.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Mapping, Optional, Sequence

from conmat.core.blockmap import (
    BlockMap,
    boundary_defect,
    check_boundary,
    homology,
    restrict,
    verify_triangle,
)
from conmat.core.errors import (
    InfeasibleDiagonal,
    InstanceError,
    InvalidAction,
    NotAComplex,
    RingMismatch,
    ShapeMismatch,
    UnsupportedRing,
)
from conmat.core.graded import GradedMap, GradedModule, iso_check
from conmat.core.linalg import Matrix, Ring, scale
from conmat.core.poset import Interval, Poset, adjacent_tuples, is_interval
from conmat.core.symmetry import Generator, GroupAction, unit_matrices


class Mode(str, Enum):
    CONNECTION = "connection"
    C_CONNECTION = "c-connection"


@dataclass(frozen=True)
class Instance:
    poset: Poset
    ring: Ring
    summands: Mapping[str, GradedModule]
    index_data: Mapping[Interval, GradedModule]
    mode: Mode = Mode.CONNECTION
    diagonal: Mapping[str, GradedMap] = field(default_factory=dict)
    symmetry: Optional[GroupAction] = None

    def __post_init__(self) -> None:
        _require_singletons(self.poset, self.index_data)
        if set(self.summands) != set(self.poset.elements):
            raise InstanceError("summands must be given for exactly the poset elements")
        for interval, module in self.index_data.items():
            if not is_interval(self.poset, interval):
                raise InstanceError(f"index data given for {interval}, which is not an interval")
            if module.ring != self.ring:
                raise RingMismatch(f"index data of {interval} is over {module.ring}, not {self.ring}")
        for p, module in self.summands.items():
            if module.ring != self.ring:
                raise RingMismatch(f"C({p}) is over {module.ring}, not {self.ring}")
            if not module.is_free():
                raise InstanceError(f"C({p}) must be free, got {module.describe()}")

        if self.mode is Mode.CONNECTION:
            if self.diagonal:
                raise InstanceError("connection mode takes no diagonal differentials")
            for p in self.poset.elements:
                if not iso_check(self.summands[p], self.index_data[Interval((p,))]):
                    raise InstanceError(
                        f"C({p}) = {self.summands[p].describe()} differs from its index data"
                    )
        else:
            self._check_diagonal()

        if self.symmetry is not None and self.diagonal:
            if not self.symmetry.is_symmetric(self.fixed_part()):
                raise InvalidAction("ψ does not commute with the diagonal differentials")

    @classmethod
    def create(
        cls,
        poset: Poset,
        ring: Ring,
        index_data: Mapping[Interval, GradedModule],
        mode: Mode = Mode.CONNECTION,
        summands: Optional[Mapping[str, GradedModule]] = None,
        diagonal: Optional[Mapping[str, GradedMap]] = None,
        generators: Sequence[Generator] = (),
    ) -> "Instance":
        """Fill in defaults: C(p) = G(p) in connection mode, group closure of the generators."""
        if summands is None:
            if mode is Mode.C_CONNECTION:
                raise InstanceError("c-connection mode needs the complexes (C(p), δ(p))")
            _require_singletons(poset, index_data)
            summands = {p: index_data[Interval((p,))] for p in poset.elements}
        symmetry = None
        if generators:
            symmetry = GroupAction.generate(poset, summands, generators)
        return cls(
            poset, ring, summands, index_data, mode, dict(diagonal or {}), symmetry
        )

    def _check_diagonal(self) -> None:
        for p, delta in self.diagonal.items():
            if p not in self.summands:
                raise InstanceError(f"diagonal differential for unknown element '{p}'")
            if delta.source != self.summands[p] or delta.target != self.summands[p]:
                raise InstanceError(f"δ({p}) does not act on C({p})")
            if delta.degree != -1:
                raise InstanceError(f"δ({p}) has degree {delta.degree}, not -1")
        fixed = self.fixed_part()
        for p in self.poset.elements:
            for n in fixed.window:
                if not boundary_defect(fixed, p, p, n).is_zero():
                    raise InfeasibleDiagonal(f"δ({p})∘δ({p}) != 0 in degree {n}")
            local = homology(restrict(fixed, Interval((p,))))
            if not iso_check(local, self.index_data[Interval((p,))]):
                raise InstanceError(
                    f"homology of (C({p}), δ({p})) is {local.describe()}, "
                    f"index data says {self.index_data[Interval((p,))].describe()}"
                )

    def fixed_part(self) -> BlockMap:
        """The diagonal blocks δ(p); empty in connection mode."""
        return BlockMap(
            self.poset,
            self.summands,
            {(p, p): d for p, d in self.diagonal.items()},
        )


def _require_singletons(poset: Poset, index_data: Mapping[Interval, GradedModule]) -> None:
    missing = [p for p in poset.elements if Interval((p,)) not in index_data]
    if missing:
        raise InstanceError(f"index data missing for singletons {missing}")


@dataclass(frozen=True, order=True)
class Variable:
    q: str
    p: str
    degree: int
    row: int
    col: int

    def __str__(self) -> str:
        return f"Δ({self.q},{self.p})_{self.degree}[{self.row},{self.col}]"


def unknown_blocks(inst: Instance) -> list[Variable]:
    poset = inst.poset
    pairs = sorted(
        poset.gt,
        key=lambda qp: (poset.heights[qp[0]], poset.position(qp[0]), poset.position(qp[1])),
    )
    variables = []
    for q, p in pairs:
        source, target = inst.summands[q], inst.summands[p]
        for n in source.degrees():
            for row in range(source.rank(n)):
                for col in range(target.rank(n - 1)):
                    variables.append(Variable(q, p, n, row, col))
    return variables


def scalar_vector(delta: BlockMap, variables: Sequence[Variable]) -> tuple[Any, ...]:
    return tuple(
        delta.block(v.q, v.p).block(v.degree).entry(v.row, v.col) for v in variables
    )


def is_symmetric(inst: Instance, delta: BlockMap) -> bool:
    return inst.symmetry is None or inst.symmetry.is_symmetric(delta)


BlockKey = tuple[str, str, int]


@dataclass(frozen=True)
class _Parameter:
    contributions: tuple[tuple[BlockKey, Matrix], ...]


@dataclass
class _Counter:
    explored: int = 0
    pruned: int = 0


class _SquareCheck:
    def __init__(self, q: str, p: str, n: int) -> None:
        self.q, self.p, self.n = q, p, n

    def holds(self, delta: BlockMap) -> bool:
        return boundary_defect(delta, self.q, self.p, self.n).is_zero()

    def __str__(self) -> str:
        return f"Δ² block ({self.q},{self.p}) in degree {self.n}"


class _HomologyCheck:
    def __init__(self, interval: Interval, expected: GradedModule) -> None:
        self.interval, self.expected = interval, expected

    def holds(self, delta: BlockMap) -> bool:
        try:
            return iso_check(homology(restrict(delta, self.interval)), self.expected)
        except NotAComplex:
            return False

    def __str__(self) -> str:
        return f"homology of {self.interval}"


class _Plan:
    def __init__(self, inst: Instance, parameters: Sequence[_Parameter]) -> None:
        self.inst = inst
        self.parameters = tuple(parameters)
        self.variables = unknown_blocks(inst)
        self.fixed: dict[BlockKey, Matrix] = {
            (p, p, n): m
            for p, d in inst.diagonal.items()
            for n, m in d.blocks.items()
        }
        self.checks: dict[int, list[Any]] = {}
        self._schedule()

    def _schedule(self) -> None:
        last: dict[BlockKey, int] = {key: -1 for key in self.fixed}
        for index, parameter in enumerate(self.parameters):
            for key, _ in parameter.contributions:
                last[key] = index

        poset, window = self.inst.poset, self.inst.fixed_part().window
        squares = 0
        for q, p in sorted(poset.gt, key=lambda qp: tuple(map(poset.position, qp))):
            for n in window:
                depths = [
                    max(last[(q, r, n)], last[(r, p, n - 1)])
                    for r in poset.elements
                    if (q, r, n) in last and (r, p, n - 1) in last
                ]
                if depths:
                    self.checks.setdefault(max(depths), []).append(_SquareCheck(q, p, n))
                    squares += 1

        ordered = sorted(self.inst.index_data, key=poset.sort_key)
        for interval in ordered:
            # singletons are settled when the instance is built
            if len(interval) == 1:
                continue
            depth = max(
                (d for (q, p, _), d in last.items() if q != p and q in interval and p in interval),
                default=-1,
            )
            self.checks.setdefault(depth, []).append(
                _HomologyCheck(interval, self.inst.index_data[interval])
            )
        logging.debug(
            "search plan: %(params)d parameters, %(squares)d square checks, %(levels)d check levels",
            {"params": len(self.parameters), "squares": squares, "levels": len(self.checks)},
        )

    def block_map(self, blocks: Mapping[BlockKey, Matrix]) -> BlockMap:
        matrices: dict[tuple[str, str], dict[int, Matrix]] = {}
        for (q, p, n), m in blocks.items():
            matrices.setdefault((q, p), {})[n] = m
        return BlockMap.from_matrices(self.inst.poset, self.inst.summands, matrices)

    def passes(self, depth: int, blocks: Mapping[BlockKey, Matrix]) -> bool:
        checks = self.checks.get(depth)
        if not checks:
            return True
        delta = self.block_map(blocks)
        for check in checks:
            if not check.holds(delta):
                logging.debug("pruned at depth %(depth)d: %(check)s", {"depth": depth, "check": check})
                return False
        return True

    def assign(
        self, blocks: dict[BlockKey, Matrix], depth: int, value: int
    ) -> dict[BlockKey, Matrix]:
        if value == 0:
            return blocks
        updated = dict(blocks)
        for key, m in self.parameters[depth].contributions:
            term = scale(m, value)
            updated[key] = updated[key] + term if key in updated else term
        return updated

    def descend(
        self, depth: int, blocks: dict[BlockKey, Matrix], counter: _Counter
    ) -> Iterator[dict[BlockKey, Matrix]]:
        if depth == len(self.parameters):
            yield blocks
            return
        for value in self.inst.ring.elements():
            counter.explored += 1
            updated = self.assign(blocks, depth, value)
            if not self.passes(depth, updated):
                counter.pruned += 1
                continue
            yield from self.descend(depth + 1, updated, counter)

    def branch(self, value: int) -> tuple[list[dict[BlockKey, Matrix]], _Counter]:
        counter = _Counter(explored=1)
        blocks = self.assign(dict(self.fixed), 0, value)
        if not self.passes(0, blocks):
            counter.pruned += 1
            return [], counter
        return list(self.descend(1, blocks, counter)), counter


def _plain_parameters(inst: Instance) -> list[_Parameter]:
    parameters = []
    for v in unknown_blocks(inst):
        rows, cols = inst.summands[v.q].rank(v.degree), inst.summands[v.p].rank(v.degree - 1)
        unit = unit_matrices(inst.ring, rows, cols)[v.row * cols + v.col]
        parameters.append(_Parameter((((v.q, v.p, v.degree), unit),)))
    return parameters


def _symmetric_parameters(inst: Instance, action: GroupAction) -> list[_Parameter]:
    parameters = []
    for orbit in action.pair_orbits():
        q, p = orbit[0]
        for n in inst.summands[q].degrees():
            for basis in action.fixed_space(q, p, n):
                contributions = []
                for target in orbit:
                    sigma = action.carrier(q, p, target)
                    contributions.append(
                        ((*target, n), action.transport(sigma, q, p, n, basis))
                    )
                parameters.append(_Parameter(tuple(contributions)))
    logging.debug(
        "symmetry: %(orbits)d pair orbits, %(params)d free parameters",
        {"orbits": len(action.pair_orbits()), "params": len(parameters)},
    )
    return parameters


@dataclass(frozen=True)
class SearchStats:
    explored: int = 0
    pruned: int = 0
    elapsed: float = 0.0


@dataclass(frozen=True)
class SolutionSet:
    variables: tuple[Variable, ...]
    solutions: tuple[BlockMap, ...]
    stats: SearchStats
    symmetric: bool = False

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self) -> Iterator[BlockMap]:
        return iter(self.solutions)

    def vectors(self) -> list[tuple[Any, ...]]:
        return [scalar_vector(s, self.variables) for s in self.solutions]


def _plan(inst: Instance, symmetric: bool) -> _Plan:
    if not inst.ring.is_finite:
        raise UnsupportedRing(
            f"exhaustive search needs a finite prime field, got {inst.ring}; use verify instead"
        )
    if not symmetric:
        return _Plan(inst, _plain_parameters(inst))
    action = inst.symmetry
    if action is None:
        logging.warning("no symmetry given; searching with the trivial group")
        action = GroupAction.generate(inst.poset, inst.summands, ())
    return _Plan(inst, _symmetric_parameters(inst, action))


def _run(plan: _Plan, jobs: int) -> tuple[list[dict[BlockKey, Matrix]], _Counter]:
    root = dict(plan.fixed)
    if not plan.passes(-1, root):
        return [], _Counter(pruned=1)
    if not plan.parameters:
        return [root], _Counter()
    values = list(plan.inst.ring.elements())
    if jobs <= 1:
        branches = [plan.branch(v) for v in values]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            branches = list(pool.map(plan.branch, values))
    found, total = [], _Counter()
    for solutions, counter in branches:
        found += solutions
        total.explored += counter.explored
        total.pruned += counter.pruned
    return found, total


def enumerate_solutions(
    inst: Instance, symmetric: bool = False, jobs: int = 1
) -> SolutionSet:
    """All Δ over GF(p) with Δ∘Δ = 0 whose interval homology matches the index data."""
    started = time.perf_counter()
    plan = _plan(inst, symmetric)
    found, counter = _run(plan, jobs)
    solutions = sorted(
        (plan.block_map(b) for b in found),
        key=lambda d: scalar_vector(d, plan.variables),
    )
    elapsed = time.perf_counter() - started
    logging.info(
        "%(count)d solutions, %(explored)d nodes explored, %(pruned)d pruned in %(elapsed).3fs",
        {
            "count": len(solutions),
            "explored": counter.explored,
            "pruned": counter.pruned,
            "elapsed": elapsed,
        },
    )
    return SolutionSet(
        tuple(plan.variables),
        tuple(solutions),
        SearchStats(counter.explored, counter.pruned, elapsed),
        symmetric,
    )


def enumerate_symmetric(inst: Instance, jobs: int = 1) -> SolutionSet:
    return enumerate_solutions(inst, symmetric=True, jobs=jobs)


def count_solutions(inst: Instance, symmetric: bool = False) -> int:
    plan = _plan(inst, symmetric)
    root = dict(plan.fixed)
    if not plan.passes(-1, root):
        return 0
    return sum(1 for _ in plan.descend(0, root, _Counter()))


def forced_connections(
    solutions: SolutionSet,
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Pairs q > p whose block is nonzero in every solution, and in some solution."""
    if not solutions.solutions:
        return [], []
    nonzero = [
        {(q, p) for (q, p) in s.blocks if q != p} for s in solutions.solutions
    ]
    poset = solutions.solutions[0].poset

    def ordered(pairs: set[tuple[str, str]]) -> list[tuple[str, str]]:
        return sorted(pairs, key=lambda qp: tuple(map(poset.position, qp)))

    return ordered(set.intersection(*nonzero)), ordered(set.union(*nonzero))


@dataclass(frozen=True)
class ConstraintResult:
    name: str
    passed: bool
    detail: str = ""
    informational: bool = False


@dataclass(frozen=True)
class VerifyReport:
    results: tuple[ConstraintResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed or r.informational for r in self.results)

    def failures(self) -> list[ConstraintResult]:
        return [r for r in self.results if not r.passed and not r.informational]


def _triangularity(inst: Instance, delta: BlockMap) -> ConstraintResult:
    if inst.mode is Mode.CONNECTION:
        ok = delta.is_lower_triangular(strict=True)
        return ConstraintResult("strictly triangular", ok)
    ok = delta.is_lower_triangular()
    stray = [p for p in inst.poset.elements if delta.block(p, p) != inst.fixed_part().block(p, p)]
    detail = f"diagonal differs from δ at {stray}" if stray else ""
    return ConstraintResult("triangular with diagonal δ", ok and not stray, detail)


def verify(
    inst: Instance,
    delta: BlockMap,
    check_exactness: bool = True,
    require_symmetry: bool = False,
) -> VerifyReport:
    """Constraint-by-constraint check of Δ; works over any supported ring.

    Without `require_symmetry` the two symmetry lines are reported but do not
    decide the overall verdict.
    """
    if delta.poset != inst.poset or dict(delta.summands) != dict(inst.summands):
        raise ShapeMismatch("the block map does not act on the instance's summands")

    results = [_triangularity(inst, delta)]
    is_complex = check_boundary(delta)
    results.append(ConstraintResult("Δ∘Δ = 0", is_complex))

    for interval in sorted(inst.index_data, key=inst.poset.sort_key):
        expected = inst.index_data[interval]
        name = f"homology of {interval}"
        if not is_complex:
            results.append(ConstraintResult(name, False, "not a chain complex"))
            continue
        actual = homology(restrict(delta, interval))
        ok = iso_check(actual, expected)
        detail = "" if ok else f"expected {expected.describe()}, got {actual.describe()}"
        results.append(ConstraintResult(name, ok, detail))

    if inst.symmetry is not None:
        advisory = not require_symmetry
        results.append(
            ConstraintResult(
                "Γ-symmetric", inst.symmetry.is_symmetric(delta), informational=advisory
            )
        )
        moved = inst.symmetry.non_invariant_data(inst.index_data)
        if moved is not None:
            logging.warning(
                "index data of %(first)s and %(second)s differ although Γ relates them",
                {"first": moved[0], "second": moved[1]},
            )
        detail = "" if moved is None else f"G{moved[0]} differs from G{moved[1]}"
        results.append(
            ConstraintResult("index data Γ-invariant", moved is None, detail, advisory)
        )

    if check_exactness and is_complex:
        pairs = adjacent_tuples(inst.poset, 2, nonempty=True)
        broken = next((pair for pair in pairs if not verify_triangle(delta, *pair)), None)
        detail = (
            f"{len(pairs)} adjacent pairs"
            if broken is None
            else f"not exact for ({broken[0]}, {broken[1]})"
        )
        results.append(ConstraintResult("long exact sequences", broken is None, detail))

    return VerifyReport(tuple(results))
