from typing import Any, Callable, Sequence

import pytest

from conmat.core.blockmap import BlockMap
from conmat.core.graded import GradedMap, GradedModule, graded_from_index, graded_from_ranks
from conmat.core.linalg import Matrix, Ring
from conmat.core.poset import Interval, poset_from_relations
from conmat.core.search import Instance, Mode, unknown_blocks
from conmat.core.symmetry import Generator

GF2 = Ring.gf(2)


def interval(*members: str) -> Interval:
    return Interval(tuple(members))


def _attractor_repeller(
    ring: Ring = GF2, all_intervals: bool = False, generators: Sequence[Generator] = ()
) -> Instance:
    poset = poset_from_relations(["1", "2", "3"], [("3", "1"), ("3", "2")])
    data: dict[Interval, GradedModule] = {
        interval("1"): graded_from_index(ring, 0),
        interval("2"): graded_from_index(ring, 0),
        interval("3"): graded_from_index(ring, 1),
        interval("1", "2", "3"): graded_from_ranks(ring, {0: 1}),
    }
    if all_intervals:
        data[interval("1", "3")] = graded_from_ranks(ring, {})
        data[interval("2", "3")] = graded_from_ranks(ring, {})
    return Instance.create(poset, ring, data, generators=generators)


def _from_vector(inst: Instance, values: Sequence[Any]) -> BlockMap:
    """Block map whose unknown scalars, in search order, are `values`."""
    variables = unknown_blocks(inst)
    arrays: dict[tuple[str, str, int], list[list[Any]]] = {}
    for v, value in zip(variables, values, strict=True):
        key = (v.q, v.p, v.degree)
        if key not in arrays:
            rows, cols = inst.summands[v.q].rank(v.degree), inst.summands[v.p].rank(v.degree - 1)
            arrays[key] = [[0] * cols for _ in range(rows)]
        arrays[key][v.row][v.col] = value
    matrices: dict[tuple[str, str], dict[int, Matrix]] = {}
    for (q, p, n), rows in arrays.items():
        matrices.setdefault((q, p), {})[n] = Matrix.from_rows(inst.ring, rows)
    for p, delta in inst.diagonal.items():
        matrices[(p, p)] = dict(delta.blocks)
    return BlockMap.from_matrices(inst.poset, inst.summands, matrices)


@pytest.fixture
def make_attractor_repeller() -> Callable[..., Instance]:
    return _attractor_repeller


@pytest.fixture
def from_vector() -> Callable[[Instance, Sequence[Any]], BlockMap]:
    return _from_vector


@pytest.fixture
def attractor_repeller() -> Instance:
    return _attractor_repeller()


@pytest.fixture
def circle() -> Instance:
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    return Instance.create(
        poset,
        GF2,
        {
            interval("1"): graded_from_index(GF2, 0),
            interval("2"): graded_from_index(GF2, 1),
            interval("1", "2"): graded_from_ranks(GF2, {0: 1, 1: 1}),
        },
    )


@pytest.fixture
def c_connection() -> Callable[[Ring], Instance]:
    """C(2) = (F^2 -> F) with homology in degree 1; the whole poset is acyclic."""

    def build(ring: Ring) -> Instance:
        poset = poset_from_relations(["1", "2"], [("2", "1")])
        c1 = graded_from_ranks(ring, {0: 1})
        c2 = graded_from_ranks(ring, {0: 1, 1: 2})
        delta = GradedMap(c2, c2, -1, {1: Matrix.from_rows(ring, [[1], [0]])})
        return Instance.create(
            poset,
            ring,
            {
                interval("1"): graded_from_index(ring, 0),
                interval("2"): graded_from_index(ring, 1),
                interval("1", "2"): graded_from_ranks(ring, {}),
            },
            mode=Mode.C_CONNECTION,
            summands={"1": c1, "2": c2},
            diagonal={"2": delta},
        )

    return build
