import random
from itertools import combinations, product
from typing import Any, Callable, Optional, Sequence

import pytest

from conmat.core.blockmap import BlockMap, check_boundary, homology, restrict, verify_triangle
from conmat.core.errors import InfeasibleDiagonal, InstanceError, UnsupportedRing
from conmat.core.graded import (
    Component,
    GradedMap,
    GradedModule,
    graded_from_index,
    graded_from_ranks,
)
from conmat.core.linalg import Matrix, Ring
from conmat.core.poset import EMPTY, Interval, adjacent_tuples, intervals, poset_from_relations
from conmat.core.search import (
    Instance,
    Mode,
    Variable,
    count_solutions,
    enumerate_solutions,
    enumerate_symmetric,
    forced_connections,
    unknown_blocks,
    verify,
)
from conmat.core.symmetry import Generator

GF2 = Ring.gf(2)
GF3 = Ring.gf(3)
Z = Ring.parse("integer")

FromVector = Callable[[Instance, Sequence[Any]], BlockMap]


def interval(*members: str) -> Interval:
    return Interval(tuple(members))


def _antichain(data: Optional[GradedModule] = None) -> Instance:
    poset = poset_from_relations(["1", "2"], [])
    index_data = {
        interval("1"): graded_from_index(GF2, 0),
        interval("2"): graded_from_index(GF2, 0),
    }
    if data is not None:
        index_data[interval("1", "2")] = data
    return Instance.create(poset, GF2, index_data)


def test_unknown_blocks(attractor_repeller: Instance, circle: Instance) -> None:
    assert unknown_blocks(attractor_repeller) == [
        Variable("3", "1", 1, 0, 0),
        Variable("3", "2", 1, 0, 0),
    ]
    assert len(unknown_blocks(circle)) == 1
    assert unknown_blocks(_antichain()) == []


def test_attractor_repeller(make_attractor_repeller: Callable[..., Instance]) -> None:
    found = enumerate_solutions(make_attractor_repeller())
    assert found.vectors() == [(0, 1), (1, 0), (1, 1)]
    assert len(enumerate_solutions(make_attractor_repeller(GF3))) == 8
    assert enumerate_solutions(make_attractor_repeller(all_intervals=True)).vectors() == [(1, 1)]


def test_circle_has_only_the_zero_connection(circle: Instance) -> None:
    found = enumerate_solutions(circle)
    assert found.vectors() == [(0,)]
    assert found.solutions[0].blocks == {}


def test_instances_without_unknowns() -> None:
    assert len(enumerate_solutions(_antichain())) == 1
    assert len(enumerate_solutions(_antichain(graded_from_ranks(GF2, {0: 2})))) == 1
    assert len(enumerate_solutions(_antichain(graded_from_ranks(GF2, {0: 1})))) == 0
    assert count_solutions(_antichain(graded_from_ranks(GF2, {0: 1}))) == 0


def test_count_matches_enumeration(make_attractor_repeller: Callable[..., Instance]) -> None:
    for ring in (GF2, GF3):
        for all_intervals in (False, True):
            inst = make_attractor_repeller(ring, all_intervals)
            assert count_solutions(inst) == len(enumerate_solutions(inst))


def test_more_index_data_means_fewer_solutions(
    make_attractor_repeller: Callable[..., Instance],
) -> None:
    for ring in (GF2, GF3):
        coarse = set(enumerate_solutions(make_attractor_repeller(ring)).vectors())
        fine = set(enumerate_solutions(make_attractor_repeller(ring, True)).vectors())
        assert fine <= coarse


def test_parallel_search_is_deterministic(
    make_attractor_repeller: Callable[..., Instance],
) -> None:
    inst = make_attractor_repeller(GF3)
    serial = enumerate_solutions(inst, jobs=1)
    parallel = enumerate_solutions(inst, jobs=3)
    assert serial.vectors() == parallel.vectors()
    assert (serial.stats.explored, serial.stats.pruned) == (
        parallel.stats.explored,
        parallel.stats.pruned,
    )


def test_symmetric_search_without_a_group_uses_the_trivial_one(
    make_attractor_repeller: Callable[..., Instance],
) -> None:
    inst = make_attractor_repeller()
    assert enumerate_symmetric(inst).vectors() == enumerate_solutions(inst).vectors()


def test_symmetric_search_matches_filtering(
    make_attractor_repeller: Callable[..., Instance],
) -> None:
    swap = Generator({"1": "2", "2": "1", "3": "3"}, {})
    inst = make_attractor_repeller(generators=[swap])
    assert enumerate_symmetric(inst).vectors() == [(1, 1)]
    assert enumerate_solutions(inst, symmetric=True, jobs=2).vectors() == [(1, 1)]
    assert count_solutions(inst, symmetric=True) == 1


def test_every_solution_passes_verification(
    make_attractor_repeller: Callable[..., Instance], circle: Instance
) -> None:
    for inst in (make_attractor_repeller(GF3), make_attractor_repeller(all_intervals=True), circle):
        for delta in enumerate_solutions(inst):
            report = verify(inst, delta)
            assert report.passed, report.failures()
            assert report.results[-1].name == "long exact sequences"


def test_verify_names_the_failing_interval(
    attractor_repeller: Instance, from_vector: FromVector
) -> None:
    report = verify(attractor_repeller, from_vector(attractor_repeller, (0, 0)))
    assert not report.passed
    failures = report.failures()
    assert [r.name for r in failures] == ["homology of {1,2,3}"]
    assert "expected" in failures[0].detail


def test_verify_rejects_upward_blocks() -> None:
    # the lower element sits in degree 1, so a block (1, 2) has room
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    inst = Instance.create(
        poset,
        GF2,
        {
            interval("1"): graded_from_index(GF2, 1),
            interval("2"): graded_from_index(GF2, 0),
            interval("1", "2"): graded_from_ranks(GF2, {0: 1, 1: 1}),
        },
    )
    assert unknown_blocks(inst) == []
    assert verify(inst, BlockMap(poset, inst.summands)).passed
    upward = BlockMap.from_matrices(
        poset, inst.summands, {("1", "2"): {1: Matrix.from_rows(GF2, [[1]])}}
    )
    first = verify(inst, upward).results[0]
    assert first.name == "strictly triangular"
    assert not first.passed


def test_verify_over_the_integers() -> None:
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    inst = Instance.create(
        poset,
        Z,
        {
            interval("1"): graded_from_index(Z, 0),
            interval("2"): graded_from_index(Z, 1),
            interval("1", "2"): GradedModule(Z, {0: Component(0, (2,))}),
        },
    )
    two = BlockMap.from_matrices(poset, inst.summands, {("2", "1"): {1: Matrix.from_rows(Z, [[2]])}})
    assert verify(inst, two).passed
    three = BlockMap.from_matrices(poset, inst.summands, {("2", "1"): {1: Matrix.from_rows(Z, [[3]])}})
    assert [r.name for r in verify(inst, three).failures()] == ["homology of {1,2}"]
    with pytest.raises(UnsupportedRing):
        enumerate_solutions(inst)


def test_search_needs_a_finite_field(make_attractor_repeller: Callable[..., Instance]) -> None:
    rational = make_attractor_repeller(Ring.parse("rational"))
    with pytest.raises(UnsupportedRing):
        enumerate_solutions(rational)
    with pytest.raises(UnsupportedRing):
        count_solutions(rational)


def test_instance_validation() -> None:
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    with pytest.raises(InstanceError):
        Instance.create(poset, GF2, {interval("1"): graded_from_index(GF2, 0)})
    with pytest.raises(InstanceError):
        Instance.create(
            poset,
            GF2,
            {interval("1"): graded_from_index(GF2, 0), interval("2"): graded_from_index(GF2, 1)},
            summands={"1": graded_from_index(GF2, 0), "2": graded_from_index(GF2, 0)},
        )
    with pytest.raises(InstanceError):
        Instance.create(
            poset,
            GF2,
            {interval("1"): graded_from_index(GF2, 0), interval("2"): graded_from_index(GF2, 1)},
            mode=Mode.C_CONNECTION,
        )


def test_c_connection_search(c_connection: Callable[[Ring], Instance]) -> None:
    inst = c_connection(GF2)
    assert unknown_blocks(inst) == [Variable("2", "1", 1, 0, 0), Variable("2", "1", 1, 1, 0)]
    found = enumerate_solutions(inst)
    assert found.vectors() == [(0, 1), (1, 1)]
    for delta in found:
        assert delta.block("2", "2") == inst.diagonal["2"]
        assert verify(inst, delta).passed
    assert forced_connections(found) == ([("2", "1")], [("2", "1")])
    assert len(enumerate_solutions(c_connection(GF3))) == 6


def test_c_connection_verify_checks_the_diagonal(
    c_connection: Callable[[Ring], Instance], from_vector: FromVector
) -> None:
    inst = c_connection(GF2)
    good = from_vector(inst, (0, 1))
    stripped = BlockMap(inst.poset, inst.summands, {("2", "1"): good.block("2", "1")})
    first = verify(inst, stripped).results[0]
    assert first.name == "triangular with diagonal δ"
    assert not first.passed


def test_diagonal_must_square_to_zero() -> None:
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    c2 = graded_from_ranks(GF2, {0: 1, 1: 1, 2: 1})
    one = Matrix.from_rows(GF2, [[1]])
    with pytest.raises(InfeasibleDiagonal):
        Instance.create(
            poset,
            GF2,
            {
                interval("1"): graded_from_index(GF2, 0),
                interval("2"): graded_from_ranks(GF2, {}),
            },
            mode=Mode.C_CONNECTION,
            summands={"1": graded_from_index(GF2, 0), "2": c2},
            diagonal={"2": GradedMap(c2, c2, -1, {1: one, 2: one})},
        )


def test_diagonal_homology_must_match() -> None:
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    c2 = graded_from_ranks(GF2, {0: 1, 1: 2})
    with pytest.raises(InstanceError):
        Instance.create(
            poset,
            GF2,
            {interval("1"): graded_from_index(GF2, 0), interval("2"): graded_from_index(GF2, 1)},
            mode=Mode.C_CONNECTION,
            summands={"1": graded_from_index(GF2, 0), "2": c2},
            diagonal={"2": GradedMap.zero(c2, c2, -1)},
        )


def test_forced_connections(make_attractor_repeller: Callable[..., Instance]) -> None:
    coarse = enumerate_solutions(make_attractor_repeller())
    assert forced_connections(coarse) == ([], [("3", "1"), ("3", "2")])
    fine = enumerate_solutions(make_attractor_repeller(all_intervals=True))
    assert forced_connections(fine) == ([("3", "1"), ("3", "2")], [("3", "1"), ("3", "2")])
    empty = enumerate_solutions(_antichain(graded_from_ranks(GF2, {0: 1})))
    assert forced_connections(empty) == ([], [])


def test_index_data_on_the_empty_interval() -> None:
    poset = poset_from_relations(["1", "2"], [("2", "1")])
    singletons = {
        interval("1"): graded_from_ranks(GF2, {0: 1}),
        interval("2"): graded_from_ranks(GF2, {1: 1}),
    }
    free = Instance.create(poset, GF2, singletons)
    assert enumerate_solutions(free).vectors() == [(0,), (1,)]

    trivial = Instance.create(poset, GF2, {**singletons, EMPTY: graded_from_ranks(GF2, {})})
    assert enumerate_solutions(trivial).vectors() == [(0,), (1,)]
    assert count_solutions(trivial) == 2

    impossible = Instance.create(poset, GF2, {**singletons, EMPTY: graded_from_ranks(GF2, {0: 1})})
    assert len(enumerate_solutions(impossible)) == 0
    assert count_solutions(impossible) == 0
    assert len(enumerate_solutions(impossible, jobs=2)) == 0


def _random_instance(rng: random.Random, ring: Ring, limit: int, from_vector: FromVector) -> Instance:
    while True:
        size = rng.randint(2, 6)
        density = rng.choice((0.2, 0.4, 0.6))
        elements = [str(i) for i in range(1, size + 1)]
        relations = [(q, p) for q, p in combinations(reversed(elements), 2) if rng.random() < density]
        poset = poset_from_relations(elements, relations)
        summands = {}
        for p in elements:
            ranks = {rng.randint(0, 2): 1}
            if rng.random() < 0.2:
                ranks[rng.randint(0, 2)] = 1
            summands[p] = graded_from_ranks(ring, ranks)
        singletons = {Interval((p,)): summands[p] for p in elements}
        bare = Instance.create(poset, ring, singletons)
        variables = unknown_blocks(bare)
        if not variables or len(variables) > limit:
            continue

        truth = from_vector(bare, [rng.choice(ring.elements()) for _ in variables])
        data = dict(singletons)
        for candidate in intervals(poset):
            if len(candidate) < 2 or rng.random() < 0.5:
                continue
            if check_boundary(truth):
                data[candidate] = homology(restrict(truth, candidate))
            else:
                data[candidate] = graded_from_ranks(ring, {rng.randint(0, 2): rng.randint(0, 2)})
        return Instance.create(poset, ring, data)


def test_search_agrees_with_brute_force(from_vector: FromVector) -> None:
    rng = random.Random(41)
    nonempty = 0
    instances = 0
    for ring, limit, rounds in ((GF2, 8, 70), (GF3, 5, 30)):
        for _ in range(rounds):
            inst = _random_instance(rng, ring, limit, from_vector)
            variables = unknown_blocks(inst)
            assert 1 <= len(variables) <= limit
            expected = [
                values
                for values in product(ring.elements(), repeat=len(variables))
                if verify(inst, from_vector(inst, values), check_exactness=False).passed
            ]
            found = enumerate_solutions(inst, jobs=rng.choice((1, 2)))
            assert found.vectors() == expected
            assert count_solutions(inst) == len(expected)

            pairs = adjacent_tuples(inst.poset, 2, nonempty=True)
            for delta in found:
                for first, second in pairs:
                    assert verify_triangle(delta, first, second)
            nonempty += bool(expected)
            instances += 1
    assert instances >= 100
    assert nonempty > 0
