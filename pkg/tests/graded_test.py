import random

import pytest

from conmat.core.errors import DimensionMismatch, RingMismatch
from conmat.core.graded import (
    Component,
    GradedMap,
    GradedModule,
    direct_sum,
    graded_from_index,
    graded_from_presentation,
    graded_from_ranks,
    iso_check,
)
from conmat.core.linalg import Matrix, Ring

GF2 = Ring.gf(2)
Z = Ring.parse("integer")


def test_ranks_and_index() -> None:
    point = graded_from_ranks(GF2, {0: 1})
    assert point.rank(0) == 1 and point.degrees() == [0]
    assert graded_from_ranks(GF2, {}).is_zero()
    assert iso_check(graded_from_index(GF2, 0), point)
    assert graded_from_index(GF2, -2).degrees() == [-2]
    circle = graded_from_ranks(GF2, {0: 1, 1: 1})
    assert circle.euler_characteristic() == 0


def test_zero_ranks_are_dropped() -> None:
    assert graded_from_ranks(GF2, {0: 0, 3: 0}).is_zero()
    assert graded_from_ranks(GF2, {0: 1, 1: 0}) == graded_from_ranks(GF2, {0: 1})


def test_iso_check_examples() -> None:
    assert not iso_check(graded_from_ranks(GF2, {0: 2}), graded_from_ranks(GF2, {0: 1, 1: 1}))
    two = GradedModule(Z, {0: Component(0, (2,))})
    three = GradedModule(Z, {0: Component(0, (3,))})
    assert not iso_check(two, three)
    assert iso_check(two, GradedModule(Z, {0: Component(0, (2,))}))
    with pytest.raises(RingMismatch):
        iso_check(graded_from_index(GF2, 0), graded_from_index(Z, 0))


def test_torsion_is_normalized() -> None:
    module = GradedModule(Z, {1: Component(1, (6, 4, 1))})
    assert module.torsion(1) == (2, 12)
    assert not module.is_free()
    assert module.describe() == "H_1 = Z^1 + Z/2 + Z/12"
    with pytest.raises(ValueError):
        GradedModule(GF2, {0: Component(0, (2,))})


def test_presentations() -> None:
    # Z^2 / <(2, 4), (6, 10)> = Z/2 + Z/2
    module = graded_from_presentation(Z, {0: (2, [[2, 4], [6, 10]])})
    assert module.component(0) == Component(0, (2, 2))
    # Z^3 / <(1, 1, 0)> = Z^2
    assert graded_from_presentation(Z, {1: (3, [[1, 1, 0]])}).rank(1) == 2
    # over a field only the rank survives
    assert graded_from_presentation(GF2, {0: (2, [[1, 1]])}).rank(0) == 1


def test_direct_sum_offsets() -> None:
    a, b = graded_from_ranks(GF2, {0: 1}), graded_from_ranks(GF2, {0: 1})
    total = direct_sum([a, b])
    assert total.module.rank(0) == 2
    assert total.offsets[0] == (0, 1)
    assert iso_check(direct_sum([a, graded_from_index(GF2, 1)]).module, graded_from_ranks(GF2, {0: 1, 1: 1}))
    assert direct_sum([], GF2).module.is_zero()
    with pytest.raises(RingMismatch):
        direct_sum([graded_from_index(GF2, 0), graded_from_index(Z, 0)])


def test_module_laws_on_random_modules() -> None:
    rng = random.Random(2)

    def random_module() -> GradedModule:
        return GradedModule(
            Z,
            {
                n: Component(rng.randint(0, 2), tuple(rng.choice([2, 3, 4]) for _ in range(rng.randint(0, 2))))
                for n in range(rng.randint(0, 3))
            },
        )

    zero = GradedModule(Z)
    for _ in range(30):
        a, b, c = random_module(), random_module(), random_module()
        assert iso_check(a, a)
        assert iso_check(a, b) == iso_check(b, a)
        left = direct_sum([direct_sum([a, b]).module, c]).module
        right = direct_sum([a, direct_sum([b, c]).module]).module
        assert iso_check(left, right)
        assert iso_check(direct_sum([a, zero]).module, a)


def test_graded_map_shapes() -> None:
    source = graded_from_ranks(GF2, {1: 1})
    target = graded_from_ranks(GF2, {0: 2})
    delta = GradedMap(source, target, -1, {1: Matrix.from_rows(GF2, [[1, 1]])})
    assert delta.block(1).shape == (1, 2)
    assert delta.block(5).shape == (0, 0)
    assert GradedMap(source, target, -1, {1: Matrix.zeros(GF2, 1, 2)}).is_zero()
    with pytest.raises(DimensionMismatch):
        GradedMap(source, target, -1, {1: Matrix.from_rows(GF2, [[1]])})


def test_graded_map_composition() -> None:
    module = graded_from_ranks(GF2, {0: 2})
    swap = GradedMap(module, module, 0, {0: Matrix.from_rows(GF2, [[0, 1], [1, 0]])})
    assert swap.then(swap) == GradedMap.identity(module)
    assert GradedMap.zero(module, module, 0).is_zero()
