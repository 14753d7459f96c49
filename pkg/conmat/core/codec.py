#!/usr/bin/env python
"""JSON documents for block maps, solution sets and verification reports."""

from fractions import Fraction
from typing import Any, Mapping, Sequence

import orjson as json

from conmat.core.blockmap import BlockMap
from conmat.core.errors import DimensionMismatch, ShapeMismatch, UnknownElement
from conmat.core.linalg import Matrix
from conmat.core.poset import Interval, Poset
from conmat.core.search import Instance, SolutionSet, VerifyReport, forced_connections


def encode_scalar(value: Any) -> Any:
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return int(value)


def encode_matrix(matrix: Matrix) -> list[list[Any]]:
    return [[encode_scalar(x) for x in row] for row in matrix.tolist()]


def block_map_to_dict(delta: BlockMap) -> dict[str, Any]:
    """{"blocks": {q: {p: {degree: rows}}}}; zero blocks are omitted."""
    blocks: dict[str, dict[str, dict[str, Any]]] = {}
    for (q, p), block in delta.blocks.items():
        blocks.setdefault(q, {})[p] = {
            str(n): encode_matrix(m) for n, m in block.blocks.items()
        }
    return {"blocks": blocks}


def block_map_from_dict(
    inst: Instance, blocks: Mapping[str, Mapping[str, Mapping[int, Sequence[Sequence[Any]]]]]
) -> BlockMap:
    matrices: dict[tuple[str, str], dict[int, Matrix]] = {}
    try:
        for q, row in blocks.items():
            for p, per_degree in row.items():
                inst.poset.position(q)
                inst.poset.position(p)
                target = inst.summands[p]
                matrices[(q, p)] = {
                    int(n): Matrix.from_rows(inst.ring, rows, cols=target.rank(int(n) - 1))
                    for n, rows in per_degree.items()
                }
        return BlockMap.from_matrices(inst.poset, inst.summands, matrices)
    except (DimensionMismatch, UnknownElement) as e:
        raise ShapeMismatch(str(e)) from e


def _pairs(pairs: Sequence[tuple[str, str]]) -> list[list[str]]:
    return [[q, p] for q, p in pairs]


def solution_set_to_dict(inst: Instance, solutions: SolutionSet) -> dict[str, Any]:
    forced, possible = forced_connections(solutions)
    return {
        "ring": inst.ring.spelling,
        "mode": inst.mode.value,
        "symmetric": solutions.symmetric,
        "count": len(solutions),
        "stats": {
            "explored": solutions.stats.explored,
            "pruned": solutions.stats.pruned,
        },
        "solutions": [block_map_to_dict(s) for s in solutions],
        "forced": _pairs(forced),
        "possible": _pairs(possible),
    }


def report_to_dict(report: VerifyReport) -> dict[str, Any]:
    return {
        "passed": report.passed,
        "results": [
            {
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
                "informational": r.informational,
            }
            for r in report.results
        ],
    }


def reports_to_dict(reports: Sequence[VerifyReport]) -> dict[str, Any]:
    return {
        "passed": all(r.passed for r in reports),
        "reports": [report_to_dict(r) for r in reports],
    }


def intervals_to_dict(
    poset: Poset,
    intervals: Sequence[Interval],
    tuples: Mapping[int, Sequence[tuple[Interval, ...]]],
) -> dict[str, Any]:
    out: dict[str, Any] = {"elements": list(poset.elements)}
    out["intervals"] = [i.key for i in intervals]
    for n, found in tuples.items():
        out[f"adjacent_{n}"] = [[i.key for i in t] for t in found]
    return out


def dumps(document: Mapping[str, Any]) -> str:
    return json.dumps(document, option=json.OPT_INDENT_2).decode()
