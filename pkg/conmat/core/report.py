#!/usr/bin/env python
"""Plain-text rendering of listings, solution sets and verification reports."""

from typing import Mapping, Sequence

from conmat.core.blockmap import BlockMap
from conmat.core.codec import encode_scalar
from conmat.core.linalg import Matrix
from conmat.core.poset import Interval
from conmat.core.search import Instance, SolutionSet, VerifyReport, forced_connections


def render_intervals(
    intervals: Sequence[Interval], tuples: Mapping[int, Sequence[tuple[Interval, ...]]]
) -> str:
    lines = [f"{len(intervals)} intervals"]
    lines += [f"  {i}" for i in intervals]
    for n, found in tuples.items():
        lines.append(f"{len(found)} adjacent {n}-tuples")
        lines += ["  (" + ", ".join(str(i) for i in t) + ")" for t in found]
    return "\n".join(lines)


def render_block(q: str, p: str, n: int, matrix: Matrix) -> list[str]:
    """Rows are labelled C_n(q), columns C_{n-1}(p) (row convention)."""
    row_labels = [f"C_{n}({q})[{i}]" for i in range(matrix.rows)]
    col_labels = [f"C_{n - 1}({p})[{j}]" for j in range(matrix.cols)]
    cells = [[str(encode_scalar(x)) for x in row] for row in matrix.tolist()]
    width = max([len(c) for c in col_labels] + [len(x) for row in cells for x in row])
    margin = max(len(r) for r in row_labels)
    lines = [f"Δ({q},{p}) degree {n}"]
    lines.append(" " * margin + " " + " ".join(c.rjust(width) for c in col_labels))
    for label, row in zip(row_labels, cells):
        lines.append(label.ljust(margin) + " " + " ".join(x.rjust(width) for x in row))
    return lines


def render_block_map(delta: BlockMap) -> list[str]:
    lines = []
    for (q, p), block in delta.blocks.items():
        for n, matrix in block.blocks.items():
            lines += render_block(q, p, n, matrix)
    return lines or ["Δ = 0"]


def render_solution_set(inst: Instance, solutions: SolutionSet) -> str:
    lines = [
        f"{len(solutions)} solutions over {inst.ring} "
        f"({solutions.stats.explored} explored, {solutions.stats.pruned} pruned)"
    ]
    for k, delta in enumerate(solutions, start=1):
        lines.append(f"-- solution {k}")
        lines += render_block_map(delta)
    forced, possible = forced_connections(solutions)
    if solutions.solutions:
        lines.append("forced connections: " + (", ".join(f"({q},{p})" for q, p in forced) or "none"))
        lines.append("possible connections: " + (", ".join(f"({q},{p})" for q, p in possible) or "none"))
    lines.append(
        f"note: the search is exhaustive over {inst.ring} only; "
        "check a block map over Q or Z with verify"
    )
    return "\n".join(lines)


def render_report(report: VerifyReport, title: str = "") -> str:
    lines = [title] if title else []
    for r in report.results:
        if r.passed:
            status = "PASS"
        else:
            status = "NOTE" if r.informational else "FAIL"
        lines.append(f"{status} {r.name}" + (f": {r.detail}" if r.detail else ""))
    lines.append("overall: " + ("PASS" if report.passed else "FAIL"))
    return "\n".join(lines)
