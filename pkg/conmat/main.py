#!/usr/bin/env python
import argparse
import logging
import sys
from typing import Optional, Sequence

from conmat.core import codec, report
from conmat.core.errors import ConmatError
from conmat.core.poset import adjacent_tuples, intervals
from conmat.core.search import count_solutions, enumerate_solutions, verify
from conmat.core.workspace import InputError, Workspace

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="conmat",
        description="Enumerate and verify connection matrices over a poset",
    )
    parser.add_argument(
        "-c",
        "--config",
        help="Absolute path to <config>.json",
        action="store",
        default="",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def instance_command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("instance", help="Instance JSON file or packaged example name")
        sub.add_argument(
            "--output", choices=["text", "json"], default=None, help="Output format"
        )
        return sub

    listing = instance_command("intervals", "List the intervals of the poset")
    listing.add_argument(
        "--adjacent", action="store_true", help="Also list adjacent pairs and triples"
    )

    search = instance_command("enumerate", "Enumerate all compatible connection matrices")
    search.add_argument("--symmetric", action="store_true", help="Only Γ-symmetric solutions")
    search.add_argument("--count-only", action="store_true", help="Print the count only")
    search.add_argument("--jobs", type=int, default=None, help="Worker threads")

    counting = instance_command("count", "Count compatible connection matrices")
    counting.add_argument("--symmetric", action="store_true", help="Only Γ-symmetric solutions")

    checking = instance_command("verify", "Check block maps against an instance")
    checking.add_argument("solutions", help="Solution record or enumerate output")
    checking.add_argument(
        "--symmetric",
        action="store_true",
        help="Require Γ-symmetry (implied by output of enumerate --symmetric)",
    )
    checking.add_argument(
        "--skip-exactness",
        action="store_true",
        help="Do not check the long exact sequences",
    )
    return parser.parse_args(argv)


def cmd_intervals(workspace: Workspace, args: argparse.Namespace, output: str) -> int:
    inst = workspace.load_instance(args.instance)
    found = intervals(inst.poset)
    tuples = {}
    if args.adjacent:
        tuples = {n: adjacent_tuples(inst.poset, n, nonempty=True) for n in (2, 3)}
    if output == "json":
        print(codec.dumps(codec.intervals_to_dict(inst.poset, found, tuples)))
    else:
        print(report.render_intervals(found, tuples))
    return EXIT_OK


def cmd_enumerate(workspace: Workspace, args: argparse.Namespace, output: str) -> int:
    inst = workspace.load_instance(args.instance)
    jobs = args.jobs if args.jobs is not None else workspace.search_cfg.jobs
    if jobs < 1:
        raise InputError(f"--jobs must be positive, got {jobs}")
    solutions = enumerate_solutions(inst, symmetric=args.symmetric, jobs=jobs)
    if args.count_only:
        print(len(solutions))
    elif output == "json":
        print(codec.dumps(codec.solution_set_to_dict(inst, solutions)))
    else:
        print(report.render_solution_set(inst, solutions))
    return EXIT_OK


def cmd_count(workspace: Workspace, args: argparse.Namespace, output: str) -> int:
    inst = workspace.load_instance(args.instance)
    total = count_solutions(inst, symmetric=args.symmetric)
    print(codec.dumps({"count": total}) if output == "json" else total)
    return EXIT_OK


def cmd_verify(workspace: Workspace, args: argparse.Namespace, output: str) -> int:
    inst = workspace.load_instance(args.instance)
    deltas, symmetric = workspace.load_solutions(inst, args.solutions)
    reports = [
        verify(
            inst,
            d,
            check_exactness=not args.skip_exactness,
            require_symmetry=args.symmetric or symmetric,
        )
        for d in deltas
    ]
    if not deltas:
        logging.warning("%s holds no block maps", args.solutions)
    if output == "json":
        print(codec.dumps(codec.reports_to_dict(reports)))
    elif not deltas:
        print("no block maps to verify")
    else:
        print(
            "\n".join(
                report.render_report(r, f"-- block map {k}")
                for k, r in enumerate(reports, start=1)
            )
        )
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


COMMANDS = {
    "intervals": cmd_intervals,
    "enumerate": cmd_enumerate,
    "count": cmd_count,
    "verify": cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_arguments(argv)
    try:
        workspace = Workspace(args.config)
        output = args.output or workspace.search_cfg.output
        return COMMANDS[args.command](workspace, args, output)
    except (InputError, ConmatError) as e:
        logging.error("%s failed: %s", args.command, e)
        print(f"conmat {args.command}: {e}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
