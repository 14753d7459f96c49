#!/usr/bin/env python
import logging
import os
from importlib import resources
from typing import Any, Optional

import orjson as json
from pydantic import ValidationError

import conmat.config.types as tp
from conmat.core.blockmap import BlockMap
from conmat.core.codec import block_map_from_dict
from conmat.core.errors import ConmatError, InstanceError
from conmat.core.graded import (
    Component,
    GradedMap,
    GradedModule,
    graded_from_index,
    graded_from_presentation,
    graded_from_ranks,
)
from conmat.core.linalg import Matrix, Ring
from conmat.core.poset import EMPTY, Interval, Poset, poset_from_relations
from conmat.core.search import Instance, Mode
from conmat.core.symmetry import Generator


class InputError(Exception):
    pass


def describe_validation_error(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in e['loc']) or '<root>'}: {e['msg']}"
        for e in error.errors()
    )


def packaged_examples() -> list[str]:
    return sorted(
        entry.name.removesuffix(".json")
        for entry in resources.files("conmat.examples").iterdir()
        if entry.name.endswith(".json")
    )


class Workspace:
    def __init__(self, json_config_file_path: str) -> None:
        self.logger_cfg, self.search_cfg = self.load_config(json_config_file_path)
        logging.basicConfig(
            filename=self.logger_cfg.file_path or None,
            filemode="w",
            format="%(asctime)s -%(levelname)s- %(message)s",
            level=self.logger_cfg.verbosity,
            force=True,
        )

    def load_config(
        self, json_config_file_path: str
    ) -> tuple[tp.LoggerConfig, tp.SearchConfig]:
        try:
            if not json_config_file_path:
                logging.info("No config path provided, loading default from resources.")
                config_resource = resources.files("conmat.config").joinpath(
                    "config-default.json"
                )
                json_config = json.loads(config_resource.read_bytes())
            else:
                with open(json_config_file_path, "rb") as f:
                    json_config = json.loads(f.read())

            return tp.parse_config(json_config)

        except FileNotFoundError as e:
            logging.error("Configuration file not found: %s", e)
            raise InputError(f"configuration file not found: {json_config_file_path}") from e
        except ValidationError as e:
            logging.error("Invalid config: %s", e)
            raise InputError(f"invalid config: {describe_validation_error(e)}") from e
        except Exception as e:
            logging.error("Failed to load config: %s", e)
            raise InputError(f"failed to load config: {e}") from e

    def read_document(self, path: str) -> dict[str, Any]:
        """Parse a JSON file; bare names of packaged examples are resolved too."""
        try:
            if not os.path.exists(path) and path in packaged_examples():
                logging.info("loading packaged example %s", path)
                raw = resources.files("conmat.examples").joinpath(f"{path}.json").read_bytes()
            else:
                with open(path, "rb") as f:
                    raw = f.read()
            document = json.loads(raw)
        except (OSError, json.JSONDecodeError) as e:
            logging.error("cannot read %(path)s: %(err)s", {"path": path, "err": e})
            raise InputError(f"{path}: {e}") from e
        if not isinstance(document, dict):
            raise InputError(f"{path}: expected a JSON object at the top level")
        return document

    def load_instance(self, path: str) -> Instance:
        document = self.read_document(path)
        try:
            model = tp.parse_instance_from_json(document)
            return build_instance(model)
        except ValidationError as e:
            logging.error("invalid instance %(path)s: %(err)s", {"path": path, "err": e})
            raise InputError(f"{path}: {describe_validation_error(e)}") from e
        except (ConmatError, ValueError) as e:
            logging.error("invalid instance %(path)s: %(err)s", {"path": path, "err": e})
            raise InputError(f"{path}: {e}") from e

    def load_solutions(self, inst: Instance, path: str) -> tuple[list[BlockMap], bool]:
        """Block maps of a solution file and whether it came from a symmetric search."""
        document = self.read_document(path)
        try:
            model = tp.parse_solution_from_json(document)
        except ValidationError as e:
            logging.error("invalid solution file %(path)s: %(err)s", {"path": path, "err": e})
            raise InputError(f"{path}: {describe_validation_error(e)}") from e
        try:
            deltas = [block_map_from_dict(inst, record.blocks) for record in model.solutions]
        except (ConmatError, ValueError) as e:
            logging.error("solution file %(path)s does not fit: %(err)s", {"path": path, "err": e})
            raise InputError(f"{path}: {e}") from e
        return deltas, model.symmetric


def _interval(poset: Poset, key: str) -> Interval:
    members = [m.strip() for m in key.split(",") if m.strip()]
    if not members:
        return EMPTY
    return poset.interval(members)


def _index_module(ring: Ring, entry: int | tp.IndexModel) -> GradedModule:
    if isinstance(entry, int):
        return graded_from_index(ring, entry)
    if entry.ranks is not None:
        return graded_from_ranks(ring, entry.ranks)
    if entry.components is not None:
        return GradedModule(
            ring,
            {n: Component(c.rank, tuple(c.torsion)) for n, c in entry.components.items()},
        )
    assert entry.presentation is not None
    return graded_from_presentation(
        ring,
        {n: (pr.generators, pr.relations) for n, pr in entry.presentation.items()},
    )


def _matrices(
    ring: Ring, rows_by_degree: dict[int, tp.Rows], widths: GradedModule, shift: int
) -> dict[int, Matrix]:
    return {
        n: Matrix.from_rows(ring, rows, cols=widths.rank(n + shift))
        for n, rows in rows_by_degree.items()
    }


def build_instance(model: tp.InstanceFileModel) -> Instance:
    try:
        ring = Ring.parse(model.ring)
    except ValueError as e:
        raise InstanceError(f"ring: {e}") from e
    poset = poset_from_relations(model.elements, model.relations)
    index_data: dict[Interval, GradedModule] = {}
    spelled: dict[Interval, str] = {}
    for key, entry in model.indices.items():
        interval = _interval(poset, key)
        if interval in spelled:
            raise InstanceError(
                f"indices: '{spelled[interval]}' and '{key}' name the same interval {interval}"
            )
        spelled[interval] = key
        index_data[interval] = _index_module(ring, entry)
    mode = Mode(model.mode)

    summands: Optional[dict[str, GradedModule]] = None
    diagonal: dict[str, GradedMap] = {}
    if model.complexes is not None:
        unknown = set(model.complexes) - set(poset.elements)
        if unknown:
            raise InstanceError(f"complexes: unknown elements {sorted(unknown)}")
        summands = {}
        for p in poset.elements:
            chain = model.complexes.get(p)
            if chain is None:
                raise InstanceError(f"complexes: missing C({p})")
            module = graded_from_ranks(ring, chain.ranks)
            summands[p] = module
            blocks = _matrices(ring, chain.differential, module, -1)
            if mode is Mode.C_CONNECTION:
                diagonal[p] = GradedMap(module, module, -1, blocks)
            elif any(not b.is_zero() for b in blocks.values()):
                raise InstanceError(f"complexes.{p}: connection mode needs δ({p}) = 0")
    elif mode is Mode.CONNECTION:
        missing = [p for p in poset.elements if Interval((p,)) not in index_data]
        if missing:
            raise InstanceError(f"indices: missing singletons {missing}")
        summands = {p: index_data[Interval((p,))] for p in poset.elements}

    generators = []
    if model.symmetry is not None:
        if summands is None:
            raise InstanceError("symmetry: c-connection mode needs the complexes first")
        for g in model.symmetry.generators:
            stray = set(g.psi) - set(poset.elements)
            if stray:
                raise InstanceError(f"symmetry.{g.name}: unknown elements {sorted(stray)}")
            psi = {
                p: _matrices(ring, per_degree, summands[g.permutation.get(p, p)], 0)
                for p, per_degree in g.psi.items()
            }
            generators.append(Generator(g.permutation, psi))

    inst = Instance.create(
        poset,
        ring,
        index_data,
        mode=mode,
        summands=summands,
        diagonal=diagonal,
        generators=generators,
    )
    logging.info(
        "instance: %(n)d elements, ring %(ring)s, mode %(mode)s, %(data)d intervals with data",
        {"n": len(poset.elements), "ring": ring, "mode": mode.value, "data": len(index_data)},
    )
    return inst
