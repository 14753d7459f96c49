from typing import Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

Scalar = Union[int, str]
Rows = list[list[Scalar]]


class LoggerConfig(BaseModel):
    file_path: str = Field(..., description="Logger File Path, stderr when empty")
    verbosity: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        ..., description="Logger Verbosity"
    )


class SearchConfig(BaseModel):
    jobs: int = Field(default=1, ge=1, description="Worker threads for enumeration")
    output: Literal["text", "json"] = Field(
        default="text", description="Output format: text or json"
    )


def parse_config(json_dict: Dict[str, Any]) -> tuple[LoggerConfig, SearchConfig]:
    try:
        logger_cfg = LoggerConfig.model_validate(json_dict["logger"])
        search_cfg = SearchConfig.model_validate(json_dict["search"])
        return logger_cfg, search_cfg
    except KeyError as e:
        raise ValueError(f"Missing required config section: {e}")


class ComponentModel(BaseModel):
    rank: int = Field(default=0, ge=0, description="Free rank")
    torsion: list[int] = Field(default_factory=list, description="Invariant factors")


class PresentationModel(BaseModel):
    generators: int = Field(..., ge=0, description="Number of generators")
    relations: Rows = Field(
        default_factory=list, description="Relation rows, one per relation"
    )


class IndexModel(BaseModel):
    """Exactly one of: ranks per degree, full components, presentations."""

    ranks: Optional[Dict[int, int]] = None
    components: Optional[Dict[int, ComponentModel]] = None
    presentation: Optional[Dict[int, PresentationModel]] = None

    @model_validator(mode="after")
    def one_form(self) -> "IndexModel":
        given = [
            f for f in ("ranks", "components", "presentation") if getattr(self, f) is not None
        ]
        if len(given) != 1:
            raise ValueError(
                f"give exactly one of ranks, components, presentation (got {given or 'none'})"
            )
        return self


class ComplexModel(BaseModel):
    ranks: Dict[int, int] = Field(..., description="Chain ranks per degree")
    differential: Dict[int, Rows] = Field(
        default_factory=dict, description="Degree n -> matrix C_n -> C_{n-1}"
    )


class GeneratorModel(BaseModel):
    model_config = ConfigDict(coerce_numbers_to_str=True)

    name: str = Field(default="", description="Generator label")
    permutation: Dict[str, str] = Field(..., description="Poset element -> image")
    psi: Dict[str, Dict[int, Rows]] = Field(
        default_factory=dict, description="Element -> degree -> C_n(p) -> C_n(σp)"
    )


class SymmetryModel(BaseModel):
    generators: list[GeneratorModel] = Field(..., description="Group generators")


class InstanceFileModel(BaseModel):
    model_config = ConfigDict(coerce_numbers_to_str=True)

    elements: list[str] = Field(..., description="Poset elements")
    relations: list[tuple[str, str]] = Field(
        default_factory=list, description="Pairs [q, p] meaning q > p"
    )
    ring: str = Field(..., description="gf<p>, rational or integer")
    mode: Literal["connection", "c-connection"] = Field(default="connection")
    indices: Dict[str, Union[int, IndexModel]] = Field(
        ..., description='Interval key "1,3" -> index data'
    )
    complexes: Optional[Dict[str, ComplexModel]] = None
    symmetry: Optional[SymmetryModel] = None


def parse_instance_from_json(json_dict: Dict[str, Any]) -> InstanceFileModel:
    return InstanceFileModel.model_validate(json_dict, strict=False)


class SolutionModel(BaseModel):
    blocks: Dict[str, Dict[str, Dict[int, Rows]]] = Field(
        default_factory=dict, description="q -> p -> degree -> matrix"
    )


class SolutionFileModel(BaseModel):
    solutions: list[SolutionModel] = Field(..., description="Block maps to verify")
    symmetric: bool = Field(
        default=False, description="Written by a symmetric search; symmetry is then required"
    )


def parse_solution_from_json(json_dict: Dict[str, Any]) -> SolutionFileModel:
    """Accepts a single record or a whole enumerate document."""
    if "solutions" in json_dict:
        return SolutionFileModel.model_validate(json_dict, strict=False)
    return SolutionFileModel(
        solutions=[SolutionModel.model_validate(json_dict)],
        symmetric=json_dict.get("symmetric", False),
    )
