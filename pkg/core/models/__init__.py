"""Data models for daprobe: canonical forms, reports and model spec files."""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union
import json

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.subspace import DEFAULT_TOL, Subspace, subspace_contains, subspace_from_basis


class SpecParseError(ValueError):
    """Raised when a model spec file is malformed; the message names the line or field."""


class Verdict(str, Enum):
    """Outcome of a double autoparallelism analysis."""

    DOUBLY_AUTOPARALLEL = "DoublyAutoparallel"
    NOT_DA = "NotDA"
    NO_POSITIVE_POINT = "NoPositivePoint"
    TRIVIAL_FULL_SPACE = "TrivialFullSpace"


class CanonicalForm(BaseModel):
    """
    Block decomposition of a doubly autoparallel subspace.

    Coordinates are 0-based. The permutation lists original coordinate indices
    in canonical order: the q free coordinates first, then each block in turn.
    """

    model_config = ConfigDict(frozen=True)

    ambient_dim: int = Field(..., ge=2, description="n+1")
    q: int = Field(..., ge=0, description="Number of free coordinates")
    r: int = Field(..., ge=1, description="Number of rigid blocks")
    block_sizes: List[int] = Field(..., description="Block sizes n_1 <= ... <= n_r, each >= 2")
    permutation: List[int] = Field(..., description="Original index at each canonical position")
    block_vectors: List[List[float]] = Field(..., description="Positive sub-vector a_l per block")

    @model_validator(mode="after")
    def _check_partition(self) -> "CanonicalForm":
        if len(self.block_sizes) != self.r:
            raise ValueError(f"r={self.r} but {len(self.block_sizes)} block sizes given")
        if any(size < 2 for size in self.block_sizes):
            raise ValueError("Every block must have at least two coordinates")
        if list(self.block_sizes) != sorted(self.block_sizes):
            raise ValueError("Block sizes must be non-decreasing")
        if self.q + sum(self.block_sizes) != self.ambient_dim:
            raise ValueError(
                f"q + sum(block_sizes) = {self.q + sum(self.block_sizes)} != {self.ambient_dim}"
            )
        if sorted(self.permutation) != list(range(self.ambient_dim)):
            raise ValueError("Permutation must be a bijection on the coordinate indices")
        if [len(v) for v in self.block_vectors] != list(self.block_sizes):
            raise ValueError("Block vector lengths must match block sizes")
        if any(x <= 0 for v in self.block_vectors for x in v):
            raise ValueError("Block vectors must be strictly positive")
        return self

    @property
    def dim(self) -> int:
        return self.q + self.r

    def free_indices(self) -> List[int]:
        return list(self.permutation[: self.q])

    def block_indices(self) -> List[List[int]]:
        blocks = []
        start = self.q
        for size in self.block_sizes:
            blocks.append(list(self.permutation[start : start + size]))
            start += size
        return blocks


class DAReport(BaseModel):
    """Verdict and evidence of a double autoparallelism analysis."""

    verdict: Verdict
    ambient_dim: int
    dim: int
    tolerance: float
    base_point: Optional[List[float]] = Field(None, description="Positive point a of W")
    closure_residual_max: Optional[float] = None
    canonical: Optional[CanonicalForm] = None
    cross_check_agreed: bool = True
    base_point_residual: Optional[float] = Field(
        None, description="Distance between the log-affine models built at two base points"
    )
    warnings: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_verdict(self) -> "DAReport":
        is_da = self.verdict == Verdict.DOUBLY_AUTOPARALLEL
        if is_da != (self.canonical is not None):
            raise ValueError("A canonical form is present exactly for DoublyAutoparallel")
        closure = self.closure_residual_max
        if closure is None:
            if self.verdict in (Verdict.DOUBLY_AUTOPARALLEL, Verdict.NOT_DA):
                raise ValueError(f"{self.verdict.value} needs a closure residual")
        elif is_da != (closure <= self.tolerance):
            raise ValueError(
                f"closure residual {closure:.3e} vs tolerance {self.tolerance:.0e} "
                f"contradicts verdict {self.verdict.value}"
            )
        return self


class ModelSpecFile(BaseModel):
    """A model M = W ∩ S^n given by generators of W."""

    ambient_dim: int = Field(..., ge=2)
    basis: List[List[float]] = Field(..., min_length=1)
    base_point: Optional[List[float]] = None
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "ModelSpecFile":
        for i, row in enumerate(self.basis):
            if len(row) != self.ambient_dim:
                raise ValueError(
                    f"basis row {i} has length {len(row)}, expected {self.ambient_dim}"
                )
        if self.labels is not None and len(self.labels) != self.ambient_dim:
            raise ValueError(f"labels has {len(self.labels)} entries, expected {self.ambient_dim}")
        if self.base_point is not None:
            if len(self.base_point) != self.ambient_dim:
                raise ValueError(f"base_point has length {len(self.base_point)}")
            if any(x <= 0 for x in self.base_point):
                raise ValueError("base_point must be strictly positive")
            membership = subspace_contains(self.subspace(), self.base_point, DEFAULT_TOL)
            if not membership.contained:
                raise ValueError(
                    f"base_point is not in span(basis): residual {membership.residual:.3e}"
                )
        return self

    def subspace(self, tol: float = DEFAULT_TOL) -> Subspace:
        return subspace_from_basis(self.basis, tol)


class Residuals(BaseModel):
    closure: Optional[float] = None
    log_affine: Optional[float] = None
    base_point: Optional[float] = None
    autoparallel: Dict[str, float] = Field(
        default_factory=dict, description="Autoparallel residual keyed by alpha"
    )


class ReportFile(BaseModel):
    """Serialized analysis report."""

    verdict: Verdict
    ambient_dim: int
    dim: int
    basis: List[List[float]] = Field(default_factory=list, description="Generators of W as given")
    base_point: Optional[List[float]] = None
    canonical: Optional[CanonicalForm] = None
    cross_check_agreed: bool = True
    residuals: Residuals = Field(default_factory=Residuals)
    warnings: List[str] = Field(default_factory=list)
    labels: Optional[List[str]] = None
    versions: Dict[str, str] = Field(default_factory=dict)
    tolerances: Dict[str, Union[int, float]] = Field(default_factory=dict)


class ProjectionReport(BaseModel):
    """Result of an alpha-projection onto a model."""

    alpha: float
    point: List[float]
    minimizer: List[float]
    divergence: float
    agreement_diameter: float
    starts: int
    tolerances: Dict[str, Union[int, float]] = Field(default_factory=dict)


class SuiteResult(BaseModel):
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failing_seeds: List[int] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0


class SelftestSummary(BaseModel):
    seed: int
    cases: int
    tolerance: float
    suites: List[SuiteResult] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.suites)


def dump_json(model: BaseModel) -> str:
    """Stable JSON text for a model (floats keep their shortest round-trip repr)."""
    return model.model_dump_json(indent=2) + "\n"


def load_model_spec(path: Union[str, Path]) -> ModelSpecFile:
    """
    Read and validate a model spec file.

    Raises:
        SpecParseError: With line/column context for JSON syntax errors and the
            field path for schema violations
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_model_spec(text, source=str(path))


def parse_model_spec(text: str, source: str = "<spec>") -> ModelSpecFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        return ModelSpecFile.model_validate(data)
    except ValidationError as e:
        details = []
        for err in e.errors():
            loc = ".".join(str(part) for part in err["loc"]) or "<root>"
            details.append(f"field {loc}: {err['msg']}")
        raise SpecParseError(f"{source}: " + "; ".join(details)) from e
    except ValueError as e:
        # numeric failures inside validators (e.g. all-zero basis)
        raise SpecParseError(f"{source}: {e}") from e
