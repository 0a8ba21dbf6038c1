"""Run manifest schema (JSON) shared by every subcommand."""
import inspect
import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from .data import make_field
from .errors import ConfigError, ManifestError
from .fld import read_fld


class Common(BaseModel):
    """Discretisation and indices that every audit in a run shares."""

    model_config = ConfigDict(extra="forbid")

    d: int = Field(2, ge=1, le=3)
    n: int = Field(128, ge=8)
    L: float = Field(2 * np.pi, gt=0)
    alpha: float = Field(0.5, gt=0, lt=1)
    p: float = Field(2.0, gt=1)
    nu: float = Field(0.2, gt=0)
    seed: int = Field(0, ge=0)

    @field_validator("n")
    @classmethod
    def _even(cls, n):
        if n % 2:
            raise ValueError("n must be even")
        return n


class ModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["oldroyd_b", "mhd"] = "oldroyd_b"
    k: float = Field(0.5, ge=0)
    rho_k: float = Field(0.5, ge=0)
    T: float = Field(0.25, gt=0)
    steps: int = Field(8, ge=2)


class FieldSpec(BaseModel):
    """A named analytic family with parameters, or an FLD1 file."""

    model_config = ConfigDict(extra="forbid")

    family: str | None = None
    params: dict = Field(default_factory=dict)
    path: str | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.family is None) == (self.path is None):
            raise ValueError("give exactly one of 'family' or 'path'")
        return self


class DataSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    u0: FieldSpec = FieldSpec(family="gaussian_vortex", params={"amplitude": 0.5, "width": 0.5})
    sigma0: FieldSpec = FieldSpec(family="gaussian_tensor", params={"amplitude": 0.5, "width": 0.6})


class SolverSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ball_radius: float | None = Field(None, gt=0)
    max_iterations: int = Field(40, ge=1)
    tolerance: float = Field(1e-9, gt=0)
    dealias: bool = True
    scheme: Literal["spline", "trig"] = "spline"


class Manifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    common: Common = Common()
    model: ModelSpec = ModelSpec()
    data: DataSpec = DataSpec()
    solver: SolverSpec = SolverSpec()
    options: dict = Field(default_factory=dict)
    _base: Path | None = PrivateAttr(None)


def _format_errors(err):
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_manifest(source):
    """Validate a manifest from a dict, a JSON string, a path, or ``None`` (all defaults)."""
    if source is None:
        return Manifest()
    base = None
    if isinstance(source, (str, Path)) and Path(source).exists():
        base = Path(source).parent
        try:
            source = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from None
    elif isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from None
    try:
        manifest = Manifest.model_validate(source)
    except ValidationError as exc:
        raise ManifestError(_format_errors(exc)) from None
    manifest._base = base
    return manifest


def build_field(spec, grid, base=None):
    """Materialise a :class:`FieldSpec` on ``grid``."""
    if spec.path is not None:
        path = Path(spec.path)
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            field = read_fld(path)
        except (OSError, ValueError) as exc:
            raise ManifestError(f"cannot read field {path}: {exc}") from None
        if field.grid != grid:
            raise ManifestError(f"field {path} lives on {field.grid}, manifest grid is {grid}")
        return field.values
    try:
        return make_field(grid, spec.family, **spec.params)
    except (ConfigError, TypeError) as exc:
        raise ManifestError(f"data family {spec.family!r}: {exc}") from None


def suite_options(func, options, reserved=("setup",)):
    """Check ``options`` against the keyword parameters of ``func``; unknown keys are a manifest error."""
    sig = inspect.signature(func)
    allowed = [name for name in sig.parameters if name not in reserved]
    unknown = sorted(set(options) - set(allowed))
    if unknown:
        raise ManifestError(f"options: unknown keys {unknown} for this subcommand; allowed {allowed}")
    return {k: tuple(v) if isinstance(v, list) else v for k, v in options.items()}
