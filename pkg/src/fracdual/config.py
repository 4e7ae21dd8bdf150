"""Run configuration: structured-text files validated into domain objects.

Configs are YAML or JSON.  Every block rejects unknown keys, and every
invariant of the domain types is re-checked here so a bad file fails before
any computation starts.  Errors carry dotted field paths such as
``problem.frac_params.alpha``.
"""

from __future__ import annotations

import copy
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .core import FracParams, FunctionDescriptor, Separable, SpaceGrid, Tail
from .frac_space import SpaceQuadratureConfig
from .frac_time import TimeQuadratureConfig
from .solver import Problem, ReactionSpec, SolveConfig

__all__ = [
    "Command",
    "ConfigError",
    "RunConfig",
    "ProblemModel",
    "ExperimentModel",
    "COMMAND_DEFAULTS",
    "parse_config",
    "load_config_dict",
    "build_config",
    "set_path",
]

PARSE_ERROR = 2
VALIDATION_ERROR = 3


class ConfigError(Exception):
    """Config failure carrying the process exit code (2 parse, 3 validation)."""

    def __init__(self, message: str, exit_code: int, details: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.exit_code = exit_code
        self.details = details


class Command(str, Enum):
    operators = "operators"
    simulate = "simulate"
    counterexample = "counterexample"
    averaging = "averaging"
    narrow_region = "narrow-region"
    moving_plane = "moving-plane"
    verify_appendix = "verify-appendix"
    report = "report"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _domain(build):
    """Re-raise domain-constructor failures as pydantic value errors."""
    try:
        return build()
    except (ValueError, TypeError) as exc:
        raise ValueError(str(exc)) from None


# ---------------------------------------------------------------------------
# domain blocks


class FracParamsModel(_Strict):
    alpha: float = Field(0.5, gt=0.0, lt=1.0)
    s: float = Field(0.5, gt=0.0, lt=1.0)
    dim: Literal[1, 2] = 1

    def build(self) -> FracParams:
        return FracParams(self.alpha, self.s, self.dim)


class GridModel(_Strict):
    x_min: float = -1.0
    x_max: float = 1.0
    n: int = Field(21, ge=3)
    domain_kind: Literal["interval", "ball", "slab", "half_space_truncation"] = "interval"
    domain: tuple[float, ...] = ()

    @model_validator(mode="after")
    def _valid(self) -> GridModel:
        _domain(self.build)
        return self

    def build(self) -> SpaceGrid:
        return SpaceGrid(self.x_min, self.x_max, self.n, self.domain_kind, self.domain)


class TimeQuadratureModel(_Strict):
    scheme: Literal["l1_piecewise_linear"] = "l1_piecewise_linear"
    tail_mode: Literal["analytic_constant", "adaptive_then_constant"] = "adaptive_then_constant"
    tail_cut: float = Field(20.0, gt=0.0)
    adaptive_tol: float = Field(1e-10, gt=0.0)

    def build(self) -> TimeQuadratureConfig:
        return TimeQuadratureConfig(self.scheme, self.tail_mode, self.tail_cut, self.adaptive_tol)


class SpaceQuadratureModel(_Strict):
    inner_radius_factor: int = Field(1, ge=1)
    z_max: float | None = Field(None, gt=0.0)
    boundary_refine: int = Field(16, ge=1)
    tail_mode: Literal["constant_exact", "power_series"] = "constant_exact"
    corrected: bool = True

    def build(self) -> SpaceQuadratureConfig:
        return SpaceQuadratureConfig(
            self.inner_radius_factor, self.z_max, self.boundary_refine, self.tail_mode, self.corrected
        )


class SolveModel(_Strict):
    dt: float = Field(0.1, gt=0.0)
    n_steps: int = Field(10, ge=1)
    time_quadrature: TimeQuadratureModel = TimeQuadratureModel()
    space_quadrature: SpaceQuadratureModel = SpaceQuadratureModel()
    linear_solver_tol: float = Field(1e-10, gt=0.0)
    implicit_linear: bool = False

    def build(self) -> SolveConfig:
        return SolveConfig(
            self.dt,
            self.n_steps,
            self.time_quadrature.build(),
            self.space_quadrature.build(),
            self.linear_solver_tol,
            self.implicit_linear,
        )


class ReactionModel(_Strict):
    family: Literal["zero", "affine", "logistic_like", "cubic"] = "zero"
    params: tuple[float, ...] = ()

    @model_validator(mode="after")
    def _valid(self) -> ReactionModel:
        _domain(self.build)
        return self

    def build(self) -> ReactionSpec:
        return ReactionSpec(self.family, self.params)


def _float_or_inf(v: Any) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "-inf"):
        return float(v)
    return float(v)


class TailModel(_Strict):
    kind: Literal["eventually_constant", "bounded", "power_growth"]
    value: float = 0.0
    cutoff: float | str = "-inf"
    right_value: float = 0.0
    right_cutoff: float | str = "inf"

    @field_validator("cutoff", "right_cutoff")
    @classmethod
    def _num(cls, v: Any) -> float:
        try:
            out = _float_or_inf(v)
        except ValueError:
            raise ValueError(f"expected a number or +-inf, got {v!r}") from None
        if math.isnan(out):
            raise ValueError("cutoff must not be nan")
        return out

    def build(self) -> Tail:
        return Tail(self.kind, self.value, float(self.cutoff), self.right_value, float(self.right_cutoff))


class DescriptorModel(_Strict):
    """``{"family": name, "params": [...], "tail": {...}}``."""

    family: Literal[FunctionDescriptor.FAMILIES]  # type: ignore[valid-type]
    params: tuple[float, ...] = ()
    tail: TailModel | None = None

    @model_validator(mode="after")
    def _valid(self) -> DescriptorModel:
        _domain(self.build)
        return self

    def build(self) -> FunctionDescriptor:
        return FunctionDescriptor(self.family, self.params, self.tail.build() if self.tail else None)


class SeparableModel(_Strict):
    """``space(x) * time(t)``; a bare descriptor means a time-independent function."""

    space: DescriptorModel = DescriptorModel(family="constant", params=(0.0,))
    time: DescriptorModel = DescriptorModel(family="constant", params=(1.0,))

    @model_validator(mode="before")
    @classmethod
    def _bare(cls, v: Any) -> Any:
        if isinstance(v, dict) and "family" in v:
            return {"space": v}
        return v

    def build(self) -> Separable:
        return Separable(self.space.build(), self.time.build())


class ProblemModel(_Strict):
    frac_params: FracParamsModel = FracParamsModel()
    grid: GridModel = GridModel()
    solve: SolveModel = SolveModel()
    reaction: ReactionModel = ReactionModel()
    prehistory: SeparableModel = SeparableModel()
    exterior: SeparableModel = SeparableModel()
    t_start: float = 0.0

    def build(self) -> Problem:
        return Problem(
            self.frac_params.build(),
            self.grid.build(),
            self.solve.build(),
            self.reaction.build(),
            self.prehistory.build(),
            self.exterior.build(),
            self.t_start,
        )


# ---------------------------------------------------------------------------
# experiment knobs


class ExperimentModel(_Strict):
    """Per-command settings; commands ignore the ones they do not use."""

    # counterexample
    R: float = Field(100.0, gt=0.0)
    n_grid: int = Field(200, ge=2)
    R_sweep: tuple[float, ...] = (10.0, 100.0, 1000.0)
    # averaging
    D: tuple[float, float] = (2.0, 4.0)
    x0: float = 0.0
    r: float = Field(0.5, gt=0.0)
    C0: float = Field(1.0, ge=0.0)
    eps: float | None = None
    t0: float = 0.0
    nodes_per_r: int = Field(50, ge=4)
    n_steps: int = Field(200, ge=1)
    distances: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    # narrow region and the antisymmetric averaging variant
    lam: float | None = None
    l: float = Field(0.2, gt=0.0)
    l_sweep: tuple[float, ...] = (0.05, 0.1, 0.2, 0.5, 1.0)
    c: float = 5.0
    # moving plane
    lambda_max: float | None = Field(None, gt=0.0)
    negative_control: bool = True
    # simulate: randomized maximum-principle suite (0 = plain run)
    random_runs: int = Field(0, ge=0)
    # operators and verify-appendix
    alphas: tuple[float, ...] = (0.25, 0.5, 0.75)
    rates: tuple[float, ...] = (0.5, 1.0, 2.0)
    # trajectory CSV keeps every k-th level (None: at most ~500 levels)
    csv_stride: int | None = Field(None, ge=1)

    @field_validator("alphas")
    @classmethod
    def _orders(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not v or any(not 0.0 < a < 1.0 for a in v):
            raise ValueError("alphas must be nonempty and inside (0, 1)")
        return v

    @field_validator("D")
    @classmethod
    def _interval(cls, v: tuple[float, float]) -> tuple[float, float]:
        if not v[1] > v[0]:
            raise ValueError("D must be an interval (a, b) with b > a")
        return v


class CheckModel(_Strict):
    """Tolerances for ``--check`` comparisons against stored outputs."""

    rtol: float = Field(1e-9, ge=0.0)
    atol: float = Field(1e-12, ge=0.0)


Verdict = Literal["holds", "violated", "inconclusive"]


class RunConfig(_Strict):
    command: Command
    problem: ProblemModel = ProblemModel()
    experiment: ExperimentModel = ExperimentModel()
    output_dir: Path = Path("fracdual-out")
    seed: int = 0
    expectations: dict[str, Verdict] = {}
    check: CheckModel = CheckModel()

    @model_validator(mode="after")
    def _buildable(self) -> RunConfig:
        # cross-block invariants (e.g. z_max against the grid extent)
        _domain(lambda: self.problem.solve.space_quadrature.build().far_cut(self.problem.grid.build()))
        return self

    def echo(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


# ---------------------------------------------------------------------------
# command defaults and loading


COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "moving-plane": {
        "problem": {
            "grid": {"x_min": 0.0, "x_max": 20.0, "n": 200, "domain_kind": "half_space_truncation"},
            "solve": {"dt": 2.0, "n_steps": 4000, "implicit_linear": True},
            "reaction": {"family": "logistic_like", "params": [1.0]},
        },
        "expectations": {"moving_plane_negative_control": "violated"},
    },
    "counterexample": {"expectations": {"counterexample": "inconclusive"}},
    "narrow-region": {"experiment": {"lam": 0.0}},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def set_path(d: dict, path: str, value: Any) -> None:
    """Set ``d["a"]["b"]["c"] = value`` for ``path = "a.b.c"``, creating blocks."""
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        nxt = cur.get(k)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[k] = nxt
        cur = nxt
    cur[keys[-1]] = value


def load_config_dict(path: str | Path) -> dict[str, Any]:
    """Read a YAML or JSON mapping; raises :class:`ConfigError` (exit 2) on failure."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror or exc}", PARSE_ERROR) from None
    try:
        data = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {p}: {exc}", PARSE_ERROR) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {p} must be a mapping at the top level", PARSE_ERROR)
    return data


def _field_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def build_config(data: dict[str, Any]) -> RunConfig:
    """Apply command defaults and validate; raises :class:`ConfigError` (exit 3)."""
    cmd = data.get("command")
    key = cmd.value if isinstance(cmd, Command) else cmd
    if isinstance(key, str) and key in COMMAND_DEFAULTS:
        data = _merge(COMMAND_DEFAULTS[key], data)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        lines = tuple(f"{_field_path(e['loc'])}: {e['msg']}" for e in exc.errors())
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines), VALIDATION_ERROR, lines) from None


def parse_config(path: str | Path) -> RunConfig:
    return build_config(load_config_dict(path))
