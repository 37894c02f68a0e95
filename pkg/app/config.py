import tomllib
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.exceptions import ConfigError
from app.schema import MATCHER_TYPE, MODEL_TYPE, OPTIMIZER_METHOD_TYPE


def get_project_root() -> Path:
    """Get the project root directory"""
    return Path(__file__).resolve().parent.parent


PROJECT_ROOT = get_project_root()


class StrictSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSettings(StrictSettings):
    name: MODEL_TYPE = Field(..., description="Shipped model: example or fan")  # type: ignore
    design: List[float] = Field(..., description="Design point s (initial design for match)")
    n_design: Optional[int] = Field(None, ge=1, description="Fan model design dimension")
    seed: Optional[int] = Field(None, description="Fan model coefficient seed")
    gamma: Optional[float] = Field(None, gt=1, description="Fan heat-capacity ratio")

    def params(self) -> Dict[str, Any]:
        """Constructor arguments for the model factory."""
        params = {"n_design": self.n_design, "seed": self.seed, "gamma": self.gamma}
        if self.name == "fan":
            if params["n_design"] is None:
                params["n_design"] = len(self.design)
            elif params["n_design"] != len(self.design):
                raise ValueError(
                    f"n_design={params['n_design']} does not match the "
                    f"{len(self.design)} design values"
                )
            return {k: v for k, v in params.items() if v is not None}
        unused = sorted(k for k, v in params.items() if v is not None)
        if unused:
            raise ValueError(f"options {unused} only apply to the fan model")
        return {}

    @model_validator(mode="after")
    def check_options(self) -> "ModelSettings":
        self.params()
        return self


class UncertaintySettings(StrictSettings):
    family: Literal["beta"] = Field("beta", description="Input pdf family")
    alpha: float = Field(..., description="First beta shape")
    beta_shape: float = Field(..., description="Second beta shape")
    lower: Optional[float] = Field(None, description="Support lower bound (default: model U_L)")
    upper: Optional[float] = Field(None, description="Support upper bound (default: model U_U)")


class GaussianTargetSettings(StrictSettings):
    family: Literal["gaussian"]
    mean: float
    std: float = Field(..., gt=0)
    renormalize: bool = True


class BetaTargetSettings(StrictSettings):
    family: Literal["scaled-beta"]
    alpha: float
    beta_shape: float
    lower: float
    upper: float
    renormalize: bool = True


class RelativeTargetSettings(StrictSettings):
    """Gaussian placed relative to the initial design's qoi moments."""

    family: Literal["relative"]
    mean_shift: float = 0.0
    std_ratio: float = Field(1.0, gt=0)
    renormalize: bool = True


class DesignTargetSettings(StrictSettings):
    """Target equal to the design pdf of a known design."""

    family: Literal["design"]
    design: List[float]
    renormalize: bool = False


TargetSettings = Annotated[
    Union[
        GaussianTargetSettings,
        BetaTargetSettings,
        RelativeTargetSettings,
        DesignTargetSettings,
    ],
    Field(discriminator="family"),
]


class GridSettings(StrictSettings):
    n_points: int = Field(2000, ge=2, description="Number of quadrature nodes N")
    bounds: Union[Literal["auto"], Tuple[float, float]] = Field(
        "auto", description="Explicit [f_lower, f_upper] or auto"
    )
    padding: float = Field(0.1, ge=0, description="Auto-bounds padding fraction")


class MatcherSettings(StrictSettings):
    kind: MATCHER_TYPE = Field("monotonic", description="monotonic or kde")  # type: ignore
    n_samples: int = Field(10_000, ge=2, description="KDE frozen sample count M")
    bandwidth: Union[float, Literal["silverman", "scott"]] = Field(
        "silverman", description="KDE bandwidth or rule"
    )
    sample_seed: Optional[int] = Field(None, description="KDE sample seed (default: seed)")
    uncorrected_shift: bool = Field(
        False, description="Use the uncorrected closed-form shift (diagnostics only)"
    )


class OptimizerSettings(StrictSettings):
    max_function_calls: int = Field(40, ge=1)
    design_tolerance: float = Field(1e-5, gt=0)
    gradient_tolerance: float = Field(1e-10, gt=0)
    shrink: float = Field(0.5, gt=0, lt=1)
    sufficient_decrease: float = Field(1e-4, gt=0, lt=1)
    initial_step: float = Field(1.0, gt=0)
    method: OPTIMIZER_METHOD_TYPE = "quasi-newton-bfgs"  # type: ignore


class PdfSettings(StrictSettings):
    kde: bool = Field(False, description="Also write a KDE of sampled responses")
    kde_samples: int = Field(100_000, ge=2, description="Samples for the KDE curve")
    sensitivity: bool = Field(True, description="Also write the D matrix")


class VerifySettings(StrictSettings):
    fd_tolerance: float = Field(1e-5, gt=0, description="Monotonic FD relative tolerance")
    kde_fd_tolerance: float = Field(1e-4, gt=0, description="KDE FD relative tolerance")
    kde_samples: int = Field(10_000, ge=2, description="Frozen samples for the KDE check")
    mc_samples: int = Field(1_000_000, ge=2, description="Monte-Carlo sample count")
    histogram_bins: int = Field(200, ge=1, description="Histogram bins for the oracle")


class OutputSettings(StrictSettings):
    directory: str = Field("workspace/output", description="Output directory")


class RunConfig(StrictSettings):
    seed: int = Field(0, description="Master seed")
    model: ModelSettings
    uncertainty: UncertaintySettings
    target: Optional[TargetSettings] = None
    grid: GridSettings = Field(default_factory=GridSettings)
    matcher: MatcherSettings = Field(default_factory=MatcherSettings)
    optimizer: OptimizerSettings = Field(default_factory=OptimizerSettings)
    pdf: PdfSettings = Field(default_factory=PdfSettings)
    verify: VerifySettings = Field(default_factory=VerifySettings)
    output: OutputSettings = Field(default_factory=OutputSettings)

    @property
    def output_dir(self) -> Path:
        path = Path(self.output.directory)
        return path if path.is_absolute() else PROJECT_ROOT / path


def format_validation_error(errors: List[Dict[str, Any]]) -> List[Dict[str, str]]:
    """Flatten pydantic errors into dotted key paths"""
    formatted_errors = []
    for error in errors:
        loc = ".".join(str(x) for x in error["loc"])
        formatted_errors.append({"field": loc, "message": error["msg"]})
    return formatted_errors


def default_config_path() -> Path:
    root = PROJECT_ROOT
    config_path = root / "config" / "config.toml"
    if config_path.exists():
        return config_path
    example_path = root / "config" / "config.example.toml"
    if example_path.exists():
        return example_path
    raise FileNotFoundError("No configuration file found in config directory")


def parse_run_config(raw_config: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(raw_config)
    except ValidationError as e:
        errors = format_validation_error(e.errors())
        summary = "; ".join(f"{err['field']}: {err['message']}" for err in errors)
        raise ConfigError(f"Invalid configuration: {summary}", errors=errors) from e


def load_run_config(
    path: Optional[Union[str, Path]] = None, **overrides: Any
) -> RunConfig:
    """Read a TOML run configuration; top-level overrides replace keys before validation."""
    config_path = Path(path) if path is not None else default_config_path()
    try:
        with config_path.open("rb") as f:
            raw_config = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Configuration file not found: {config_path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed configuration {config_path}: {e}") from e

    for key, value in overrides.items():
        if value is None:
            continue
        section, _, field = key.partition(".")
        if field:
            raw_config.setdefault(section, {})[field] = value
        else:
            raw_config[section] = value
    return parse_run_config(raw_config)
