"""Configuration management using pydantic-settings."""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import Field, ValidationError, ValidationInfo, field_validator
from pydantic_settings import BaseSettings

from .errors import ConfigurationError, ParameterError

Variant = Literal["T", "V", "B"]
PromptMode = Literal["full", "text", "visual", "none"]


class LoggingSettings(BaseSettings):
    """Logging configuration."""

    level: str = Field(default="INFO", description="Log level")
    format: str = Field(default="text", description="Log format (text or json)")

    class Config:
        env_prefix = "LOG_"
        extra = "ignore"


class ProjectionSettings(BaseSettings):
    """Multi-view depth projection configuration."""

    m_views: int = Field(default=10, ge=1, description="Number of projected views")
    distance: float = Field(default=2.0, gt=1.0, description="Camera distance from origin")
    fov_degrees: float = Field(default=60.0, gt=0.0, lt=180.0, description="Vertical field of view")
    image_size: int = Field(default=32, ge=8, description="Depth map height and width")

    class Config:
        env_prefix = "PROJECTION_"
        extra = "ignore"


class ModelSettings(BaseSettings):
    """Encoder stack configuration."""

    embed_dim: int = Field(default=64, ge=1, description="Embedding dimension d")
    token_dim: int = Field(default=64, ge=1, description="Patch-token and point-token width")
    point_hidden: int = Field(default=64, ge=1, description="Hidden width of the point MLP")
    query_length: int = Field(default=4, ge=1, description="Shared query length L_q")
    heads: int = Field(default=4, ge=1, description="Attention heads")
    lora_rank: int = Field(default=4, ge=1, description="Low-rank adapter rank r")
    lora_scale: float = Field(default=1.0, description="Scale applied to B·A")
    temperature: float = Field(default=0.07, gt=0.0, description="Initial softmax temperature")
    image_size: int = Field(default=32, ge=8, description="Expected depth map size")
    patch_size: int = Field(default=8, ge=1, description="Square patch size")
    prompt_mode: PromptMode = Field(default="full", description="Which prompts are active")
    init_seed: int = Field(default=0, description="Seed for parameter initialisation")

    @field_validator("patch_size")
    @classmethod
    def patch_divides_image(cls, v: int, info: ValidationInfo) -> int:
        """Require the patch size to tile the depth map exactly."""
        image_size = info.data.get("image_size", 32)
        if image_size % v != 0:
            raise ValueError(f"patch_size {v} does not divide image_size {image_size}")
        return v

    @field_validator("heads")
    @classmethod
    def heads_divide_embed(cls, v: int, info: ValidationInfo) -> int:
        """Require the model dimension to split evenly across heads."""
        embed_dim = info.data.get("embed_dim", 64)
        if embed_dim % v != 0:
            raise ValueError(f"embed_dim {embed_dim} not divisible by heads {v}")
        return v

    class Config:
        env_prefix = "MODEL_"
        extra = "ignore"


class TrainConfig(BaseSettings):
    """Training loop configuration."""

    shots_per_class: int = Field(default=16, ge=1, description="Labeled source samples per class")
    epochs: int = Field(default=20, ge=1, description="Number of epochs")
    batch_size: int = Field(default=16, ge=1, description="Clouds per domain per step")
    lr: float = Field(default=0.002, gt=0.0, description="Learning rate")
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0, description="SGD momentum")
    weight_decay: float = Field(default=1e-5, ge=0.0, description="L2 weight decay")
    alpha: float = Field(default=1.0, ge=0.0, description="Weight of the auxiliary losses")
    rho: float = Field(default=0.5, gt=0.0, le=1.0, description="View-selection percentile")
    epsilon_ot: float = Field(default=0.05, ge=1e-6, description="Sinkhorn regularisation")
    sinkhorn_tol: float = Field(default=1e-6, gt=0.0, description="Sinkhorn marginal tolerance")
    sinkhorn_max_iter: int = Field(default=1000, ge=1, description="Sinkhorn sweep cap")
    variant: Variant = Field(default="B", description="LoRA sets to train: T, V or B")
    seed: int = Field(default=0, description="Seed for sampling and shuffling")
    m_views: int = Field(default=10, ge=1, description="Projected views per cloud")
    use_ortho: bool = Field(default=True, description="Include L_ortho")
    use_proto: bool = Field(default=True, description="Include L_proto from epoch 2")
    use_ot: bool = Field(default=True, description="Include L_OT")
    use_conf: bool = Field(default=True, description="Include L_conf")
    threads: int = Field(default=1, ge=1, description="Worker threads")

    @field_validator("variant", mode="before")
    @classmethod
    def parse_variant(cls, v: Any) -> Any:
        """Accept lower-case variant names."""
        if isinstance(v, str):
            return v.strip().upper()
        return v

    class Config:
        env_prefix = "TRAIN_"
        extra = "ignore"


class EvalSettings(BaseSettings):
    """Evaluation and bound configuration."""

    beta: float = Field(default=1.0, ge=0.0, description="Weight of the prototype term")
    epsilon: float = Field(default=0.05, ge=1e-6, description="Sinkhorn regularisation for W_eps")
    bandwidth: Optional[float] = Field(default=None, description="MMD bandwidth (None: median heuristic)")
    max_bound_samples: int = Field(default=256, ge=2, description="Clouds per domain fed to W_eps")
    seed: int = Field(default=0, description="Seed for sampling and random-view ablation")

    class Config:
        env_prefix = "EVAL_"
        extra = "ignore"


class Settings(BaseSettings):
    """Main application settings."""

    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    projection: ProjectionSettings = Field(default_factory=ProjectionSettings)
    model: ModelSettings = Field(default_factory=ModelSettings)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalSettings = Field(default_factory=EvalSettings)

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "ignore"


def load_config_file(path: str | Path) -> Dict[str, Dict[str, Any]]:
    """
    Read a TOML config file into per-section dictionaries.

    Top-level scalar keys belong to the ``train`` section.

    Args:
        path: Path to the TOML file

    Returns:
        Mapping of section name (train, model, projection, eval) to keys
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with path.open("rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"invalid config file {path}: {e}") from e

    sections: Dict[str, Dict[str, Any]] = {"train": {}, "model": {}, "projection": {}, "eval": {}}
    for key, value in raw.items():
        if isinstance(value, dict):
            if key not in sections:
                raise ConfigurationError(f"unknown config section [{key}]")
            sections[key].update(value)
        else:
            sections["train"][key] = value
    return sections


def build(model_cls: type[BaseSettings], values: Dict[str, Any]) -> Any:
    """
    Instantiate a settings class, turning validation failures into ParameterError.

    Args:
        model_cls: Settings class to build
        values: Explicit values (take precedence over environment)

    Returns:
        Settings instance
    """
    unknown = sorted(set(values) - set(model_cls.model_fields))
    if unknown:
        raise ParameterError(f"unknown {model_cls.__name__} keys: {', '.join(unknown)}")
    try:
        return model_cls(**values)
    except ValidationError as e:
        raise ParameterError(str(e)) from e


# Global settings instance
settings = Settings()
