"""Pipeline configuration: one file, environment overrides, CLI flags on top.

A configuration file is either plain YAML or a Markdown experiment manifest
whose YAML front matter holds the settings and whose body is kept as
free-form ``notes``.

Precedence: model defaults < file < ``FLOODSIGHT_*`` environment < flags.
"""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional

import frontmatter
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from floodsight.errors import ConfigError
from floodsight.financial.cost import DEFAULT_STORIES, DamageFactors
from floodsight.fileio import write_text
from floodsight.grid.aggregate import DEFAULT_PRECISION, AggregationLevel
from floodsight.models.dual_unet import DualUNetConfig
from floodsight.models.unet import SegUNetConfig
from floodsight.raster.augment import AugmentConfig
from floodsight.synthetic.generator import SynthConfig
from floodsight.training.losses import LossConfig
from floodsight.training.trainer import OptimizerConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "FLOODSIGHT_"
MARKDOWN_SUFFIXES = {".md", ".markdown"}
LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class PathsConfig(BaseModel):
    """Locations of inputs and artifacts; relative paths resolve against the config file."""

    data_dir: Path = Field(Path("data"), description="Dataset root (manifest.json)")
    imagery: Optional[Path] = Field(None, description="Raster or directory to run inference on")
    hand: Optional[Path] = Field(None, description="HAND GeoTIFF for segmentation inference")
    zhvi_csv: Optional[Path] = Field(None, description="Price table, zip,price_per_sqft_usd")
    zips_geojson: Optional[Path] = Field(None, description="Zip code polygons")
    counties_geojson: Optional[Path] = Field(None, description="County polygons")
    checkpoint_dir: Path = Field(Path("checkpoints"), description="Trained model archives")
    output_dir: Path = Field(Path("outputs"), description="Masks, GeoJSON, CSV and reports")

    def resolved(self, base: Path) -> "PathsConfig":
        updates = {}
        for name, value in self:
            if isinstance(value, Path) and not value.is_absolute():
                updates[name] = (base / value).resolve()
        return self.model_copy(update=updates)


class TrainingConfig(BaseModel):
    epochs: int = Field(20, ge=0, description="Passes over the sampling plan")
    oversample_factor: int = Field(4, ge=1, description="Repeats of samples with minor/major damage")
    val_fraction: float = Field(0.2, ge=0.0, lt=1.0, description="Share of samples held out")
    auto_class_weights: bool = Field(True, description="Derive class weights from pixel frequencies")
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    augment: Optional[AugmentConfig] = Field(default_factory=AugmentConfig)


class PipelineConfig(BaseModel):
    """Everything one reproducible run needs."""

    seed: int = Field(0, description="Seed for data, weights, shuffling and augmentation")
    workers: Optional[int] = Field(None, ge=1, description="Tile/sample parallelism, default CPU count")
    log_level: str = Field("INFO", description="Root logging level")
    tile_size: int = Field(1024, ge=16, description="Inference tile side in pixels")
    paths: PathsConfig = Field(default_factory=PathsConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    segmentation: SegUNetConfig = Field(default_factory=lambda: SegUNetConfig(depth=3))
    damage: DualUNetConfig = Field(default_factory=lambda: DualUNetConfig(depth=3))
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    damage_factors: DamageFactors = Field(default_factory=DamageFactors)
    stories: int = Field(DEFAULT_STORIES, ge=1, description="Story multiplier applied to footprint area")
    fallback_price: Optional[float] = Field(None, gt=0.0, description="Price for zips missing from the table")
    usng_precision: int = Field(DEFAULT_PRECISION, ge=0, le=5, description="USNG digits per axis")
    aggregation_level: AggregationLevel = Field("usng", description="usng, zip or county")
    notes: str = Field("", description="Free-form experiment notes")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {sorted(LOG_LEVELS)}, got {value!r}")
        return level

    @property
    def effective_workers(self) -> int:
        return self.workers or os.cpu_count() or 1


def _read_file(path: Path) -> Dict[str, Any]:
    try:
        if path.suffix.lower() in MARKDOWN_SUFFIXES:
            post = frontmatter.load(path)
            data = dict(post.metadata)
            if post.content.strip():
                data.setdefault("notes", post.content.strip())
            return data
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Failed to read configuration {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration {path} must be a mapping, got {type(data).__name__}")
    return data


def env_overrides(environ: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """Settings taken from ``FLOODSIGHT_SEED``, ``_WORKERS``, ``_OUTPUT_DIR`` and ``_LOG_LEVEL``."""
    environ = os.environ if environ is None else environ
    overrides: Dict[str, Any] = {}
    try:
        if environ.get(f"{ENV_PREFIX}SEED"):
            overrides["seed"] = int(environ[f"{ENV_PREFIX}SEED"])
        if environ.get(f"{ENV_PREFIX}WORKERS"):
            overrides["workers"] = int(environ[f"{ENV_PREFIX}WORKERS"])
    except ValueError as e:
        raise ConfigError(f"Invalid {ENV_PREFIX}* integer: {e}") from e
    if environ.get(f"{ENV_PREFIX}OUTPUT_DIR"):
        overrides.setdefault("paths", {})["output_dir"] = environ[f"{ENV_PREFIX}OUTPUT_DIR"]
    if environ.get(f"{ENV_PREFIX}LOG_LEVEL"):
        overrides["log_level"] = environ[f"{ENV_PREFIX}LOG_LEVEL"].upper()
    return overrides


def _merge(base: Dict[str, Any], updates: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(
    path: Optional[str | Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    use_env: bool = True,
) -> PipelineConfig:
    """Build a PipelineConfig from a file, the environment and explicit overrides.

    Args:
        path: YAML or Markdown-front-matter file; defaults only when ``None``
        overrides: Nested mapping applied last (CLI flags)
        use_env: Read ``.env`` and ``FLOODSIGHT_*`` variables

    Returns:
        Validated configuration with paths resolved against the file's directory

    Raises:
        ConfigError: Missing, unreadable or invalid configuration
    """
    data: Dict[str, Any] = {}
    base = Path.cwd()
    if path is not None:
        source = Path(path)
        if not source.exists():
            raise ConfigError(f"Configuration file not found: {source}")
        data = _read_file(source)
        base = source.resolve().parent
    if use_env:
        load_dotenv(override=False)
        data = _merge(data, env_overrides())
    if overrides:
        data = _merge(data, overrides)
    try:
        config = PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration{f' in {path}' if path else ''}: {e}") from e
    config = config.model_copy(update={"paths": config.paths.resolved(base)})
    logger.debug("Loaded configuration (seed=%d, workers=%s)", config.seed, config.workers)
    return config


def config_to_dict(config: PipelineConfig) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def save_config(path: str | Path, config: PipelineConfig) -> Path:
    """Write ``config`` as YAML, or as front matter plus notes for ``.md`` targets."""
    target = Path(path)
    data = config_to_dict(config)
    if target.suffix.lower() in MARKDOWN_SUFFIXES:
        notes = data.pop("notes", "")
        post = frontmatter.Post(notes, **data)
        return write_text(target, frontmatter.dumps(post) + "\n")
    return write_text(target, yaml.safe_dump(data, sort_keys=True))
