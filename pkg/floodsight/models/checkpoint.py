"""Single-file model checkpoints: kind, config, parameters and normalization stats."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

import torch

from floodsight.errors import InvalidInputError
from floodsight.fileio import atomic_path
from floodsight.models.dual_unet import DualUNet, DualUNetConfig
from floodsight.models.unet import SegmentationUNet, SegUNetConfig
from floodsight.raster.normalize import ChannelStats

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

ModelKind = Literal["segment", "damage"]
Model = Union[SegmentationUNet, DualUNet]


@dataclass(frozen=True, eq=False)
class Checkpoint:
    kind: ModelKind
    model: Model
    stats: Optional[ChannelStats]


def model_kind(model: Model) -> ModelKind:
    return "damage" if isinstance(model, DualUNet) else "segment"


def save_checkpoint(path: str | Path, model: Model, stats: Optional[ChannelStats] = None) -> Path:
    target = Path(path)
    payload = {
        "version": CHECKPOINT_VERSION,
        "kind": model_kind(model),
        "config": model.config.model_dump(),
        "state_dict": model.state_dict(),
        "stats": stats.to_json() if stats is not None else None,
    }
    with atomic_path(target) as tmp:
        torch.save(payload, tmp)
    logger.info("Saved %s checkpoint to %s", payload["kind"], target)
    return target


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Rebuild the model stored at ``path``.

    Raises:
        InvalidInputError: If the archive is missing or not a floodsight checkpoint
    """
    source = Path(path)
    try:
        payload = torch.load(source, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError) as e:
        raise InvalidInputError(f"Cannot load checkpoint {source}: {e}") from e

    if not isinstance(payload, dict) or payload.get("version") != CHECKPOINT_VERSION:
        raise InvalidInputError(f"{source} is not a floodsight checkpoint")

    kind = payload["kind"]
    if kind == "damage":
        model: Model = DualUNet(DualUNetConfig(**payload["config"]))
    elif kind == "segment":
        model = SegmentationUNet(SegUNetConfig(**payload["config"]))
    else:
        raise InvalidInputError(f"Unknown checkpoint kind {kind!r} in {source}")
    model.load_state_dict(payload["state_dict"])
    model.eval()

    stats = ChannelStats.from_json(payload["stats"]) if payload.get("stats") else None
    return Checkpoint(kind=kind, model=model, stats=stats)
