"""Single-input U-Net for scene segmentation and flood mapping (RGB or RGB+HAND)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np
import torch
import torch.nn as nn
from pydantic import BaseModel, Field

from floodsight.errors import InvalidInputError
from floodsight.models.blocks import EncoderKind, UNetDecoder, build_encoder
from floodsight.raster.georaster import ClassMask, GeoRaster
from floodsight.raster.normalize import ChannelStats, normalize

logger = logging.getLogger(__name__)

SEMANTIC_CLASSES: List[str] = ["background", "water", "vegetation", "road", "building"]
WATER_CLASS = SEMANTIC_CLASSES.index("water")


class SegUNetConfig(BaseModel):
    """Hyperparameters of the segmentation U-Net."""

    in_channels: Literal[3, 4] = Field(4, description="3 for RGB, 4 for RGB+HAND")
    num_classes: int = Field(5, ge=2, description="Number of semantic classes")
    depth: int = Field(4, ge=2, description="Encoder levels (pooling steps)")
    base_width: int = Field(16, ge=1, description="Channels at the first level")
    encoder_kind: EncoderKind = Field("generic", description="generic or compound-scaled")
    class_names: Optional[List[str]] = Field(
        None, description="Optional labels for the classes, defaults to SEMANTIC_CLASSES"
    )

    @property
    def divisor(self) -> int:
        return 2 ** self.depth


class SegmentationUNet(nn.Module):
    def __init__(self, config: SegUNetConfig):
        super().__init__()
        self.config = config
        self.encoder = build_encoder(
            config.encoder_kind, config.in_channels, config.depth, config.base_width
        )
        self.decoder = UNetDecoder(config.depth, config.base_width, config.num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips, bottom = self.encoder(x)
        return self.decoder(bottom, skips)


def build_segmentation_unet(config: SegUNetConfig, seed: int = 0) -> SegmentationUNet:
    """Instantiate a segmentation U-Net with weights drawn from ``seed``.

    The global torch RNG is left untouched.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = SegmentationUNet(config)
    logger.debug(
        "Built segmentation U-Net: %d parameters (%s)",
        count_parameters(model),
        config.model_dump(),
    )
    return model


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


@dataclass(frozen=True, eq=False)
class SegmentationResult:
    mask: ClassMask
    probabilities: np.ndarray  # (H, W, num_classes)


def raster_to_tensor(raster: GeoRaster, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(H, W, C) raster -> (1, C, H, W) tensor."""
    array = np.ascontiguousarray(np.moveaxis(raster.pixels.astype(np.float64), -1, 0))
    return torch.from_numpy(array).to(dtype).unsqueeze(0)


def check_input(raster: GeoRaster, in_channels: int, divisor: int) -> None:
    if raster.count != in_channels:
        raise InvalidInputError(
            f"Model expects {in_channels} channels, tile has {raster.count}"
        )
    if raster.height % divisor or raster.width % divisor:
        raise InvalidInputError(
            f"Tile {raster.height}x{raster.width} is not divisible by {divisor}"
        )


def segment(
    model: SegmentationUNet,
    tile: GeoRaster,
    stats: Optional[ChannelStats] = None,
) -> SegmentationResult:
    """Label every pixel of ``tile`` with its most probable class.

    Args:
        model: Segmentation U-Net
        tile: Raster with ``config.in_channels`` channels and H, W divisible by ``2**depth``
        stats: Optional normalization statistics applied before inference

    Returns:
        SegmentationResult with the argmax mask (ties go to the lowest class)
        and the per-pixel softmax probabilities

    Raises:
        InvalidInputError: On channel or shape mismatch
    """
    config = model.config
    check_input(tile, config.in_channels, config.divisor)
    if stats is not None:
        tile = normalize(tile, stats)

    dtype = next(model.parameters()).dtype
    model.eval()
    with torch.no_grad():
        logits = model(raster_to_tensor(tile, dtype))
        probs = torch.softmax(logits, dim=1)[0]
    labels = torch.argmax(logits[0], dim=0).cpu().numpy().astype(np.uint8)
    mask = ClassMask(
        labels=labels,
        transform=tile.transform,
        crs=tile.crs,
        num_classes=config.num_classes,
    )
    return SegmentationResult(mask=mask, probabilities=np.moveaxis(probs.cpu().numpy(), 0, -1))
