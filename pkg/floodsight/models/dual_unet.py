"""Dual-input U-Net for pre/post-event building damage classification.

One encoder instance is applied to both images, so the two branches share
every weight by construction. At each decoder level the skip connection
carries ``post_features - pre_features`` (optionally preceded by the pre
features); the decoder starts from the post-image bottleneck.
"""

from __future__ import annotations

import logging
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
import torch
import torch.nn as nn
from pydantic import BaseModel, Field

from floodsight.errors import AlignmentError, InvalidInputError
from floodsight.models.blocks import EncoderKind, UNetDecoder, build_encoder
from floodsight.models.unet import check_input, count_parameters, raster_to_tensor
from floodsight.raster.georaster import DamageMask, GeoRaster
from floodsight.raster.normalize import ChannelStats, normalize

logger = logging.getLogger(__name__)

SkipMode = Literal["difference", "pre_plus_difference"]
SkipHook = Callable[[int, torch.Tensor], None]


class DualUNetConfig(BaseModel):
    """Hyperparameters of the dual-encoder U-Net."""

    in_channels: Literal[3] = Field(3, description="Channels per input image")
    num_classes: Literal[5] = Field(5, description="Damage levels 0-4")
    depth: int = Field(4, ge=2, description="Encoder levels (pooling steps)")
    base_width: int = Field(16, ge=1, description="Channels at the first level")
    skip_mode: SkipMode = Field("difference", description="What each skip connection carries")
    encoder_kind: EncoderKind = Field("generic", description="generic or compound-scaled")

    @property
    def divisor(self) -> int:
        return 2 ** self.depth


class DualUNet(nn.Module):
    def __init__(self, config: DualUNetConfig):
        super().__init__()
        self.config = config
        self.encoder = build_encoder(
            config.encoder_kind, config.in_channels, config.depth, config.base_width
        )
        skip_multiplier = 2 if config.skip_mode == "pre_plus_difference" else 1
        self.decoder = UNetDecoder(
            config.depth, config.base_width, config.num_classes, skip_multiplier
        )
        self._skip_hooks: List[SkipHook] = []

    def add_skip_hook(self, hook: SkipHook) -> Callable[[], None]:
        """Call ``hook(level, difference)`` for every difference skip on each forward.

        Returns:
            A callable that removes the hook
        """
        self._skip_hooks.append(hook)

        def remove() -> None:
            if hook in self._skip_hooks:
                self._skip_hooks.remove(hook)

        return remove

    def encode(self, image: torch.Tensor) -> Tuple[List[torch.Tensor], torch.Tensor]:
        # Every branch goes through this single encoder instance.
        return self.encoder(image)

    def forward_with_skips(
        self, pre: torch.Tensor, post: torch.Tensor
    ) -> Tuple[torch.Tensor, List[torch.Tensor]]:
        """Forward pass that also returns the per-level difference tensors."""
        if pre.shape != post.shape:
            raise InvalidInputError(
                f"pre {tuple(pre.shape)} and post {tuple(post.shape)} differ in shape"
            )
        pre_skips, _ = self.encode(pre)
        post_skips, post_bottom = self.encode(post)

        differences = [b - a for a, b in zip(pre_skips, post_skips)]
        for level, diff in enumerate(differences):
            for hook in self._skip_hooks:
                hook(level, diff)

        if self.config.skip_mode == "pre_plus_difference":
            skips = [torch.cat([a, d], dim=1) for a, d in zip(pre_skips, differences)]
        else:
            skips = differences
        return self.decoder(post_bottom, skips), differences

    def forward(self, pre: torch.Tensor, post: torch.Tensor) -> torch.Tensor:
        logits, _ = self.forward_with_skips(pre, post)
        return logits


def build_dual_unet(config: DualUNetConfig, seed: int = 0) -> DualUNet:
    """Instantiate a dual-encoder U-Net with weights drawn from ``seed``."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = DualUNet(config)
    logger.debug("Built dual U-Net: %d parameters (%s)", count_parameters(model), config.model_dump())
    return model


def predict_damage(
    model: DualUNet,
    pre: GeoRaster,
    post: GeoRaster,
    stats: Optional[ChannelStats] = None,
) -> DamageMask:
    """Classify per-pixel damage from an aligned pre/post pair.

    Ties between logits resolve to the lowest class index.

    Raises:
        AlignmentError: If the rasters are not on the same grid
        InvalidInputError: On channel or shape mismatch
    """
    if not pre.same_grid(post):
        raise AlignmentError(
            f"pre ({pre.height}x{pre.width}, {pre.transform}) and post "
            f"({post.height}x{post.width}, {post.transform}) are not aligned"
        )
    config = model.config
    check_input(pre, config.in_channels, config.divisor)
    check_input(post, config.in_channels, config.divisor)
    if stats is not None:
        pre, post = normalize(pre, stats), normalize(post, stats)

    dtype = next(model.parameters()).dtype
    model.eval()
    with torch.no_grad():
        logits = model(raster_to_tensor(pre, dtype), raster_to_tensor(post, dtype))
    labels = torch.argmax(logits[0], dim=0).cpu().numpy().astype(np.uint8)
    return DamageMask(labels=labels, transform=pre.transform, crs=pre.crs)
