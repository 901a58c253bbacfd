"""Seeded training augmentations: rotations and RGB-only photometric jitter."""

from __future__ import annotations

from typing import Tuple, TypeVar

import numpy as np
from pydantic import BaseModel, Field
from scipy import ndimage

from floodsight.errors import InvalidInputError
from floodsight.raster.georaster import RGB_CHANNELS, ClassMask, GeoRaster

MaskT = TypeVar("MaskT", bound=ClassMask)


class AugmentConfig(BaseModel):
    """Augmentation parameters. All probabilities at 0 gives the identity."""

    rotation_prob: float = Field(0.75, ge=0.0, le=1.0, description="Chance of rotating a sample")
    arbitrary_angles: bool = Field(
        False, description="Rotate by any angle instead of 90 degree multiples"
    )
    max_angle: float = Field(180.0, gt=0.0, le=180.0, description="Bound for arbitrary angles")
    photometric_prob: float = Field(0.5, ge=0.0, le=1.0, description="Chance of jittering RGB")
    brightness: float = Field(0.1, ge=0.0, description="Max absolute brightness shift")
    contrast: float = Field(0.1, ge=0.0, lt=1.0, description="Max relative contrast change")


def rotate90(tile: GeoRaster, mask: MaskT, k: int) -> Tuple[GeoRaster, MaskT]:
    """Rotate tile and mask together by ``k`` quarter turns counter-clockwise.

    The geotransform is left untouched; rotated tiles are training samples,
    not map products.
    """
    pixels = np.rot90(tile.pixels, k=k, axes=(0, 1)).copy()
    labels = np.rot90(mask.labels, k=k).copy()
    return tile.with_pixels(pixels), mask.with_labels(labels)


def rotate_by(tile: GeoRaster, mask: MaskT, angle: float) -> Tuple[GeoRaster, MaskT]:
    """Rotate by an arbitrary angle in degrees; corners are filled with 0 / class 0."""
    pixels = ndimage.rotate(
        tile.pixels, angle, axes=(1, 0), reshape=False, order=1, mode="constant", cval=0.0
    )
    labels = ndimage.rotate(
        mask.labels, angle, axes=(1, 0), reshape=False, order=0, mode="constant", cval=0
    )
    return tile.with_pixels(pixels), mask.with_labels(labels)


def adjust_brightness_contrast(tile: GeoRaster, brightness: float, contrast: float) -> GeoRaster:
    """Apply ``(x - mean) * contrast + mean + brightness`` to the R, G, B channels only."""
    pixels = tile.pixels.astype(np.float64, copy=True)
    for index in tile.channel_indices(RGB_CHANNELS):
        channel = pixels[:, :, index]
        mean = channel.mean()
        pixels[:, :, index] = (channel - mean) * contrast + mean + brightness
    return tile.with_pixels(pixels)


def augment(
    tile: GeoRaster,
    mask: MaskT,
    seed: int,
    params: AugmentConfig | None = None,
) -> Tuple[GeoRaster, MaskT]:
    """Draw and apply one augmentation for ``(tile, mask)``.

    The draw is a pure function of ``seed``. Geometric transforms move the
    mask with the tile; photometric ones touch neither the HAND channel nor
    the mask.

    Raises:
        InvalidInputError: If tile and mask differ in height/width
    """
    params = params or AugmentConfig()
    if tile.pixels.shape[:2] != mask.labels.shape:
        raise InvalidInputError(
            f"Tile {tile.pixels.shape[:2]} and mask {mask.labels.shape} differ in shape"
        )

    rng = np.random.default_rng(seed)
    do_rotate = rng.random() < params.rotation_prob
    quarter_turns = int(rng.integers(1, 4))
    angle = float(rng.uniform(-params.max_angle, params.max_angle))
    do_photometric = rng.random() < params.photometric_prob
    shift = float(rng.uniform(-params.brightness, params.brightness))
    factor = float(rng.uniform(1.0 - params.contrast, 1.0 + params.contrast))

    if do_rotate:
        if params.arbitrary_angles:
            tile, mask = rotate_by(tile, mask, angle)
        else:
            tile, mask = rotate90(tile, mask, quarter_turns)
    if do_photometric:
        tile = adjust_brightness_contrast(tile, shift, factor)
    return tile, mask
