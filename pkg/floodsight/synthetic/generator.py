"""Deterministic synthetic imagery with ground truth.

Every sample is a pure function of ``(config, index)``: the random stream is
``numpy.random.default_rng([seed, stream, index])``. Scenes sit side by side
on a UTM grid so that buildings from different samples land in different
zip codes and USNG cells.

Damage recipes (post-event rendering of a building footprint):

    level 1  intact              post == pre up to global noise
    level 2  speckled            SPECKLE_DENSITY of roof pixels turn to debris
    level 3  partially erased    ERASE_FRACTION of the roof shows background,
                                 the rest is speckled
    level 4  erased              the whole footprint shows background
"""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np
from affine import Affine
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy import ndimage

from floodsight.financial.buildings import FEET_PER_METRE
from floodsight.models.unet import SEMANTIC_CLASSES
from floodsight.raster.georaster import (
    HAND_CHANNEL,
    RGB_CHANNELS,
    ClassMask,
    DamageMask,
    GeoRaster,
)

SPECKLE_DENSITY = 0.35
ERASE_FRACTION = 0.6
SCENES_PER_ROW = 10

_DAMAGE_STREAM = 0
_FLOOD_STREAM = 1

BACKGROUND_RGB = (0.42, 0.40, 0.30)
DEBRIS_RGB = (0.18, 0.15, 0.12)
WATER_RGB = (0.20, 0.26, 0.32)
VEGETATION_RGB = (0.20, 0.45, 0.18)
ROAD_RGB = (0.55, 0.55, 0.55)
ROOF_RGB = (0.80, 0.74, 0.68)

BACKGROUND, WATER, VEGETATION, ROAD, BUILDING = range(len(SEMANTIC_CLASSES))


class SynthConfig(BaseModel):
    """Shape and content of a synthetic dataset."""

    seed: int = Field(0, description="Master seed")
    image_size: int = Field(64, ge=16, description="Square image side in pixels")
    n_samples: int = Field(200, ge=1, description="Number of samples")
    buildings_per_image: Tuple[int, int] = Field((3, 8), description="Inclusive building count range")
    building_size: Tuple[int, int] = Field((6, 14), description="Inclusive building side range in pixels")
    damage_distribution: List[float] = Field(
        default_factory=lambda: [0.4, 0.2, 0.2, 0.2],
        description="Probabilities of damage levels 1-4",
    )
    water_blobs: Tuple[int, int] = Field((1, 3), description="Inclusive water blob count range")
    water_radius: Tuple[int, int] = Field((5, 12), description="Inclusive water blob radius range in pixels")
    confuser_prob: float = Field(0.8, ge=0.0, le=1.0, description="Chance of a wet-pavement patch per flood scene")
    noise_std: float = Field(0.02, ge=0.0, description="Per-pixel Gaussian noise")
    gsd: float = Field(3.0, gt=0.0, description="Ground sample distance in ft/pixel")
    crs: str = Field("EPSG:32615", description="Projected CRS of the scene grid")
    origin: Tuple[float, float] = Field((270_000.0, 3_300_000.0), description="Upper-left corner of scene 0")

    @field_validator("damage_distribution")
    @classmethod
    def _distribution(cls, value: List[float]) -> List[float]:
        if len(value) != 4 or any(p < 0 for p in value):
            raise ValueError("damage_distribution needs 4 non-negative probabilities")
        if not math.isclose(sum(value), 1.0, abs_tol=1e-9):
            raise ValueError(f"damage_distribution must sum to 1, got {sum(value)}")
        return value

    @model_validator(mode="after")
    def _ranges(self) -> "SynthConfig":
        for name in ("buildings_per_image", "building_size", "water_blobs", "water_radius"):
            low, high = getattr(self, name)
            if low < 0 or low > high:
                raise ValueError(f"{name} must be an increasing non-negative range")
        if self.building_size[1] + 2 > self.image_size:
            raise ValueError("building_size exceeds image_size")
        return self

    @property
    def gsd_m(self) -> float:
        return self.gsd / FEET_PER_METRE

    def transform_for(self, index: int) -> Affine:
        """Geotransform of sample ``index``; scenes fill rows of SCENES_PER_ROW."""
        span = self.image_size * self.gsd_m
        row, col = divmod(index, SCENES_PER_ROW)
        x0, y0 = self.origin
        return Affine(self.gsd_m, 0.0, x0 + col * span, 0.0, -self.gsd_m, y0 - row * span)


def _rng(config: SynthConfig, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, stream, index])


def _texture(rng: np.random.Generator, size: int, base: Tuple[float, float, float], amplitude: float) -> np.ndarray:
    noise = ndimage.gaussian_filter(rng.standard_normal((size, size, 3)), sigma=(2.0, 2.0, 0.0))
    noise /= max(noise.std(), 1e-12)
    return np.asarray(base)[None, None, :] + amplitude * noise


def _place_rectangles(
    rng: np.random.Generator,
    size: int,
    count: int,
    side_range: Tuple[int, int],
    blocked: np.ndarray,
    attempts: int = 50,
) -> List[Tuple[int, int, int, int]]:
    """Non-touching rectangles ``(row, col, height, width)`` avoiding ``blocked``."""
    occupied = blocked.copy()
    placed = []
    for _ in range(count):
        for _ in range(attempts):
            h = int(rng.integers(side_range[0], side_range[1] + 1))
            w = int(rng.integers(side_range[0], side_range[1] + 1))
            r = int(rng.integers(1, size - h))
            c = int(rng.integers(1, size - w))
            # one-pixel gap keeps footprints apart under 8-connectivity
            if not occupied[r - 1 : r + h + 1, c - 1 : c + w + 1].any():
                occupied[r - 1 : r + h + 1, c - 1 : c + w + 1] = True
                placed.append((r, c, h, w))
                break
    return placed


def _raster(pixels: np.ndarray, config: SynthConfig, index: int, names=RGB_CHANNELS) -> GeoRaster:
    return GeoRaster(
        pixels=pixels, transform=config.transform_for(index), crs=config.crs, channel_names=names
    )


def generate_damage_pair(config: SynthConfig, index: int) -> Tuple[GeoRaster, GeoRaster, DamageMask]:
    """Pre/post image pair with per-pixel damage truth for sample ``index``."""
    rng = _rng(config, _DAMAGE_STREAM, index)
    size = config.image_size
    background = _texture(rng, size, BACKGROUND_RGB, 0.04)
    pre = background.copy()
    truth = np.zeros((size, size), dtype=np.uint8)

    count = int(rng.integers(config.buildings_per_image[0], config.buildings_per_image[1] + 1))
    rectangles = _place_rectangles(rng, size, count, config.building_size, np.zeros((size, size), bool))
    levels = rng.choice([1, 2, 3, 4], size=len(rectangles), p=config.damage_distribution)

    post = pre.copy()
    for (r, c, h, w), level in zip(rectangles, levels):
        roof = np.asarray(ROOF_RGB) + rng.uniform(-0.08, 0.08, size=3)
        window = (slice(r, r + h), slice(c, c + w))
        pre[window] = roof + 0.02 * rng.standard_normal((h, w, 3))
        post[window] = pre[window]
        truth[window] = level

        if level == 2:
            speckle = rng.random((h, w)) < SPECKLE_DENSITY
            post[window][speckle] = DEBRIS_RGB
        elif level == 3:
            erased = np.zeros((h, w), dtype=bool)
            if rng.random() < 0.5:
                erased[: int(round(ERASE_FRACTION * h)), :] = True
            else:
                erased[:, : int(round(ERASE_FRACTION * w))] = True
            speckle = (rng.random((h, w)) < SPECKLE_DENSITY) & ~erased
            block = post[window]
            block[erased] = background[window][erased]
            block[speckle] = DEBRIS_RGB
        elif level == 4:
            post[window] = background[window]

    pre = pre + config.noise_std * rng.standard_normal(pre.shape)
    post = post + config.noise_std * rng.standard_normal(post.shape)
    pre, post = np.clip(pre, 0.0, 1.0), np.clip(post, 0.0, 1.0)
    return (
        _raster(pre, config, index),
        _raster(post, config, index),
        DamageMask(labels=truth, transform=config.transform_for(index), crs=config.crs),
    )


def _drainage(rng: np.random.Generator, size: int) -> np.ndarray:
    cols = np.arange(size)
    start = rng.uniform(0.25, 0.75) * size
    amplitude = rng.uniform(0.05, 0.2) * size
    period = rng.uniform(0.8, 2.0) * size
    phase = rng.uniform(0.0, 2.0 * np.pi)
    rows = np.clip(np.round(start + amplitude * np.sin(2 * np.pi * cols / period + phase)), 0, size - 1)
    line = np.zeros((size, size), dtype=bool)
    line[rows.astype(int), cols] = True
    if rng.random() < 0.5:
        line = line.T
    return line


def _disks(size: int, centers: List[Tuple[int, int]], radii: List[int]) -> np.ndarray:
    rr, cc = np.mgrid[0:size, 0:size]
    out = np.zeros((size, size), dtype=bool)
    for (r, c), radius in zip(centers, radii):
        out |= (rr - r) ** 2 + (cc - c) ** 2 <= radius ** 2
    return out


def generate_flood_scene(config: SynthConfig, index: int) -> Tuple[GeoRaster, GeoRaster, ClassMask]:
    """RGB image, HAND surface and semantic truth for flood scene ``index``.

    HAND is a smoothed distance-to-drainage surface in metres. Water blobs are
    centred on low HAND. An optional wet-pavement patch on high ground is
    painted with the water palette but labelled road, so RGB alone cannot
    separate it from flooding.
    """
    rng = _rng(config, _FLOOD_STREAM, index)
    size = config.image_size

    drainage = _drainage(rng, size)
    distance = ndimage.distance_transform_edt(~drainage) * config.gsd_m
    hand = ndimage.gaussian_filter(distance * rng.uniform(0.08, 0.15), sigma=2.0)
    hand = np.maximum(hand + 0.05 * rng.standard_normal(hand.shape), 0.0)

    truth = np.full((size, size), BACKGROUND, dtype=np.uint8)
    vegetation_field = ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma=4.0)
    truth[vegetation_field > np.quantile(vegetation_field, 0.7)] = VEGETATION

    road = np.zeros((size, size), dtype=bool)
    offset = int(rng.integers(4, size - 7))
    if rng.random() < 0.5:
        road[offset : offset + 3, :] = True
    else:
        road[:, offset : offset + 3] = True
    truth[road] = ROAD

    # water centres drawn with probability decreasing in HAND
    n_blobs = int(rng.integers(config.water_blobs[0], config.water_blobs[1] + 1))
    weights = np.exp(-hand / max(hand.mean(), 1e-6) * 4.0).ravel()
    picks = rng.choice(size * size, size=n_blobs, replace=False, p=weights / weights.sum())
    centers = [divmod(int(p), size) for p in picks]
    radii = [int(rng.integers(config.water_radius[0], config.water_radius[1] + 1)) for _ in centers]
    water = _disks(size, centers, radii) & (hand <= np.quantile(hand, 0.5))
    water |= drainage
    truth[water] = WATER

    confuser = np.zeros((size, size), dtype=bool)
    if rng.random() < config.confuser_prob:
        high = np.flatnonzero((hand >= np.quantile(hand, 0.8)).ravel() & ~water.ravel())
        if high.size:
            center = divmod(int(rng.choice(high)), size)
            radius = int(rng.integers(config.water_radius[0], config.water_radius[1] + 1))
            confuser = _disks(size, [center], [radius]) & (hand >= np.quantile(hand, 0.6)) & ~water
            truth[confuser] = ROAD

    blocked = water | road | confuser
    count = int(rng.integers(config.buildings_per_image[0], config.buildings_per_image[1] + 1))
    for r, c, h, w in _place_rectangles(rng, size, count, config.building_size, blocked):
        truth[r : r + h, c : c + w] = BUILDING

    palette = {
        BACKGROUND: BACKGROUND_RGB,
        WATER: WATER_RGB,
        VEGETATION: VEGETATION_RGB,
        ROAD: ROAD_RGB,
        BUILDING: ROOF_RGB,
    }
    rgb = np.zeros((size, size, 3))
    for label, color in palette.items():
        rgb[truth == label] = color
    rgb[confuser] = WATER_RGB
    rgb = rgb + _texture(rng, size, (0.0, 0.0, 0.0), 0.03) + config.noise_std * rng.standard_normal(rgb.shape)
    rgb = np.clip(rgb, 0.0, 1.0)

    transform = config.transform_for(index)
    return (
        _raster(rgb, config, index),
        GeoRaster(pixels=hand, transform=transform, crs=config.crs, channel_names=(HAND_CHANNEL,)),
        ClassMask(labels=truth, transform=transform, crs=config.crs, num_classes=len(SEMANTIC_CLASSES)),
    )
