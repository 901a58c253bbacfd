"""Georeferenced raster and label-mask value types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from affine import Affine

from floodsight.errors import InvalidInputError

RGB_CHANNELS: Tuple[str, ...] = ("R", "G", "B")
HAND_CHANNEL = "HAND"

# xBD joint damage scale extended with class 0
DAMAGE_LEVELS: Tuple[str, ...] = (
    "No Building",
    "No Damage",
    "Minor Damage",
    "Major Damage",
    "Destroyed",
)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in some coordinate system (x = easting/lon, y = northing/lat)."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    @property
    def center(self) -> Tuple[float, float]:
        return ((self.min_x + self.max_x) / 2.0, (self.min_y + self.max_y) / 2.0)

    def contains(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def intersects(self, other: "BBox") -> bool:
        return not (
            other.min_x >= self.max_x
            or other.max_x <= self.min_x
            or other.min_y >= self.max_y
            or other.max_y <= self.min_y
        )

    def ring(self) -> list[list[float]]:
        """Closed counter-clockwise ring, GeoJSON style."""
        return [
            [self.min_x, self.min_y],
            [self.max_x, self.min_y],
            [self.max_x, self.max_y],
            [self.min_x, self.max_y],
            [self.min_x, self.min_y],
        ]


def _check_transform(transform: Affine) -> None:
    if transform.b != 0 or transform.d != 0:
        raise InvalidInputError(f"Rotated geotransforms are not supported: {transform}")
    if not transform.a > 0:
        raise InvalidInputError(f"pixel_size_x must be positive, got {transform.a}")
    if transform.e == 0:
        raise InvalidInputError("pixel_size_y must be non-zero")


@dataclass(frozen=True, eq=False)
class GeoRaster:
    """Multi-channel pixel grid with an affine geotransform and a CRS tag.

    ``pixels`` is laid out ``(H, W, C)``. The transform maps ``(col, row)``
    pixel-corner coordinates to map coordinates, so ``pixel_to_geo(0, 0)`` is
    the raster origin.
    """

    pixels: np.ndarray
    transform: Affine
    crs: str
    channel_names: Tuple[str, ...]

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim == 2:
            pixels = pixels[:, :, None]
        if pixels.ndim != 3:
            raise InvalidInputError(f"pixels must be (H, W, C), got shape {pixels.shape}")
        if min(pixels.shape) < 1:
            raise InvalidInputError(f"Empty raster: shape {pixels.shape}")
        names = tuple(self.channel_names)
        if len(names) != pixels.shape[2]:
            raise InvalidInputError(
                f"channel_names has {len(names)} labels for {pixels.shape[2]} channels"
            )
        if not self.crs:
            raise InvalidInputError("GeoRaster requires a CRS identifier")
        _check_transform(self.transform)
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "channel_names", names)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def count(self) -> int:
        return int(self.pixels.shape[2])

    @property
    def pixel_size(self) -> Tuple[float, float]:
        return (self.transform.a, self.transform.e)

    @property
    def extent(self) -> BBox:
        return extent_of(self.transform, self.height, self.width)

    def pixel_to_geo(self, row: float, col: float) -> Tuple[float, float]:
        return pixel_to_geo(self.transform, row, col)

    def geo_to_pixel(self, x: float, y: float) -> Tuple[float, float]:
        return geo_to_pixel(self.transform, x, y)

    def channel(self, name: str) -> np.ndarray:
        try:
            return self.pixels[:, :, self.channel_names.index(name)]
        except ValueError as e:
            raise InvalidInputError(f"No channel {name!r} in {self.channel_names}") from e

    def channel_indices(self, names: Sequence[str]) -> list[int]:
        return [i for i, n in enumerate(self.channel_names) if n in names]

    def with_pixels(
        self, pixels: np.ndarray, channel_names: Optional[Sequence[str]] = None
    ) -> "GeoRaster":
        return replace(
            self,
            pixels=pixels,
            channel_names=tuple(channel_names) if channel_names is not None else self.channel_names,
        )

    def same_grid(self, other: "GeoRaster") -> bool:
        return (
            self.crs == other.crs
            and self.transform.almost_equals(other.transform)
            and self.pixels.shape[:2] == other.pixels.shape[:2]
        )


@dataclass(frozen=True, eq=False)
class ClassMask:
    """Per-pixel class labels, optionally georeferenced."""

    labels: np.ndarray
    transform: Affine = field(default_factory=Affine.identity)
    crs: Optional[str] = None
    num_classes: int = 5

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise InvalidInputError(f"mask must be (H, W), got shape {labels.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise InvalidInputError(
                f"mask values must lie in [0, {self.num_classes - 1}], "
                f"got [{labels.min()}, {labels.max()}]"
            )
        object.__setattr__(self, "labels", labels.astype(np.uint8, copy=False))

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.labels.shape[0]), int(self.labels.shape[1]))

    def with_labels(self, labels: np.ndarray) -> "ClassMask":
        return replace(self, labels=labels)


@dataclass(frozen=True, eq=False)
class DamageMask(ClassMask):
    """Damage classes 0-4: No Building, No Damage, Minor, Major, Destroyed."""

    num_classes: int = 5

    def __post_init__(self) -> None:
        if self.num_classes != len(DAMAGE_LEVELS):
            raise InvalidInputError("DamageMask always has 5 classes")
        super().__post_init__()


def pixel_to_geo(transform: Affine, row: float, col: float) -> Tuple[float, float]:
    x, y = transform * (col, row)
    return (x, y)


def geo_to_pixel(transform: Affine, x: float, y: float) -> Tuple[float, float]:
    col, row = ~transform * (x, y)
    return (row, col)


def extent_of(transform: Affine, height: int, width: int) -> BBox:
    x0, y0 = transform * (0, 0)
    x1, y1 = transform * (width, height)
    return BBox(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))


def offset_transform(transform: Affine, row_off: int, col_off: int) -> Affine:
    """Geotransform of a window whose top-left pixel is ``(row_off, col_off)``."""
    return transform * Affine.translation(col_off, row_off)


def tile_count(size: int, tile_size: int) -> int:
    return int(math.ceil(size / tile_size))
