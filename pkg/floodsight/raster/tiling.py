"""Cut rasters into fixed-size tiles and stitch them back together."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from affine import Affine

from floodsight.errors import InvalidInputError
from floodsight.raster.georaster import (
    BBox,
    GeoRaster,
    extent_of,
    offset_transform,
    tile_count,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TileSet:
    """Row-major tiles of one source raster.

    Edge tiles are padded on the bottom/right with ``pad_value``; the
    source shape and transform are kept so padding can be cropped again.
    """

    tiles: Tuple[GeoRaster, ...]
    grid_shape: Tuple[int, int]
    tile_size: int
    source_shape: Tuple[int, int]
    source_transform: Affine
    pad_value: float

    @property
    def source_extent(self) -> BBox:
        return extent_of(self.source_transform, *self.source_shape)

    def __len__(self) -> int:
        return len(self.tiles)

    def map(self, fn: Callable[[GeoRaster], GeoRaster]) -> "TileSet":
        """Apply ``fn`` to every tile, keeping the layout."""
        return TileSet(
            tiles=tuple(fn(tile) for tile in self.tiles),
            grid_shape=self.grid_shape,
            tile_size=self.tile_size,
            source_shape=self.source_shape,
            source_transform=self.source_transform,
            pad_value=self.pad_value,
        )

    def with_tiles(self, tiles: List[GeoRaster]) -> "TileSet":
        if len(tiles) != len(self.tiles):
            raise InvalidInputError(f"Expected {len(self.tiles)} tiles, got {len(tiles)}")
        return TileSet(
            tiles=tuple(tiles),
            grid_shape=self.grid_shape,
            tile_size=self.tile_size,
            source_shape=self.source_shape,
            source_transform=self.source_transform,
            pad_value=self.pad_value,
        )


def tile_raster(raster: GeoRaster, tile_size: int, pad_value: float = 0.0) -> TileSet:
    """Split ``raster`` into ``tile_size`` x ``tile_size`` tiles.

    Args:
        raster: Source raster
        tile_size: Edge length of each tile in pixels
        pad_value: Fill for the padded bottom/right margins of edge tiles

    Returns:
        TileSet with ``ceil(H/tile_size) x ceil(W/tile_size)`` tiles

    Raises:
        InvalidInputError: If ``tile_size`` < 1 or the raster is empty
    """
    if tile_size < 1:
        raise InvalidInputError(f"tile_size must be >= 1, got {tile_size}")
    if raster.pixels.size == 0:
        raise InvalidInputError("Cannot tile an empty raster")

    height, width, channels = raster.pixels.shape
    rows, cols = tile_count(height, tile_size), tile_count(width, tile_size)
    padded = np.full(
        (rows * tile_size, cols * tile_size, channels), pad_value, dtype=raster.pixels.dtype
    )
    padded[:height, :width] = raster.pixels

    tiles = []
    for r in range(rows):
        for c in range(cols):
            row_off, col_off = r * tile_size, c * tile_size
            block = padded[row_off:row_off + tile_size, col_off:col_off + tile_size].copy()
            tiles.append(
                GeoRaster(
                    pixels=block,
                    transform=offset_transform(raster.transform, row_off, col_off),
                    crs=raster.crs,
                    channel_names=raster.channel_names,
                )
            )

    logger.debug("Tiled %dx%d raster into %dx%d tiles of %d", height, width, rows, cols, tile_size)
    return TileSet(
        tiles=tuple(tiles),
        grid_shape=(rows, cols),
        tile_size=tile_size,
        source_shape=(height, width),
        source_transform=raster.transform,
        pad_value=pad_value,
    )


def reassemble(tiles: TileSet) -> GeoRaster:
    """Stitch a TileSet back into a single raster, cropping the padding.

    Raises:
        InvalidInputError: If tiles disagree in size, channels or count
    """
    rows, cols = tiles.grid_shape
    size = tiles.tile_size
    if rows * cols != len(tiles.tiles) or not tiles.tiles:
        raise InvalidInputError(
            f"TileSet grid {rows}x{cols} does not match {len(tiles.tiles)} tiles"
        )

    first = tiles.tiles[0]
    channels = first.count
    for tile in tiles.tiles:
        if tile.pixels.shape != (size, size, channels):
            raise InvalidInputError(
                f"Inconsistent tile shape {tile.pixels.shape}, expected {(size, size, channels)}"
            )

    canvas = np.empty((rows * size, cols * size, channels), dtype=first.pixels.dtype)
    for index, tile in enumerate(tiles.tiles):
        r, c = divmod(index, cols)
        canvas[r * size:(r + 1) * size, c * size:(c + 1) * size] = tile.pixels

    height, width = tiles.source_shape
    return GeoRaster(
        pixels=canvas[:height, :width].copy(),
        transform=tiles.source_transform,
        crs=first.crs,
        channel_names=first.channel_names,
    )
