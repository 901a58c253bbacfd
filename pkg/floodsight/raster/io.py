"""GeoTIFF and mask PNG input/output."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import rasterio
from affine import Affine
from PIL import Image
from rasterio.errors import RasterioIOError

from floodsight.errors import InvalidInputError
from floodsight.fileio import atomic_path
from floodsight.raster.georaster import HAND_CHANNEL, RGB_CHANNELS, ClassMask, DamageMask, GeoRaster

logger = logging.getLogger(__name__)

DEFAULT_CRS = "EPSG:4326"


def read_geotiff(path: str | Path, channel_names: Optional[Sequence[str]] = None) -> GeoRaster:
    """Read a GeoTIFF into a GeoRaster.

    Band descriptions become channel names unless ``channel_names`` is given.

    Raises:
        InvalidInputError: If the file has no CRS or cannot be opened
    """
    source = Path(path)
    try:
        with rasterio.open(source) as src:
            data = src.read()
            transform = src.transform
            crs = src.crs.to_string() if src.crs else None
            descriptions = src.descriptions
    except RasterioIOError as e:
        raise InvalidInputError(f"Cannot read raster {source}: {e}") from e

    if crs is None:
        raise InvalidInputError(f"Raster {source} has no CRS")
    if channel_names is None:
        channel_names = [d or f"band{i + 1}" for i, d in enumerate(descriptions)]
    return GeoRaster(
        pixels=np.moveaxis(data, 0, -1),
        transform=transform,
        crs=crs,
        channel_names=tuple(channel_names),
    )


def read_rgb_geotiff(path: str | Path) -> GeoRaster:
    """Read imagery as R, G, B in [0, 1] whatever its band descriptions.

    Only the first three bands are kept. Integer bands are scaled by their
    dtype maximum, so 8-bit and 16-bit products land on the same range as
    the float rasters written by this package.

    Raises:
        InvalidInputError: If the raster has fewer than three bands
    """
    raster = read_geotiff(path)
    if raster.count < 3:
        raise InvalidInputError(f"{path} has {raster.count} band(s), imagery needs 3")
    pixels = raster.pixels[:, :, :3]
    if np.issubdtype(pixels.dtype, np.integer):
        pixels = pixels.astype(np.float64) / np.iinfo(pixels.dtype).max
    return raster.with_pixels(pixels.astype(np.float64), RGB_CHANNELS)


def read_hand_geotiff(path: str | Path) -> GeoRaster:
    """Read the first band of a HAND raster, in metres, as the ``HAND`` channel."""
    raster = read_geotiff(path)
    return raster.with_pixels(raster.pixels[:, :, :1].astype(np.float64), (HAND_CHANNEL,))


def write_geotiff(path: str | Path, raster: GeoRaster) -> Path:
    """Atomically write ``raster`` as a GeoTIFF with band descriptions."""
    target = Path(path)
    data = np.moveaxis(raster.pixels, -1, 0)
    profile = {
        "driver": "GTiff",
        "height": raster.height,
        "width": raster.width,
        "count": raster.count,
        "dtype": data.dtype.name,
        "crs": raster.crs,
        "transform": raster.transform,
    }
    with atomic_path(target) as tmp:
        with rasterio.open(tmp, "w", **profile) as dst:
            dst.write(data)
            for index, name in enumerate(raster.channel_names, start=1):
                dst.set_band_description(index, name)
    logger.debug("Wrote GeoTIFF %s (%dx%dx%d)", target, raster.height, raster.width, raster.count)
    return target


def write_mask_png(path: str | Path, mask: ClassMask) -> Path:
    """Write class labels as a single-channel 8-bit PNG."""
    target = Path(path)
    with atomic_path(target) as tmp:
        Image.fromarray(mask.labels.astype(np.uint8)).save(tmp, format="PNG")
    return target


def read_mask_png(
    path: str | Path,
    transform: Optional[Affine] = None,
    crs: Optional[str] = None,
    num_classes: int = 5,
) -> ClassMask:
    """Read an 8-bit PNG mask. Five-class masks come back as DamageMask."""
    source = Path(path)
    try:
        with Image.open(source) as image:
            labels = np.array(image.convert("L"))
    except OSError as e:
        raise InvalidInputError(f"Cannot read mask {source}: {e}") from e
    kwargs = {"transform": transform or Affine.identity(), "crs": crs}
    if num_classes == 5:
        return DamageMask(labels=labels, **kwargs)
    return ClassMask(labels=labels, num_classes=num_classes, **kwargs)


def mask_to_raster(mask: ClassMask) -> GeoRaster:
    """View a georeferenced mask as a one-channel raster (for tiling and GeoTIFF output)."""
    return GeoRaster(
        pixels=mask.labels[:, :, None],
        transform=mask.transform,
        crs=mask.crs or DEFAULT_CRS,
        channel_names=("class",),
    )


def raster_to_mask(raster: GeoRaster, num_classes: int = 5) -> ClassMask:
    labels = raster.pixels[:, :, 0].astype(np.uint8)
    if num_classes == 5:
        return DamageMask(labels=labels, transform=raster.transform, crs=raster.crs)
    return ClassMask(
        labels=labels, transform=raster.transform, crs=raster.crs, num_classes=num_classes
    )


def read_mask(path: str | Path, num_classes: int = 5) -> ClassMask:
    """Read a mask from a PNG or a single-band GeoTIFF, keeping georeferencing when present."""
    source = Path(path)
    if source.suffix.lower() in {".tif", ".tiff"}:
        return raster_to_mask(read_geotiff(source, channel_names=("class",)), num_classes)
    return read_mask_png(source, num_classes=num_classes)
