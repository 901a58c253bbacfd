"""Bring a HAND terrain layer onto an imagery grid and stack it as a fourth channel."""

from __future__ import annotations

import logging
from typing import Literal

import numpy as np
from pyproj import Transformer
from rasterio.crs import CRS
from rasterio.errors import CRSError
from rasterio.warp import Resampling, reproject

from floodsight.errors import AlignmentError, InvalidInputError
from floodsight.raster.georaster import HAND_CHANNEL, RGB_CHANNELS, BBox, GeoRaster

logger = logging.getLogger(__name__)

ResamplingName = Literal["nearest", "bilinear"]

_RESAMPLING = {
    "nearest": Resampling.nearest,
    "bilinear": Resampling.bilinear,
}


def _parse_crs(raster: GeoRaster, role: str) -> CRS:
    try:
        return CRS.from_user_input(raster.crs)
    except CRSError as e:
        raise InvalidInputError(f"{role} raster has an invalid CRS {raster.crs!r}: {e}") from e


def _extent_in(raster: GeoRaster, src: CRS, dst: CRS) -> BBox:
    extent = raster.extent
    if src == dst:
        return extent
    transformer = Transformer.from_crs(src, dst, always_xy=True)
    xs, ys = transformer.transform(
        [extent.min_x, extent.max_x, extent.min_x, extent.max_x],
        [extent.min_y, extent.min_y, extent.max_y, extent.max_y],
    )
    return BBox(min(xs), min(ys), max(xs), max(ys))


def align_and_stack_hand(
    rgb: GeoRaster,
    hand: GeoRaster,
    resampling: ResamplingName = "bilinear",
) -> GeoRaster:
    """Resample ``hand`` onto the pixel grid of ``rgb`` and append it as channel 4.

    Pixels of the RGB grid that the HAND layer does not cover are filled with
    the highest HAND value seen, i.e. treated as high ground.

    Args:
        rgb: Three-channel imagery raster
        hand: Single-channel HAND raster
        resampling: "bilinear" (default) or "nearest"

    Returns:
        Four-channel raster ``[R, G, B, HAND]`` on the RGB geotransform

    Raises:
        InvalidInputError: Wrong channel counts, unknown resampling or missing CRS
        AlignmentError: If the two rasters do not overlap
    """
    if rgb.count != 3:
        raise InvalidInputError(f"Expected a 3-channel RGB raster, got {rgb.count} channels")
    if hand.count != 1:
        raise InvalidInputError(f"Expected a 1-channel HAND raster, got {hand.count} channels")
    if resampling not in _RESAMPLING:
        raise InvalidInputError(f"Unknown resampling {resampling!r}; use nearest or bilinear")

    rgb_crs = _parse_crs(rgb, "RGB")
    hand_crs = _parse_crs(hand, "HAND")

    if not rgb.extent.intersects(_extent_in(hand, hand_crs, rgb_crs)):
        raise AlignmentError(
            f"HAND extent {hand.extent} does not overlap imagery extent {rgb.extent}"
        )

    source = hand.pixels[:, :, 0].astype(np.float64)
    if hand_crs == rgb_crs and hand.same_grid(rgb):
        aligned = source.copy()
    else:
        aligned = np.full((rgb.height, rgb.width), np.nan, dtype=np.float64)
        reproject(
            source=source,
            destination=aligned,
            src_transform=hand.transform,
            src_crs=hand_crs,
            dst_transform=rgb.transform,
            dst_crs=rgb_crs,
            src_nodata=np.nan,
            dst_nodata=np.nan,
            resampling=_RESAMPLING[resampling],
        )

    missing = np.isnan(aligned)
    if missing.any():
        fill = float(np.nanmax(source))
        logger.warning(
            "HAND covers %.1f%% of the imagery grid; filling %d pixels with %.3f",
            100.0 * (1.0 - missing.mean()),
            int(missing.sum()),
            fill,
        )
        aligned[missing] = fill

    pixels = np.concatenate(
        [rgb.pixels.astype(np.float64), aligned[:, :, None]], axis=2
    )
    return GeoRaster(
        pixels=pixels,
        transform=rgb.transform,
        crs=rgb.crs,
        channel_names=RGB_CHANNELS + (HAND_CHANNEL,),
    )
