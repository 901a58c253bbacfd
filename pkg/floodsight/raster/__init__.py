"""Raster handling: georeferenced grids, tiling, HAND stacking, normalization, augmentation."""

from floodsight.raster.augment import (
    AugmentConfig,
    adjust_brightness_contrast,
    augment,
    rotate90,
    rotate_by,
)
from floodsight.raster.georaster import (
    DAMAGE_LEVELS,
    HAND_CHANNEL,
    RGB_CHANNELS,
    BBox,
    ClassMask,
    DamageMask,
    GeoRaster,
)
from floodsight.raster.hand import align_and_stack_hand
from floodsight.raster.io import (
    mask_to_raster,
    raster_to_mask,
    read_geotiff,
    read_hand_geotiff,
    read_mask,
    read_mask_png,
    read_rgb_geotiff,
    write_geotiff,
    write_mask_png,
)
from floodsight.raster.normalize import (
    ChannelStats,
    Moments,
    compute_channel_stats,
    denormalize,
    normalize,
)
from floodsight.raster.tiling import TileSet, reassemble, tile_raster

__all__ = [
    "AugmentConfig",
    "adjust_brightness_contrast",
    "augment",
    "rotate90",
    "rotate_by",
    "DAMAGE_LEVELS",
    "HAND_CHANNEL",
    "RGB_CHANNELS",
    "BBox",
    "ClassMask",
    "DamageMask",
    "GeoRaster",
    "align_and_stack_hand",
    "mask_to_raster",
    "raster_to_mask",
    "read_geotiff",
    "read_hand_geotiff",
    "read_rgb_geotiff",
    "read_mask",
    "read_mask_png",
    "write_geotiff",
    "write_mask_png",
    "ChannelStats",
    "Moments",
    "compute_channel_stats",
    "denormalize",
    "normalize",
    "TileSet",
    "reassemble",
    "tile_raster",
]
