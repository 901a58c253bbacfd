"""Flood extent and flood lines from a segmentation mask."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
from affine import Affine
from pyproj import CRS, Transformer
from rasterio import features
from shapely import ops
from shapely.geometry import LineString, Polygon, mapping, shape

from floodsight.fileio import write_json
from floodsight.raster.georaster import ClassMask, GeoRaster

logger = logging.getLogger(__name__)

WGS84 = "EPSG:4326"


@dataclass(frozen=True, eq=False)
class FloodExtent:
    """Binary water raster plus its vectorized outline.

    ``lines`` holds one closed LineString per polygon ring (outer shores and
    the shores of dry islands), traced along pixel edges in map coordinates.
    """

    water: GeoRaster
    polygons: List[Polygon]
    lines: List[LineString]

    @property
    def water_pixel_count(self) -> int:
        return int(self.water.pixels.sum())


def extract_flood_extent(
    mask: ClassMask,
    water_class: int,
    transform: Optional[Affine] = None,
    crs: Optional[str] = None,
) -> FloodExtent:
    """Binarize ``mask`` on ``water_class`` and trace the water boundaries.

    Args:
        mask: Segmentation mask
        water_class: Label of the water class
        transform: Geotransform, defaults to the mask's own
        crs: CRS identifier, defaults to the mask's own (or WGS84)

    Returns:
        FloodExtent; an empty boundary set when no pixel is water
    """
    transform = transform or mask.transform
    crs = crs or mask.crs or WGS84
    water = (mask.labels == water_class).astype(np.uint8)

    polygons: List[Polygon] = []
    if water.any():
        for geometry, value in features.shapes(
            water, mask=water.astype(bool), connectivity=4, transform=transform
        ):
            if value == 1:
                polygons.append(shape(geometry))

    lines: List[LineString] = []
    for polygon in polygons:
        lines.append(LineString(polygon.exterior.coords))
        lines.extend(LineString(ring.coords) for ring in polygon.interiors)

    logger.info(
        "Flood extent: %d water pixels, %d polygons, %d boundary lines",
        int(water.sum()),
        len(polygons),
        len(lines),
    )
    raster = GeoRaster(
        pixels=water[:, :, None], transform=transform, crs=crs, channel_names=("water",)
    )
    return FloodExtent(water=raster, polygons=polygons, lines=lines)


def flood_lines_geojson(extent: FloodExtent) -> dict:
    """FeatureCollection of LineString features in WGS84 longitude/latitude."""
    source = CRS.from_user_input(extent.water.crs)
    project = None
    if source != CRS.from_user_input(WGS84):
        project = Transformer.from_crs(source, WGS84, always_xy=True).transform

    features_out = []
    for index, line in enumerate(extent.lines):
        geometry = ops.transform(project, line) if project else line
        features_out.append(
            {
                "type": "Feature",
                "geometry": mapping(geometry),
                "properties": {"id": index, "length_map_units": line.length},
            }
        )
    return {"type": "FeatureCollection", "features": features_out}


def write_flood_lines(path: str | Path, extent: FloodExtent) -> Path:
    return write_json(path, flood_lines_geojson(extent))
