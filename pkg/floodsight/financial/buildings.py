"""Building footprints from damage masks, and their GeoJSON form."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from affine import Affine
from pyproj import CRS, Transformer
from rasterio import features
from scipy import ndimage
from shapely import ops
from shapely.geometry import Point, mapping, shape
from shapely.geometry.base import BaseGeometry

from floodsight.errors import InvalidInputError
from floodsight.fileio import read_json, write_json
from floodsight.raster.georaster import DAMAGE_LEVELS, ClassMask, pixel_to_geo

logger = logging.getLogger(__name__)

WGS84 = "EPSG:4326"
FEET_PER_METRE = 3.280839895013123
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class BuildingRecord:
    """One connected footprint with its damage level and, once assessed, its cost.

    ``rows``/``cols`` hold the footprint pixels when the record comes from a
    mask; records read back from GeoJSON carry only ``pixel_count``.
    """

    id: int
    pixel_count: int
    footprint_area: float  # ft²
    centroid_lat: float
    centroid_lon: float
    damage_level: int
    rows: Optional[np.ndarray] = None
    cols: Optional[np.ndarray] = None
    footprint: Optional[BaseGeometry] = None  # WGS84
    zip: Optional[str] = None
    county: Optional[str] = None
    cost_cents: Optional[int] = None

    @property
    def centroid(self) -> Tuple[float, float]:
        return (self.centroid_lat, self.centroid_lon)

    @property
    def damage_name(self) -> str:
        return DAMAGE_LEVELS[self.damage_level]

    def with_updates(self, **changes) -> "BuildingRecord":
        return replace(self, **changes)


def majority_level(levels: np.ndarray) -> int:
    """Most frequent damage level among 1-4; ties go to the higher level."""
    counts = np.bincount(np.asarray(levels, dtype=np.int64), minlength=len(DAMAGE_LEVELS))[1:]
    if counts.sum() == 0:
        return 0
    best = counts.max()
    return int(np.flatnonzero(counts == best).max()) + 1


def gsd_feet(transform: Affine, crs: Optional[str]) -> float:
    """Ground sample distance in feet from a square-pixel geotransform.

    Raises:
        InvalidInputError: For non-square pixels or geographic (degree) CRSs
    """
    size_x, size_y = abs(transform.a), abs(transform.e)
    if not np.isclose(size_x, size_y):
        raise InvalidInputError(f"Non-square pixels {size_x} x {size_y}; pass gsd explicitly")
    if crs is None:
        raise InvalidInputError("Cannot infer ground sample distance without a CRS")
    parsed = CRS.from_user_input(crs)
    if parsed.is_geographic:
        raise InvalidInputError(f"CRS {crs} has angular units; pass gsd explicitly")
    unit = parsed.axis_info[0].unit_conversion_factor  # metres per unit
    return size_x * unit * FEET_PER_METRE


def _to_wgs84(crs: Optional[str]):
    if crs is None:
        return None
    source = CRS.from_user_input(crs)
    if source == CRS.from_user_input(WGS84):
        return None
    return Transformer.from_crs(source, WGS84, always_xy=True).transform


def extract_buildings(
    mask: ClassMask,
    transform: Optional[Affine] = None,
    gsd: Optional[float] = None,
    crs: Optional[str] = None,
) -> List[BuildingRecord]:
    """Connected components (8-connectivity) of pixels with class >= 1.

    Args:
        mask: Damage mask
        transform: Geotransform, defaults to the mask's own
        gsd: Feet per pixel; derived from the transform and CRS when omitted
        crs: CRS of the transform, defaults to the mask's own

    Returns:
        Building records ordered by component label (cost unset)

    Raises:
        InvalidInputError: If ``gsd`` is not positive
    """
    transform = transform or mask.transform
    crs = crs or mask.crs
    if gsd is None:
        gsd = gsd_feet(transform, crs)
    if gsd <= 0:
        raise InvalidInputError(f"gsd must be positive, got {gsd}")

    built = mask.labels >= 1
    components, count = ndimage.label(built, structure=EIGHT_CONNECTED)
    if count == 0:
        return []

    project = _to_wgs84(crs)
    records: List[BuildingRecord] = []
    for label, region in enumerate(ndimage.find_objects(components), start=1):
        window = components[region] == label
        rows, cols = np.nonzero(window)
        rows = rows + region[0].start
        cols = cols + region[1].start

        x, y = pixel_to_geo(transform, rows.mean() + 0.5, cols.mean() + 0.5)
        lon, lat = project(x, y) if project else (x, y)

        window_transform = transform * Affine.translation(region[1].start, region[0].start)
        parts = [
            shape(geom)
            for geom, value in features.shapes(
                window.astype(np.uint8), mask=window, connectivity=8, transform=window_transform
            )
            if value == 1
        ]
        footprint = ops.unary_union(parts)
        if project:
            footprint = ops.transform(project, footprint)

        records.append(
            BuildingRecord(
                id=len(records),
                pixel_count=int(rows.size),
                footprint_area=float(rows.size) * gsd * gsd,
                centroid_lat=float(lat),
                centroid_lon=float(lon),
                damage_level=majority_level(mask.labels[rows, cols]),
                rows=rows,
                cols=cols,
                footprint=footprint,
            )
        )

    logger.info("Extracted %d buildings at %.3f ft/pixel", len(records), gsd)
    return records


def buildings_geojson(buildings: List[BuildingRecord]) -> dict:
    """FeatureCollection with footprint (or centroid) geometry and cost properties."""
    out = []
    for b in buildings:
        geometry = b.footprint if b.footprint is not None else Point(b.centroid_lon, b.centroid_lat)
        out.append(
            {
                "type": "Feature",
                "geometry": mapping(geometry),
                "properties": {
                    "id": b.id,
                    "pixel_count": b.pixel_count,
                    "footprint_area_sqft": b.footprint_area,
                    "centroid_lat": b.centroid_lat,
                    "centroid_lon": b.centroid_lon,
                    "damage_level": b.damage_level,
                    "damage_name": b.damage_name,
                    "zip": b.zip,
                    "county": b.county,
                    "cost_usd_cents": b.cost_cents,
                },
            }
        )
    return {"type": "FeatureCollection", "features": out}


def write_buildings_geojson(path: str | Path, buildings: List[BuildingRecord]) -> Path:
    return write_json(path, buildings_geojson(buildings))


def read_buildings_geojson(path: str | Path) -> List[BuildingRecord]:
    """Load records written by ``write_buildings_geojson`` (pixel sets are not restored).

    Raises:
        InvalidInputError: If a feature lacks the required properties
    """
    payload = read_json(path)
    if payload.get("type") != "FeatureCollection":
        raise InvalidInputError(f"{path} is not a GeoJSON FeatureCollection")
    records = []
    for feature in payload.get("features", []):
        props = feature.get("properties") or {}
        try:
            records.append(
                BuildingRecord(
                    id=int(props["id"]),
                    pixel_count=int(props["pixel_count"]),
                    footprint_area=float(props["footprint_area_sqft"]),
                    centroid_lat=float(props["centroid_lat"]),
                    centroid_lon=float(props["centroid_lon"]),
                    damage_level=int(props["damage_level"]),
                    footprint=shape(feature["geometry"]) if feature.get("geometry") else None,
                    zip=props.get("zip"),
                    county=props.get("county"),
                    cost_cents=None if props.get("cost_usd_cents") is None else int(props["cost_usd_cents"]),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"Malformed building feature in {path}: {e}") from e
    return records
