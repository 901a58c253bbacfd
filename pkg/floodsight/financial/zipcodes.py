"""Polygon lookup of zip codes and counties by building centroid."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence

from shapely import STRtree
from shapely.geometry import Point, shape
from shapely.geometry.base import BaseGeometry

from floodsight.errors import InvalidInputError, UnassignedError
from floodsight.financial.buildings import BuildingRecord
from floodsight.fileio import read_json

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE_DEG = 1e-4  # about 11 m


class PolygonIndex:
    """Keyed polygons (zip codes, counties) in WGS84 longitude/latitude.

    A point on a shared edge belongs to the lexicographically smallest key;
    a point just outside every polygon goes to the nearest one within
    ``tolerance`` degrees.
    """

    def __init__(
        self,
        keys: Sequence[str],
        geometries: Sequence[BaseGeometry],
        tolerance: float = DEFAULT_TOLERANCE_DEG,
        name: str = "zip",
    ):
        if len(keys) != len(geometries):
            raise InvalidInputError(f"{len(keys)} keys for {len(geometries)} polygons")
        self.keys = [str(k) for k in keys]
        self.geometries = list(geometries)
        self.tolerance = tolerance
        self.name = name
        self._tree = STRtree(self.geometries)

    def __len__(self) -> int:
        return len(self.keys)

    def lookup(self, lat: float, lon: float) -> str:
        """Key of the polygon covering ``(lat, lon)``.

        Raises:
            UnassignedError: No polygon covers or lies within tolerance of the point
        """
        point = Point(lon, lat)
        hits = self._tree.query(point, predicate="intersects")
        if len(hits):
            return min(self.keys[i] for i in hits)
        near = self._tree.query_nearest(point, max_distance=self.tolerance, all_matches=True)
        if len(near):
            return min(self.keys[i] for i in near)
        raise UnassignedError(f"No {self.name} polygon near lat={lat:.6f} lon={lon:.6f}")

    @classmethod
    def from_geojson(
        cls, path: str | Path, key_property: str = "zip", tolerance: float = DEFAULT_TOLERANCE_DEG
    ) -> "PolygonIndex":
        """Load a FeatureCollection whose features carry ``key_property``.

        Raises:
            InvalidInputError: If a feature lacks the key or a geometry
        """
        payload = read_json(path)
        keys: List[str] = []
        geometries: List[BaseGeometry] = []
        for feature in payload.get("features", []):
            props = feature.get("properties") or {}
            if key_property not in props or not feature.get("geometry"):
                raise InvalidInputError(f"Feature in {path} lacks {key_property!r} or geometry")
            keys.append(str(props[key_property]))
            geometries.append(shape(feature["geometry"]))
        logger.info("Indexed %d %s polygons from %s", len(keys), key_property, path)
        return cls(keys, geometries, tolerance=tolerance, name=key_property)


def assign_zip(centroid: tuple[float, float], zip_index: PolygonIndex) -> str:
    """Zip code of a ``(lat, lon)`` centroid."""
    lat, lon = centroid
    return zip_index.lookup(lat, lon)


def assign_regions(
    buildings: Sequence[BuildingRecord],
    zip_index: PolygonIndex | None = None,
    county_index: PolygonIndex | None = None,
) -> List[BuildingRecord]:
    """Fill ``zip`` and ``county`` on each record; misses stay ``None`` with a warning."""
    out = []
    missed = {"zip": 0, "county": 0}
    for b in buildings:
        changes = {}
        for attr, index in (("zip", zip_index), ("county", county_index)):
            if index is None:
                continue
            try:
                changes[attr] = index.lookup(b.centroid_lat, b.centroid_lon)
            except UnassignedError:
                missed[attr] += 1
        out.append(b.with_updates(**changes) if changes else b)
    for attr, count in missed.items():
        if count:
            logger.warning("%d of %d buildings fall outside every %s polygon", count, len(out), attr)
    return out
