"""GeoJSON and CSV renderings of a GridSummary."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal, Optional

import pandas as pd
from shapely.geometry import mapping

from floodsight.errors import InvalidInputError
from floodsight.fileio import atomic_path, write_json
from floodsight.financial.zipcodes import PolygonIndex
from floodsight.grid.aggregate import UNASSIGNED, GridSummary
from floodsight.grid.usng import usng_to_bbox

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "cell",
    "total_cost_usd_cents",
    "count_no_damage",
    "count_minor",
    "count_major",
    "count_destroyed",
]


def summary_frame(summary: GridSummary) -> pd.DataFrame:
    rows = [
        [key, totals.total_cost_cents, *totals.counts] for key, totals in summary.sorted_items()
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS).astype({c: "int64" for c in CSV_COLUMNS[1:]})


def summary_geojson(summary: GridSummary, regions: Optional[PolygonIndex] = None) -> dict:
    """FeatureCollection with one feature per bucket, ordered by key.

    USNG buckets get their cell box as geometry; zip and county buckets take
    the polygon from ``regions`` when given. Unassigned buckets have no geometry.
    """
    region_shapes = dict(zip(regions.keys, regions.geometries)) if regions else {}
    features = []
    for key, totals in summary.sorted_items():
        geometry = None
        if key != UNASSIGNED:
            if summary.level == "usng":
                geometry = {"type": "Polygon", "coordinates": [usng_to_bbox(key).ring()]}
            elif key in region_shapes:
                geometry = mapping(region_shapes[key])
        properties = {
            "cell": key,
            "level": summary.level,
            "total_cost_usd_cents": totals.total_cost_cents,
            "building_total": totals.building_total,
        }
        properties.update(zip(CSV_COLUMNS[2:], totals.counts))
        features.append({"type": "Feature", "geometry": geometry, "properties": properties})
    return {"type": "FeatureCollection", "features": features}


def export_summary(
    summary: GridSummary,
    path: str | Path,
    fmt: Literal["geojson", "csv"] = "geojson",
    regions: Optional[PolygonIndex] = None,
) -> Path:
    """Write ``summary`` as GeoJSON or CSV.

    Raises:
        InvalidInputError: Unknown format
        OSError: Write failure, with the target path in the message
    """
    target = Path(path)
    if fmt == "geojson":
        write_json(target, summary_geojson(summary, regions))
    elif fmt == "csv":
        try:
            with atomic_path(target) as tmp:
                summary_frame(summary).to_csv(tmp, index=False)
        except OSError as e:
            raise OSError(f"Failed to write {target}: {e}") from e
    else:
        raise InvalidInputError(f"Unknown summary format {fmt!r}")
    logger.info("Wrote %d-bucket %s summary to %s", len(summary.buckets), fmt, target)
    return target
