"""USNG geodesy and damage aggregation."""

from floodsight.grid.aggregate import (
    UNASSIGNED,
    BucketTotals,
    GridSummary,
    aggregate,
    merge_summaries,
)
from floodsight.grid.export import CSV_COLUMNS, export_summary, summary_frame, summary_geojson
from floodsight.grid.usng import (
    UsngCell,
    format_usng,
    latitude_band,
    latlon_to_usng,
    parse_usng,
    usng_center,
    usng_to_bbox,
    usng_utm_bounds,
    utm_zone,
)

__all__ = [
    "UNASSIGNED",
    "BucketTotals",
    "GridSummary",
    "aggregate",
    "merge_summaries",
    "CSV_COLUMNS",
    "export_summary",
    "summary_frame",
    "summary_geojson",
    "UsngCell",
    "format_usng",
    "latitude_band",
    "latlon_to_usng",
    "parse_usng",
    "usng_center",
    "usng_to_bbox",
    "usng_utm_bounds",
    "utm_zone",
]
