"""Damage mask to dollars: footprints, prices, damage factors and region lookup."""

from floodsight.financial.buildings import (
    BuildingRecord,
    buildings_geojson,
    extract_buildings,
    gsd_feet,
    majority_level,
    read_buildings_geojson,
    write_buildings_geojson,
)
from floodsight.financial.cost import (
    DEFAULT_STORIES,
    DamageFactors,
    ZhviTable,
    assess_buildings,
    cost_cents,
    estimate_cost,
    pixel_cost_map,
)
from floodsight.financial.zipcodes import PolygonIndex, assign_regions, assign_zip

__all__ = [
    "BuildingRecord",
    "buildings_geojson",
    "extract_buildings",
    "gsd_feet",
    "majority_level",
    "read_buildings_geojson",
    "write_buildings_geojson",
    "DEFAULT_STORIES",
    "DamageFactors",
    "ZhviTable",
    "assess_buildings",
    "cost_cents",
    "estimate_cost",
    "pixel_cost_map",
    "PolygonIndex",
    "assign_regions",
    "assign_zip",
]
