from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from shapely.geometry import box, shape

from floodsight.errors import InvalidInputError
from floodsight.financial import BuildingRecord, PolygonIndex
from floodsight.grid import (
    CSV_COLUMNS,
    UNASSIGNED,
    aggregate,
    export_summary,
    latlon_to_usng,
    merge_summaries,
    usng_center,
    usng_to_bbox,
)

SITES = [(29.7604, -95.3698), (29.95, -95.1), (30.2672, -97.7431), (32.7767, -96.797)]


def _scattered(count: int = 100, seed: int = 0) -> tuple[list[BuildingRecord], list[str]]:
    """Buildings within ~90 m of four 1 km cell centres, with the cell each was placed in."""
    rng = np.random.default_rng(seed)
    centres = [usng_center(latlon_to_usng(lat, lon, 2)) for lat, lon in SITES]
    cells = [str(latlon_to_usng(lat, lon, 2)) for lat, lon in centres]
    buildings, placed = [], []
    for i in range(count):
        site = int(rng.integers(0, 4))
        lat, lon = centres[site]
        buildings.append(
            BuildingRecord(
                id=i,
                pixel_count=10,
                footprint_area=90.0,
                centroid_lat=lat + float(rng.uniform(-8e-4, 8e-4)),
                centroid_lon=lon + float(rng.uniform(-8e-4, 8e-4)),
                damage_level=int(rng.integers(1, 5)),
                zip=f"7700{site}",
                cost_cents=int(rng.integers(0, 10_000_000)),
            )
        )
        placed.append(cells[site])
    return buildings, placed


def test_empty_input_gives_empty_summary(tmp_path: Path) -> None:
    summary = aggregate([])
    assert summary.buckets == {}
    assert summary.grand_total_cents == 0

    payload = json.loads(export_summary(summary, tmp_path / "s.geojson").read_text())
    assert payload == {"type": "FeatureCollection", "features": []}
    frame = pd.read_csv(export_summary(summary, tmp_path / "s.csv", fmt="csv"))
    assert list(frame.columns) == CSV_COLUMNS
    assert frame.empty


def test_totals_match_brute_force_grouping() -> None:
    buildings, placed = _scattered()
    expected_cost = defaultdict(int)
    expected_counts = defaultdict(lambda: [0, 0, 0, 0])
    for b, cell in zip(buildings, placed):
        expected_cost[cell] += b.cost_cents
        expected_counts[cell][b.damage_level - 1] += 1

    summary = aggregate(buildings, level="usng", precision=2)
    assert set(summary.buckets) == set(expected_cost)
    for cell, totals in summary.buckets.items():
        assert totals.total_cost_cents == expected_cost[cell]
        assert list(totals.counts) == expected_counts[cell]
    assert summary.grand_total_cents == sum(b.cost_cents for b in buildings)
    assert summary.building_total == len(buildings)


def test_single_cell_holds_everything() -> None:
    buildings, _ = _scattered()
    one_site = [b.with_updates(centroid_lat=29.7604, centroid_lon=-95.3698) for b in buildings]
    summary = aggregate(one_site, precision=1)
    (totals,) = summary.buckets.values()
    assert totals.total_cost_cents == sum(b.cost_cents for b in buildings)


def test_partition_and_permutation_invariance() -> None:
    buildings, _ = _scattered(seed=4)
    for precision in range(6):
        summary = aggregate(buildings, precision=precision)
        shuffled = aggregate(list(reversed(buildings)), precision=precision)
        assert summary.buckets == shuffled.buckets
        assert summary.building_total == len(buildings)
        assert summary.grand_total_cents == sum(b.cost_cents for b in buildings)


def test_partial_summaries_merge_exactly() -> None:
    buildings, _ = _scattered(seed=7)
    whole = aggregate(buildings)
    merged = merge_summaries(aggregate(buildings[:30]), aggregate(buildings[30:]))
    assert merged.buckets == whole.buckets
    with pytest.raises(InvalidInputError):
        merge_summaries(aggregate(buildings, precision=1), whole)


def test_missing_keys_go_to_unassigned() -> None:
    buildings, _ = _scattered(count=10)
    buildings[0] = buildings[0].with_updates(zip=None)
    buildings[1] = buildings[1].with_updates(centroid_lat=85.0)

    by_zip = aggregate(buildings, level="zip")
    assert by_zip.unassigned.building_total == 1
    assert by_zip.precision is None

    by_cell = aggregate(buildings, level="usng")
    assert by_cell.unassigned.building_total == 1
    assert by_cell.grand_total_cents == sum(b.cost_cents for b in buildings)

    with pytest.raises(InvalidInputError):
        aggregate(buildings, level="state")


def test_csv_and_geojson_carry_identical_totals(tmp_path: Path) -> None:
    buildings, _ = _scattered(seed=2)
    summary = aggregate(buildings)
    frame = pd.read_csv(export_summary(summary, tmp_path / "cells.csv", fmt="csv"), dtype={"cell": str})
    payload = json.loads(export_summary(summary, tmp_path / "cells.geojson").read_text())

    assert list(frame["cell"]) == sorted(summary.buckets)
    from_geojson = {f["properties"]["cell"]: f["properties"] for f in payload["features"]}
    for row in frame.to_dict(orient="records"):
        props = from_geojson[row["cell"]]
        for column in CSV_COLUMNS[1:]:
            assert props[column] == row[column]


def test_cell_geometry_equals_bbox(tmp_path: Path) -> None:
    cell = str(latlon_to_usng(29.7604, -95.3698, 2))
    building = BuildingRecord(0, 1, 9.0, *usng_center(cell), damage_level=3, cost_cents=500)
    payload = json.loads(export_summary(aggregate([building]), tmp_path / "one.geojson").read_text())

    (feature,) = payload["features"]
    assert feature["properties"]["cell"] == cell
    assert feature["geometry"]["coordinates"] == [usng_to_bbox(cell).ring()]


def test_region_geometry_for_zip_level(tmp_path: Path) -> None:
    buildings, _ = _scattered(count=5)
    buildings[0] = buildings[0].with_updates(zip=None)
    zips = sorted({b.zip for b in buildings if b.zip})
    regions = PolygonIndex(zips, [box(i, 0, i + 1, 1) for i, _ in enumerate(zips)])

    payload = json.loads(
        export_summary(aggregate(buildings, level="zip"), tmp_path / "zips.geojson", regions=regions).read_text()
    )
    by_key = {f["properties"]["cell"]: f for f in payload["features"]}
    assert by_key[UNASSIGNED]["geometry"] is None
    assert shape(by_key[zips[0]]["geometry"]).equals(box(0, 0, 1, 1))


def test_unknown_export_format(tmp_path: Path) -> None:
    with pytest.raises(InvalidInputError):
        export_summary(aggregate([]), tmp_path / "x.txt", fmt="xml")
