from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from affine import Affine
from pydantic import ValidationError
from shapely.geometry import Point, box

from floodsight.errors import InvalidInputError, UnassignedError, ZipLookupError
from floodsight.financial import (
    BuildingRecord,
    DamageFactors,
    PolygonIndex,
    ZhviTable,
    assess_buildings,
    assign_regions,
    assign_zip,
    estimate_cost,
    extract_buildings,
    gsd_feet,
    majority_level,
    pixel_cost_map,
    read_buildings_geojson,
    write_buildings_geojson,
)
from floodsight.raster import DamageMask

UTM = Affine(0.9144, 0, 270000.0, 0, -0.9144, 3300000.0)


def _building(area: float, level: int, zip_code: str = "77001", **extra) -> BuildingRecord:
    fields = {"id": 0, "pixel_count": 1, "centroid_lat": 29.8, "centroid_lon": -95.3, **extra}
    return BuildingRecord(footprint_area=area, damage_level=level, zip=zip_code, **fields)


def _oracle_cents(area: float, price: float, factor: float, stories: int = 2) -> int:
    exact = Fraction(str(area)) * stories * Fraction(str(price)) * Fraction(str(factor)) * 100
    return math.floor(exact + Fraction(1, 2))


def test_empty_mask_has_no_buildings() -> None:
    assert extract_buildings(DamageMask(labels=np.zeros((8, 8))), gsd=3.0) == []


def test_block_area_and_level() -> None:
    labels = np.zeros((20, 20), dtype=np.uint8)
    labels[5:15, 5:15] = 4
    (building,) = extract_buildings(DamageMask(labels=labels), gsd=3.0)
    assert building.pixel_count == 100
    assert building.footprint_area == 900.0
    assert building.damage_level == 4


def test_diagonal_blocks_merge_under_eight_connectivity() -> None:
    labels = np.zeros((10, 10), dtype=np.uint8)
    labels[0:3, 0:3] = 1
    labels[3:6, 3:6] = 2
    labels[8:10, 8:10] = 3
    buildings = extract_buildings(DamageMask(labels=labels), gsd=1.0)
    assert [b.pixel_count for b in buildings] == [18, 4]


def test_majority_ties_go_to_higher_damage() -> None:
    assert majority_level(np.array([1, 1, 3, 3, 2])) == 3
    assert majority_level(np.array([2, 2, 2, 4])) == 2
    rng = np.random.default_rng(0)
    levels = rng.integers(1, 5, 50)
    assert majority_level(levels) == majority_level(rng.permutation(levels))


def test_centroid_and_footprint_are_wgs84() -> None:
    labels = np.zeros((20, 20), dtype=np.uint8)
    labels[2:6, 2:8] = 2
    (building,) = extract_buildings(DamageMask(labels=labels, transform=UTM, crs="EPSG:32615"))
    assert building.footprint_area == pytest.approx(24 * 9.0)
    assert 29.0 < building.centroid_lat < 30.5
    assert -96.0 < building.centroid_lon < -95.0
    assert building.footprint.contains(Point(building.centroid_lon, building.centroid_lat))


def test_gsd_from_transform() -> None:
    assert gsd_feet(UTM, "EPSG:32615") == pytest.approx(3.0)
    with pytest.raises(InvalidInputError):
        gsd_feet(Affine(1e-5, 0, -95, 0, -1e-5, 30), "EPSG:4326")
    with pytest.raises(InvalidInputError):
        gsd_feet(Affine(1, 0, 0, 0, -2, 0), "EPSG:32615")


def test_reference_cost() -> None:
    table = ZhviTable({"77001": 150.0})
    cost = estimate_cost(_building(1000.0, 4), table, DamageFactors())
    assert cost == 300_000 * 100


def test_level_zero_and_zero_factor_cost_nothing() -> None:
    table = ZhviTable({"77001": 150.0})
    assert estimate_cost(_building(500.0, 0, zip_code=None), table, DamageFactors()) == 0
    assert estimate_cost(_building(500.0, 1), table, DamageFactors()) == 0


def test_costs_match_exact_rational_arithmetic() -> None:
    rng = np.random.default_rng(42)
    factors = DamageFactors(factors={1: 0.1, 2: 0.35, 3: 0.65, 4: 1.0})
    for _ in range(1000):
        area = float(rng.uniform(100, 5000))
        price = float(np.round(rng.uniform(50, 400), 2))
        level = int(rng.integers(1, 5))
        table = ZhviTable({"77001": price})
        expected = _oracle_cents(area, price, factors.factor(level))
        assert estimate_cost(_building(area, level), table, factors) == expected


def test_cost_is_linear_in_price() -> None:
    building = _building(1234.0, 3)
    single = estimate_cost(building, ZhviTable({"77001": 120.0}), DamageFactors())
    double = estimate_cost(building, ZhviTable({"77001": 240.0}), DamageFactors())
    assert double == 2 * single


def test_unknown_zip_uses_fallback_or_raises() -> None:
    building = _building(100.0, 4, zip_code="99999")
    with pytest.raises(ZipLookupError):
        estimate_cost(building, ZhviTable({"77001": 150.0}), DamageFactors())
    with_fallback = ZhviTable({"77001": 150.0}, fallback_price=100.0)
    assert estimate_cost(building, with_fallback, DamageFactors()) == 100 * 2 * 100 * 100


def test_zhvi_csv_round_trip(tmp_path: Path) -> None:
    source = tmp_path / "zhvi.csv"
    source.write_text("zip,price_per_sqft_usd\n2134,210.5\n77001,99\n", encoding="utf-8")
    table = ZhviTable.from_csv(source)
    assert table.price_for("02134") == 210.5
    assert ZhviTable.from_csv(table.to_csv(tmp_path / "out.csv")).prices == table.prices

    (tmp_path / "bad.csv").write_text("zip,price\n77001,1\n", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        ZhviTable.from_csv(tmp_path / "bad.csv")
    with pytest.raises(InvalidInputError):
        ZhviTable({"7700": 10.0})


def test_damage_factors_validation() -> None:
    assert DamageFactors().factor(0) == 0.0
    with pytest.raises(ValidationError):
        DamageFactors(factors={1: 0.5, 2: 0.2, 3: 0.6, 4: 1.0})
    with pytest.raises(ValidationError):
        DamageFactors(factors={1: 0.0, 2: 0.2, 3: 0.6, 4: 1.2})
    with pytest.raises(ValidationError):
        DamageFactors(factors={1: 0.0, 2: 0.2, 3: 0.6})


def _two_zips() -> PolygonIndex:
    return PolygonIndex(["77002", "77001"], [box(-95.5, 29.5, -95.4, 29.6), box(-95.4, 29.5, -95.3, 29.6)])


def test_assign_zip_inside_polygon() -> None:
    index = _two_zips()
    assert assign_zip((29.55, -95.45), index) == "77002"
    assert assign_zip((29.55, -95.35), index) == "77001"


def test_assign_zip_on_shared_edge_picks_smallest() -> None:
    assert assign_zip((29.55, -95.4), _two_zips()) == "77001"


def test_assign_zip_near_and_far() -> None:
    index = _two_zips()
    assert assign_zip((29.55, -95.29995), index) == "77001"
    with pytest.raises(UnassignedError):
        assign_zip((25.0, -90.0), index)


def test_assign_regions_leaves_misses_unset() -> None:
    inside = _building(10.0, 2, zip_code=None, centroid_lat=29.55, centroid_lon=-95.35)
    outside = inside.with_updates(centroid_lat=10.0, id=1)
    counties = PolygonIndex(["County 1"], [box(-96, 29, -95, 30)], name="county")
    first, second = assign_regions([inside, outside], _two_zips(), counties)
    assert (first.zip, first.county) == ("77001", "County 1")
    assert (second.zip, second.county) == (None, None)


def test_polygon_index_from_geojson(tmp_path: Path) -> None:
    path = tmp_path / "zips.geojson"
    path.write_text(
        json.dumps(
            {
                "type": "FeatureCollection",
                "features": [
                    {
                        "type": "Feature",
                        "properties": {"zip": "77003"},
                        "geometry": {"type": "Polygon", "coordinates": [box(0, 0, 1, 1).exterior.coords[:]]},
                    }
                ],
            }
        )
    )
    assert PolygonIndex.from_geojson(path).lookup(0.5, 0.5) == "77003"
    with pytest.raises(InvalidInputError):
        PolygonIndex.from_geojson(path, key_property="county")


def test_assessed_buildings_round_trip_and_cost_map(tmp_path: Path) -> None:
    labels = np.zeros((20, 20), dtype=np.uint8)
    labels[2:6, 2:8] = 3
    labels[10:14, 10:12] = 4
    mask = DamageMask(labels=labels, transform=UTM, crs="EPSG:32615")
    buildings = [b.with_updates(zip="77001") for b in extract_buildings(mask)]
    assessed = assess_buildings(buildings, ZhviTable({"77001": 150.0}), DamageFactors())

    path = write_buildings_geojson(tmp_path / "buildings.geojson", assessed)
    restored = read_buildings_geojson(path)
    assert [b.cost_cents for b in restored] == [b.cost_cents for b in assessed]
    assert [b.damage_level for b in restored] == [3, 4]
    assert restored[0].footprint.equals_exact(assessed[0].footprint, 1e-9)

    cost_map = pixel_cost_map(mask, assessed)
    assert cost_map.channel_names == ("COST_USD",)
    assert cost_map.pixels.sum() == pytest.approx(sum(b.cost_cents for b in assessed) / 100.0)


def test_read_buildings_rejects_malformed(tmp_path: Path) -> None:
    path = tmp_path / "broken.geojson"
    path.write_text(json.dumps({"type": "FeatureCollection", "features": [{"properties": {"id": 1}}]}))
    with pytest.raises(InvalidInputError):
        read_buildings_geojson(path)
