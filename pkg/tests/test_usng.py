from __future__ import annotations

import numpy as np
import pytest
from pyproj import Transformer

from floodsight.errors import GridParseError, InvalidInputError, OutOfDomainError
from floodsight.grid import (
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

# (lat, lon) spread over the contiguous US, zones 10-19
CONUS_POINTS = [
    (38.8976763, -77.0365298),
    (29.7604, -95.3698),
    (47.6062, -122.3321),
    (34.0522, -118.2437),
    (41.8781, -87.6298),
    (25.7617, -80.1918),
    (39.7392, -104.9903),
    (44.9778, -93.2650),
    (33.4484, -112.0740),
    (42.3601, -71.0589),
]


def _random_conus(count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.uniform(25.0, 49.0, count), rng.uniform(-124.0, -67.0, count)])


def _inside(bbox, lat: float, lon: float, tol: float = 1e-9) -> bool:
    return bbox.min_x - tol <= lon <= bbox.max_x + tol and bbox.min_y - tol <= lat <= bbox.max_y + tol


def test_reference_point() -> None:
    assert format_usng(latlon_to_usng(38.8976763, -77.0365298, 5)) == "18SUJ2337106519"
    assert format_usng(latlon_to_usng(38.8976763, -77.0365298, 2), spaced=True) == "18S UJ 23 06"


@pytest.mark.parametrize(
    "precision, expected",
    [
        (0, "18SUJ"),
        (1, "18SUJ20"),
        (2, "18SUJ2306"),
        (3, "18SUJ233065"),
        (4, "18SUJ23370651"),
        (5, "18SUJ2337106519"),
    ],
)
def test_reference_point_truncates_at_every_precision(precision: int, expected: str) -> None:
    assert format_usng(latlon_to_usng(38.8976763, -77.0365298, precision)) == expected


def _quarter_in(cell: UsngCell) -> tuple[float, float]:
    # A quarter cell in from the south-west corner, where truncating and rounding grids agree
    bounds = usng_utm_bounds(cell)
    inverse = Transformer.from_crs(f"EPSG:{32600 + cell.zone}", "EPSG:4326", always_xy=True)
    lon, lat = inverse.transform(
        bounds.min_x + 0.25 * bounds.width, bounds.min_y + 0.25 * bounds.height
    )
    return lat, lon


@pytest.mark.parametrize("precision", range(6))
@pytest.mark.parametrize("lat, lon", CONUS_POINTS)
def test_matches_reference_geodesy(lat: float, lon: float, precision: int) -> None:
    mgrs = pytest.importorskip("mgrs")
    cell = latlon_to_usng(lat, lon, precision)
    q_lat, q_lon = _quarter_in(cell)

    expected = mgrs.MGRS().toMGRS(q_lat, q_lon, MGRSPrecision=precision)
    if isinstance(expected, bytes):
        expected = expected.decode()
    assert format_usng(latlon_to_usng(q_lat, q_lon, precision)) == expected
    assert format_usng(cell) == expected


@pytest.mark.parametrize("precision", range(6))
def test_cell_bbox_contains_point(precision: int) -> None:
    for lat, lon in _random_conus(1000, seed=precision):
        assert _inside(usng_to_bbox(latlon_to_usng(lat, lon, precision)), lat, lon)


@pytest.mark.parametrize("precision", range(6))
def test_cell_centre_maps_back_to_cell(precision: int) -> None:
    checked = 0
    for lat, lon in _random_conus(1000, seed=10 + precision):
        cell = latlon_to_usng(lat, lon, precision)
        c_lat, c_lon = usng_center(cell)
        # Squares cut by a zone or band edge can have their centre outside the cell's zone/band
        if utm_zone(c_lat, c_lon) != cell.zone or latitude_band(c_lat) != cell.band:
            continue
        assert latlon_to_usng(c_lat, c_lon, precision) == cell
        checked += 1
    assert checked >= 800


def test_nearby_points_share_a_kilometre_cell() -> None:
    cell = latlon_to_usng(29.7604, -95.3698, 2)
    lat, lon = usng_center(cell)
    assert latlon_to_usng(lat + 1.0 / 111_000, lon, 2) == cell


@pytest.mark.parametrize("precision", range(6))
def test_cell_size_in_grid_metres(precision: int) -> None:
    bounds = usng_utm_bounds(latlon_to_usng(29.7604, -95.3698, precision))
    assert bounds.width == pytest.approx(10.0 ** (5 - precision))
    assert bounds.height == pytest.approx(10.0 ** (5 - precision))


def test_parse_and_format_round_trip() -> None:
    for text in ["18SUJ2337106519", "15RTP", "15RTP9915", "10TET5036"]:
        assert format_usng(parse_usng(text)) == text
    assert parse_usng("18S UJ 23371 06519") == parse_usng("18suj2337106519")
    assert parse_usng("4QFJ1234") == UsngCell(4, "Q", "FJ", 12, 34, 2)
    assert str(parse_usng("4QFJ1234")) == "04QFJ1234"


@pytest.mark.parametrize(
    "text",
    ["not-a-cell", "18SUJ123", "18IUJ", "61SUJ", "18SAJ", "18SUW", "18SUJ123456789012", ""],
)
def test_parse_rejects_malformed(text: str) -> None:
    with pytest.raises(GridParseError):
        parse_usng(text)
    with pytest.raises(GridParseError):
        usng_to_bbox(text)


def test_domain_and_precision_errors() -> None:
    with pytest.raises(OutOfDomainError):
        latlon_to_usng(84.5, 10.0)
    with pytest.raises(OutOfDomainError):
        latlon_to_usng(-80.5, 10.0)
    with pytest.raises(InvalidInputError):
        latlon_to_usng(30.0, -95.0, precision=6)


def test_zone_exceptions() -> None:
    assert utm_zone(40.0, -95.3) == 15
    assert utm_zone(60.0, 5.0) == 32
    assert utm_zone(78.0, 10.0) == 33
    assert utm_zone(78.0, 8.0) == 31
    assert latitude_band(83.9) == "X"
    assert latitude_band(-79.9) == "C"
