"""US National Grid (MGRS lettering over UTM) cells.

A cell at precision ``p`` is a ``10**(5 - p)`` metre square of a UTM zone,
addressed as ``<zone><band><column><row><easting digits><northing digits>``,
e.g. ``18SUJ2337106519`` or, spaced, ``18S UJ 23371 06519``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from pyproj import Transformer

from floodsight.errors import GridParseError, InvalidInputError, OutOfDomainError
from floodsight.raster.georaster import BBox

MIN_LAT = -80.0
MAX_LAT = 84.0
BANDS = "CDEFGHJKLMNPQRSTUVWX"
COLUMN_SETS = ("STUVWXYZ", "ABCDEFGH", "JKLMNPQR")  # indexed by zone % 3
ROW_LETTERS = "ABCDEFGHJKLMNPQRSTUV"
ROW_CYCLE = 2_000_000.0
SQUARE = 100_000.0

# Lowest northing (metres, rounded down to 100 km) reached inside each band.
BAND_MIN_NORTHING = {
    "C": 1_100_000.0, "D": 2_000_000.0, "E": 2_800_000.0, "F": 3_700_000.0,
    "G": 4_600_000.0, "H": 5_500_000.0, "J": 6_400_000.0, "K": 7_300_000.0,
    "L": 8_200_000.0, "M": 9_100_000.0, "N": 0.0, "P": 800_000.0,
    "Q": 1_700_000.0, "R": 2_600_000.0, "S": 3_500_000.0, "T": 4_400_000.0,
    "U": 5_300_000.0, "V": 6_200_000.0, "W": 7_000_000.0, "X": 7_900_000.0,
}

_PATTERN = re.compile(
    r"^(?P<zone>\d{1,2})\s*(?P<band>[C-HJ-NP-X])\s*(?P<square>[A-HJ-NP-Z]{2})\s*(?P<digits>[\d\s]*)$"
)
_EDGE_SAMPLES = 16


@dataclass(frozen=True, order=True)
class UsngCell:
    zone: int
    band: str
    square: str
    easting: int = 0
    northing: int = 0
    precision: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.zone <= 60:
            raise GridParseError(f"Zone must be 1-60, got {self.zone}")
        if self.band not in BANDS:
            raise GridParseError(f"Invalid latitude band {self.band!r}")
        if not 0 <= self.precision <= 5:
            raise GridParseError(f"Precision must be 0-5, got {self.precision}")
        if len(self.square) != 2 or self.square[0] not in COLUMN_SETS[self.zone % 3]:
            raise GridParseError(f"Column letter {self.square[:1]!r} is not used in zone {self.zone}")
        if self.square[1] not in ROW_LETTERS:
            raise GridParseError(f"Invalid row letter {self.square[1:]!r}")
        limit = 10 ** self.precision
        if not (0 <= self.easting < limit and 0 <= self.northing < limit):
            raise GridParseError(
                f"Digits {self.easting}/{self.northing} exceed precision {self.precision}"
            )

    @property
    def size(self) -> float:
        """Cell edge in metres."""
        return 10.0 ** (5 - self.precision)

    def __str__(self) -> str:
        return format_usng(self)

    def utm_origin(self) -> Tuple[float, float]:
        """South-west corner ``(easting, northing)`` in UTM metres of this zone."""
        column = COLUMN_SETS[self.zone % 3].index(self.square[0])
        base_e = (column + 1) * SQUARE

        row = ROW_LETTERS.index(self.square[1])
        if self.zone % 2 == 0:
            row = (row - 5) % 20
        base_n = row * SQUARE
        floor_n = BAND_MIN_NORTHING[self.band]
        while base_n < floor_n:
            base_n += ROW_CYCLE
        return (base_e + self.easting * self.size, base_n + self.northing * self.size)


def format_usng(cell: UsngCell, spaced: bool = False) -> str:
    """Compact (``18SUJ2306``) or spaced (``18S UJ 23 06``) form."""
    head = f"{cell.zone:02d}{cell.band}"
    if cell.precision == 0:
        return f"{head} {cell.square}" if spaced else f"{head}{cell.square}"
    e = f"{cell.easting:0{cell.precision}d}"
    n = f"{cell.northing:0{cell.precision}d}"
    if spaced:
        return f"{head} {cell.square} {e} {n}"
    return f"{head}{cell.square}{e}{n}"


def parse_usng(text: str) -> UsngCell:
    """Parse compact or spaced USNG/MGRS strings.

    Raises:
        GridParseError: If ``text`` is not a valid cell reference
    """
    match = _PATTERN.match(str(text).strip().upper())
    if not match:
        raise GridParseError(f"Not a USNG cell: {text!r}")
    digits = re.sub(r"\s+", "", match["digits"])
    if len(digits) % 2 or len(digits) > 10:
        raise GridParseError(f"USNG {text!r} needs an even number of digits, at most 10")
    precision = len(digits) // 2
    return UsngCell(
        zone=int(match["zone"]),
        band=match["band"],
        square=match["square"],
        easting=int(digits[:precision]) if precision else 0,
        northing=int(digits[precision:]) if precision else 0,
        precision=precision,
    )


def utm_zone(lat: float, lon: float) -> int:
    """UTM zone number including the Norway and Svalbard exceptions."""
    lon = _wrap_lon(lon)
    zone = int(math.floor((lon + 180.0) / 6.0)) + 1
    if zone > 60:
        zone = 60
    if 56.0 <= lat < 64.0 and 3.0 <= lon < 12.0:
        return 32
    if 72.0 <= lat < 84.0 and lon >= 0.0:
        if lon < 9.0:
            return 31
        if lon < 21.0:
            return 33
        if lon < 33.0:
            return 35
        if lon < 42.0:
            return 37
    return zone


def latitude_band(lat: float) -> str:
    _check_lat(lat)
    return BANDS[min(int(math.floor((lat - MIN_LAT) / 8.0)), len(BANDS) - 1)]


def _check_lat(lat: float) -> None:
    if not MIN_LAT <= lat < MAX_LAT or math.isnan(lat):
        raise OutOfDomainError(f"Latitude {lat} outside the USNG domain [{MIN_LAT}, {MAX_LAT})")


def _wrap_lon(lon: float) -> float:
    return ((lon + 180.0) % 360.0) - 180.0


def _is_south(band: str) -> bool:
    return band < "N"


@lru_cache(maxsize=None)
def _transformers(zone: int, south: bool) -> Tuple[Transformer, Transformer]:
    epsg = (32700 if south else 32600) + zone
    forward = Transformer.from_crs("EPSG:4326", f"EPSG:{epsg}", always_xy=True)
    inverse = Transformer.from_crs(f"EPSG:{epsg}", "EPSG:4326", always_xy=True)
    return forward, inverse


def latlon_to_usng(lat: float, lon: float, precision: int = 5) -> UsngCell:
    """Cell of precision ``precision`` containing ``(lat, lon)``.

    Raises:
        OutOfDomainError: Latitude outside [-80, 84)
        InvalidInputError: Precision outside 0-5
    """
    if not 0 <= precision <= 5:
        raise InvalidInputError(f"precision must be 0-5, got {precision}")
    _check_lat(lat)
    lon = _wrap_lon(lon)
    zone = utm_zone(lat, lon)
    band = latitude_band(lat)
    forward, _ = _transformers(zone, _is_south(band))
    easting, northing = forward.transform(lon, lat)

    column_set = COLUMN_SETS[zone % 3]
    column = min(max(int(math.floor(easting / SQUARE)) - 1, 0), len(column_set) - 1)
    row = int(math.floor(northing / SQUARE)) % 20
    if zone % 2 == 0:
        row = (row + 5) % 20

    size = 10.0 ** (5 - precision)
    e_digits = int(math.floor((easting % SQUARE) / size)) if precision else 0
    n_digits = int(math.floor((northing % SQUARE) / size)) if precision else 0
    limit = 10 ** precision
    return UsngCell(
        zone=zone,
        band=band,
        square=column_set[column] + ROW_LETTERS[row],
        easting=min(e_digits, limit - 1),
        northing=min(n_digits, limit - 1),
        precision=precision,
    )


def _cell(cell: UsngCell | str) -> UsngCell:
    return parse_usng(cell) if isinstance(cell, str) else cell


def usng_to_bbox(cell: UsngCell | str) -> BBox:
    """Longitude/latitude bounding box of the cell's grid square.

    Edges are densified before unprojecting so the box covers the curved
    outline of the square.

    Raises:
        GridParseError: If ``cell`` is a malformed string
    """
    cell = _cell(cell)
    x0, y0 = cell.utm_origin()
    side = np.linspace(0.0, cell.size, _EDGE_SAMPLES + 1)
    zeros = np.zeros_like(side)
    xs = np.concatenate([x0 + side, x0 + cell.size + zeros, x0 + side, x0 + zeros])
    ys = np.concatenate([y0 + zeros, y0 + side, y0 + cell.size + zeros, y0 + side])
    _, inverse = _transformers(cell.zone, _is_south(cell.band))
    lons, lats = inverse.transform(xs, ys)
    return BBox(float(np.min(lons)), float(np.min(lats)), float(np.max(lons)), float(np.max(lats)))


def usng_center(cell: UsngCell | str) -> Tuple[float, float]:
    """``(lat, lon)`` of the centre of the cell's grid square."""
    cell = _cell(cell)
    x0, y0 = cell.utm_origin()
    _, inverse = _transformers(cell.zone, _is_south(cell.band))
    lon, lat = inverse.transform(x0 + cell.size / 2.0, y0 + cell.size / 2.0)
    return (float(lat), float(lon))


def usng_utm_bounds(cell: UsngCell | str) -> BBox:
    """The cell square in UTM metres (``width == height == cell.size``)."""
    cell = _cell(cell)
    x0, y0 = cell.utm_origin()
    return BBox(x0, y0, x0 + cell.size, y0 + cell.size)
