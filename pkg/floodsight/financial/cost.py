"""Price table, damage factors and per-building cost in integer cents.

cost = footprint_area * stories * price_per_sqft(zip) * factor(damage_level)
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator

from floodsight.errors import InvalidInputError, ZipLookupError
from floodsight.financial.buildings import BuildingRecord
from floodsight.fileio import atomic_path
from floodsight.raster.georaster import ClassMask, GeoRaster

logger = logging.getLogger(__name__)

ZIP_PATTERN = re.compile(r"^\d{5}$")
ZHVI_COLUMNS = ("zip", "price_per_sqft_usd")
DEFAULT_STORIES = 2


@dataclass(frozen=True)
class ZhviTable:
    """Price per square foot keyed by 5-digit zip code."""

    prices: Mapping[str, float]
    vintage: str = "ZHVI-2018"
    fallback_price: Optional[float] = None

    def __post_init__(self) -> None:
        for zip_code, price in self.prices.items():
            if not ZIP_PATTERN.match(str(zip_code)):
                raise InvalidInputError(f"Invalid zip code {zip_code!r}")
            if not price > 0:
                raise InvalidInputError(f"Price for {zip_code} must be positive, got {price}")
        if self.fallback_price is not None and not self.fallback_price > 0:
            raise InvalidInputError(f"fallback_price must be positive, got {self.fallback_price}")

    def __contains__(self, zip_code: str) -> bool:
        return zip_code in self.prices

    def __len__(self) -> int:
        return len(self.prices)

    def price_for(self, zip_code: Optional[str]) -> float:
        """Price per ft² for ``zip_code``, or the fallback.

        Raises:
            ZipLookupError: Unknown zip and no fallback
        """
        if zip_code is not None and zip_code in self.prices:
            return float(self.prices[zip_code])
        if self.fallback_price is not None:
            logger.debug("Zip %s not in %s, using fallback %.2f", zip_code, self.vintage, self.fallback_price)
            return float(self.fallback_price)
        raise ZipLookupError(f"No {self.vintage} price for zip {zip_code!r}")

    @classmethod
    def from_csv(
        cls, path: str | Path, vintage: str = "ZHVI-2018", fallback_price: Optional[float] = None
    ) -> "ZhviTable":
        """Read a CSV with header ``zip,price_per_sqft_usd``.

        Raises:
            InvalidInputError: Missing columns, duplicate zips or unreadable file
        """
        source = Path(path)
        try:
            frame = pd.read_csv(source, dtype={"zip": str})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise InvalidInputError(f"Cannot read price table {source}: {e}") from e
        missing = [c for c in ZHVI_COLUMNS if c not in frame.columns]
        if missing:
            raise InvalidInputError(f"{source} lacks columns {missing}")
        frame["zip"] = frame["zip"].str.strip().str.zfill(5)
        if frame["zip"].duplicated().any():
            raise InvalidInputError(f"{source} lists a zip code more than once")
        prices = dict(zip(frame["zip"], frame["price_per_sqft_usd"].astype(float)))
        logger.info("Loaded %d zip prices from %s", len(prices), source)
        return cls(prices=prices, vintage=vintage, fallback_price=fallback_price)

    def to_csv(self, path: str | Path) -> Path:
        target = Path(path)
        frame = pd.DataFrame(
            sorted(self.prices.items()), columns=list(ZHVI_COLUMNS)
        )
        with atomic_path(target) as tmp:
            frame.to_csv(tmp, index=False)
        return target


class DamageFactors(BaseModel):
    """Fraction of replacement value lost per damage level.

    The defaults are placeholders, not calibrated against observed losses.
    """

    factors: Dict[int, float] = Field(
        default_factory=lambda: {1: 0.0, 2: 0.25, 3: 0.6, 4: 1.0},
        description="Damage level (1-4) -> factor in [0, 1]",
    )

    @field_validator("factors")
    @classmethod
    def _monotone(cls, value: Dict[int, float]) -> Dict[int, float]:
        if sorted(value) != [1, 2, 3, 4]:
            raise ValueError(f"factors must cover levels 1-4, got {sorted(value)}")
        ordered = [value[level] for level in (1, 2, 3, 4)]
        if any(not 0.0 <= f <= 1.0 for f in ordered):
            raise ValueError("factors must lie in [0, 1]")
        if any(a > b for a, b in zip(ordered, ordered[1:])):
            raise ValueError("factors must be non-decreasing in damage level")
        return value

    def factor(self, level: int) -> float:
        return 0.0 if level == 0 else float(self.factors[level])


def _decimal(value: float) -> Decimal:
    return Decimal(str(value))


def cost_cents(area_sqft: float, price_per_sqft: float, factor: float, stories: int = DEFAULT_STORIES) -> int:
    """``area * stories * price * factor`` in cents, rounded half up."""
    dollars = _decimal(area_sqft) * Decimal(stories) * _decimal(price_per_sqft) * _decimal(factor)
    return int((dollars * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def estimate_cost(
    building: BuildingRecord,
    zhvi: ZhviTable,
    factors: DamageFactors,
    stories: int = DEFAULT_STORIES,
) -> int:
    """Repair cost of ``building`` in integer cents.

    Raises:
        ZipLookupError: If the building's zip has no price and no fallback is set
    """
    factor = factors.factor(building.damage_level)
    if factor == 0.0:
        return 0
    return cost_cents(building.footprint_area, zhvi.price_for(building.zip), factor, stories)


def assess_buildings(
    buildings: List[BuildingRecord],
    zhvi: ZhviTable,
    factors: DamageFactors,
    stories: int = DEFAULT_STORIES,
) -> List[BuildingRecord]:
    """Attach ``cost_cents`` to every record."""
    assessed = [
        b.with_updates(cost_cents=estimate_cost(b, zhvi, factors, stories)) for b in buildings
    ]
    total = sum(b.cost_cents for b in assessed)
    logger.info("Assessed %d buildings, total $%s", len(assessed), f"{Decimal(total) / 100:,.2f}")
    return assessed


def pixel_cost_map(mask: ClassMask, buildings: List[BuildingRecord], crs: Optional[str] = None) -> GeoRaster:
    """Single-band raster spreading each building's cost (USD) evenly over its pixels.

    Raises:
        InvalidInputError: If a record has no pixel set or no cost
    """
    costs = np.zeros(mask.shape, dtype=np.float64)
    for b in buildings:
        if b.rows is None or b.cols is None or b.cost_cents is None:
            raise InvalidInputError(f"Building {b.id} lacks pixels or cost for the cost map")
        costs[b.rows, b.cols] = b.cost_cents / 100.0 / b.pixel_count
    return GeoRaster(
        pixels=costs[:, :, None],
        transform=mask.transform,
        crs=crs or mask.crs or "EPSG:4326",
        channel_names=("COST_USD",),
    )
