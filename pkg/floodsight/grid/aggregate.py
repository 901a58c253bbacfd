"""Per-bucket damage totals over USNG cells, zip codes or counties."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Literal, Optional, Tuple

from floodsight.errors import InvalidInputError, OutOfDomainError
from floodsight.financial.buildings import BuildingRecord
from floodsight.grid.usng import latlon_to_usng

logger = logging.getLogger(__name__)

AggregationLevel = Literal["usng", "zip", "county"]
UNASSIGNED = "UNASSIGNED"
DEFAULT_PRECISION = 2  # 1 km cells


@dataclass(frozen=True)
class BucketTotals:
    """Cost in cents and building counts for damage levels 1-4."""

    total_cost_cents: int = 0
    counts: Tuple[int, int, int, int] = (0, 0, 0, 0)
    building_total: int = 0

    def add(self, building: BuildingRecord) -> "BucketTotals":
        counts = list(self.counts)
        if 1 <= building.damage_level <= 4:
            counts[building.damage_level - 1] += 1
        return BucketTotals(
            total_cost_cents=self.total_cost_cents + (building.cost_cents or 0),
            counts=tuple(counts),
            building_total=self.building_total + 1,
        )

    def __add__(self, other: "BucketTotals") -> "BucketTotals":
        return BucketTotals(
            total_cost_cents=self.total_cost_cents + other.total_cost_cents,
            counts=tuple(a + b for a, b in zip(self.counts, other.counts)),
            building_total=self.building_total + other.building_total,
        )


@dataclass(frozen=True)
class GridSummary:
    level: AggregationLevel
    precision: Optional[int]
    buckets: Dict[str, BucketTotals] = field(default_factory=dict)

    @property
    def grand_total_cents(self) -> int:
        return sum(b.total_cost_cents for b in self.buckets.values())

    @property
    def building_total(self) -> int:
        return sum(b.building_total for b in self.buckets.values())

    @property
    def unassigned(self) -> BucketTotals:
        return self.buckets.get(UNASSIGNED, BucketTotals())

    def sorted_items(self) -> list[tuple[str, BucketTotals]]:
        return sorted(self.buckets.items())


def _key_function(level: AggregationLevel, precision: int) -> Callable[[BuildingRecord], Optional[str]]:
    if level == "usng":

        def usng_key(b: BuildingRecord) -> Optional[str]:
            try:
                return str(latlon_to_usng(b.centroid_lat, b.centroid_lon, precision))
            except OutOfDomainError:
                return None

        return usng_key
    if level == "zip":
        return lambda b: b.zip
    if level == "county":
        return lambda b: b.county
    raise InvalidInputError(f"Unknown aggregation level {level!r}")


def aggregate(
    buildings: Iterable[BuildingRecord],
    level: AggregationLevel = "usng",
    precision: int = DEFAULT_PRECISION,
) -> GridSummary:
    """Assign each building by centroid to one bucket and total it.

    Buildings without the keying attribute (no zip, no county, or a centroid
    outside the grid) land in the ``UNASSIGNED`` bucket.

    Args:
        buildings: Assessed building records
        level: ``usng``, ``zip`` or ``county``
        precision: USNG precision 0-5 (ignored for other levels)

    Returns:
        GridSummary with exact integer-cent totals
    """
    key_of = _key_function(level, precision)
    buckets: Dict[str, BucketTotals] = {}
    for building in buildings:
        key = key_of(building) or UNASSIGNED
        buckets[key] = buckets.get(key, BucketTotals()).add(building)

    summary = GridSummary(level=level, precision=precision if level == "usng" else None, buckets=buckets)
    if UNASSIGNED in buckets:
        logger.warning(
            "%d buildings could not be keyed by %s", buckets[UNASSIGNED].building_total, level
        )
    logger.info(
        "Aggregated %d buildings into %d %s buckets, total %d cents",
        summary.building_total,
        len(buckets),
        level,
        summary.grand_total_cents,
    )
    return summary


def merge_summaries(*summaries: GridSummary) -> GridSummary:
    """Combine partial summaries computed over disjoint building sets.

    Raises:
        InvalidInputError: If the summaries use different levels or precisions
    """
    if not summaries:
        raise InvalidInputError("merge_summaries needs at least one summary")
    first = summaries[0]
    buckets: Dict[str, BucketTotals] = {}
    for summary in summaries:
        if (summary.level, summary.precision) != (first.level, first.precision):
            raise InvalidInputError("Cannot merge summaries of different levels or precisions")
        for key, totals in summary.buckets.items():
            buckets[key] = buckets.get(key, BucketTotals()) + totals
    return GridSummary(level=first.level, precision=first.precision, buckets=buckets)
