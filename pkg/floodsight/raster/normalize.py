"""Per-channel normalization with independent RGB and HAND statistics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping

import numpy as np

from floodsight.errors import InvalidInputError, InvalidStatsError
from floodsight.fileio import read_json, write_json
from floodsight.raster.georaster import HAND_CHANNEL, GeoRaster

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Moments:
    mean: float
    std: float


@dataclass(frozen=True)
class ChannelStats:
    """Mean/std per channel, kept in two groups that never share numbers."""

    rgb_stats: Mapping[str, Moments] = field(default_factory=dict)
    hand_stats: Mapping[str, Moments] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, moments in self.items().items():
            if not np.isfinite(moments.std) or moments.std <= 0:
                raise InvalidStatsError(f"Channel {name!r} has non-positive std {moments.std}")

    def items(self) -> Dict[str, Moments]:
        return {**dict(self.rgb_stats), **dict(self.hand_stats)}

    def for_channel(self, name: str) -> Moments:
        group = self.hand_stats if name == HAND_CHANNEL else self.rgb_stats
        if name not in group:
            raise InvalidInputError(f"No normalization statistics for channel {name!r}")
        return group[name]

    def to_json(self) -> Dict[str, Dict[str, float]]:
        return {name: {"mean": m.mean, "std": m.std} for name, m in self.items().items()}

    @classmethod
    def from_json(cls, payload: Mapping[str, Mapping[str, float]]) -> "ChannelStats":
        rgb: Dict[str, Moments] = {}
        hand: Dict[str, Moments] = {}
        for name, values in payload.items():
            target = hand if name == HAND_CHANNEL else rgb
            target[name] = Moments(float(values["mean"]), float(values["std"]))
        return cls(rgb_stats=rgb, hand_stats=hand)

    def save(self, path: str | Path) -> Path:
        return write_json(path, self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "ChannelStats":
        return cls.from_json(read_json(path))


def compute_channel_stats(rasters: Iterable[GeoRaster]) -> ChannelStats:
    """Accumulate per-channel mean/std over a set of rasters (the training split).

    Raises:
        InvalidInputError: If rasters disagree on channel names or none are given
        InvalidStatsError: If a channel is constant
    """
    names = None
    total = 0
    sums = sq_sums = None
    for raster in rasters:
        if names is None:
            names = raster.channel_names
            sums = np.zeros(raster.count)
            sq_sums = np.zeros(raster.count)
        elif raster.channel_names != names:
            raise InvalidInputError(
                f"Channel mismatch: {raster.channel_names} vs {names}"
            )
        flat = raster.pixels.reshape(-1, raster.count).astype(np.float64)
        sums += flat.sum(axis=0)
        sq_sums += (flat ** 2).sum(axis=0)
        total += flat.shape[0]

    if names is None:
        raise InvalidInputError("Cannot compute statistics from zero rasters")

    means = sums / total
    stds = np.sqrt(np.maximum(sq_sums / total - means ** 2, 0.0))
    rgb: Dict[str, Moments] = {}
    hand: Dict[str, Moments] = {}
    for name, mean, std in zip(names, means, stds):
        (hand if name == HAND_CHANNEL else rgb)[name] = Moments(float(mean), float(std))
    logger.info("Computed normalization statistics over %d pixels", total)
    return ChannelStats(rgb_stats=rgb, hand_stats=hand)


def normalize(tile: GeoRaster, stats: ChannelStats) -> GeoRaster:
    """Return ``(x - mean) / std`` per channel using each channel's own group.

    Raises:
        InvalidInputError: If a tile channel has no statistics
    """
    out = np.empty(tile.pixels.shape, dtype=np.float64)
    for index, name in enumerate(tile.channel_names):
        moments = stats.for_channel(name)
        out[:, :, index] = (tile.pixels[:, :, index] - moments.mean) / moments.std
    return tile.with_pixels(out)


def denormalize(tile: GeoRaster, stats: ChannelStats) -> GeoRaster:
    """Inverse of :func:`normalize`."""
    out = np.empty(tile.pixels.shape, dtype=np.float64)
    for index, name in enumerate(tile.channel_names):
        moments = stats.for_channel(name)
        out[:, :, index] = tile.pixels[:, :, index] * moments.std + moments.mean
    return tile.with_pixels(out)
