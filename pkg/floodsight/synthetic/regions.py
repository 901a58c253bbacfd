"""Synthetic zip code / county polygons and a price table covering generated scenes."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from pyproj import Transformer
from shapely import ops
from shapely.geometry import box, mapping

from floodsight.financial.cost import ZhviTable
from floodsight.synthetic.generator import SCENES_PER_ROW, SynthConfig

FIRST_ZIP = 77001
PRICE_RANGE = (90.0, 250.0)


def scene_extent(config: SynthConfig) -> Tuple[float, float, float, float]:
    """``(min_x, min_y, max_x, max_y)`` in the scene CRS over all samples."""
    span = config.image_size * config.gsd_m
    rows = (config.n_samples + SCENES_PER_ROW - 1) // SCENES_PER_ROW
    cols = min(config.n_samples, SCENES_PER_ROW)
    x0, y0 = config.origin
    return (x0, y0 - rows * span, x0 + cols * span, y0)


def generate_regions(
    config: SynthConfig, zips_per_side: int = 2, zips_per_county: int = 2
) -> Tuple[dict, dict, ZhviTable]:
    """Zip and county FeatureCollections (WGS84) tiling the scene extent, plus prices.

    Zips are a ``zips_per_side`` square grid numbered row-major from
    ``FIRST_ZIP``; each county groups ``zips_per_county`` consecutive zips.
    The grid is padded by one pixel so every scene pixel is covered.
    """
    rng = np.random.default_rng([config.seed, 2])
    min_x, min_y, max_x, max_y = scene_extent(config)
    pad = config.gsd_m
    xs = np.linspace(min_x - pad, max_x + pad, zips_per_side + 1)
    ys = np.linspace(max_y + pad, min_y - pad, zips_per_side + 1)
    project = Transformer.from_crs(config.crs, "EPSG:4326", always_xy=True).transform

    zip_features, county_parts, prices = [], {}, {}
    for r in range(zips_per_side):
        for c in range(zips_per_side):
            number = r * zips_per_side + c
            code = f"{FIRST_ZIP + number:05d}"
            county = f"County {number // zips_per_county + 1}"
            cell = box(xs[c], ys[r + 1], xs[c + 1], ys[r]).segmentize(max(pad * 4, 1.0))
            geometry = ops.transform(project, cell)
            zip_features.append(
                {
                    "type": "Feature",
                    "geometry": mapping(geometry),
                    "properties": {"zip": code, "county": county},
                }
            )
            county_parts.setdefault(county, []).append(geometry)
            prices[code] = round(float(rng.uniform(*PRICE_RANGE)), 2)

    county_features = [
        {
            "type": "Feature",
            "geometry": mapping(ops.unary_union(parts)),
            "properties": {"county": name},
        }
        for name, parts in sorted(county_parts.items())
    ]
    return (
        {"type": "FeatureCollection", "features": zip_features},
        {"type": "FeatureCollection", "features": county_features},
        ZhviTable(prices=prices, vintage="ZHVI-synthetic"),
    )
