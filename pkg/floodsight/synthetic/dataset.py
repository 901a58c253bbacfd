"""Datasets on disk: synthetic writers, manifest-driven loaders and an xBD directory reader.

Layout written by ``write_damage_dataset`` / ``write_flood_dataset``::

    <root>/manifest.json
    <root>/images/00000_pre.tif   00000_post.tif      (damage)
    <root>/images/00000_rgb.tif   00000_hand.tif      (flood)
    <root>/masks/00000_mask.png
    <root>/zips.geojson  counties.geojson  zhvi.csv

Mask PNGs carry no georeferencing; the manifest stores each sample's
geotransform and CRS.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional

import numpy as np
from affine import Affine
from PIL import Image
from rasterio import features
from shapely import wkt
from shapely.errors import ShapelyError

from floodsight.errors import InvalidInputError
from floodsight.fileio import read_json, write_json
from floodsight.models.unet import SEMANTIC_CLASSES
from floodsight.raster.georaster import RGB_CHANNELS, DamageMask, GeoRaster
from floodsight.raster.hand import align_and_stack_hand
from floodsight.raster.io import (
    DEFAULT_CRS,
    read_geotiff,
    read_mask_png,
    read_rgb_geotiff,
    write_geotiff,
    write_mask_png,
)
from floodsight.synthetic.generator import SynthConfig, generate_damage_pair, generate_flood_scene
from floodsight.synthetic.regions import generate_regions
from floodsight.training.datasets import DamageSample, SceneSample

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
DatasetKind = Literal["damage", "flood"]

# xBD post-disaster label subtypes
XBD_SUBTYPES = {
    "no-damage": 1,
    "minor-damage": 2,
    "major-damage": 3,
    "destroyed": 4,
    "un-classified": 1,
}


def _transform_list(transform: Affine) -> List[float]:
    return list(transform)[:6]


def _write_regions(root: Path, config: SynthConfig) -> Dict[str, str]:
    zips, counties, zhvi = generate_regions(config)
    write_json(root / "zips.geojson", zips)
    write_json(root / "counties.geojson", counties)
    zhvi.to_csv(root / "zhvi.csv")
    return {"zips": "zips.geojson", "counties": "counties.geojson", "zhvi": "zhvi.csv"}


def _write_manifest(root: Path, kind: DatasetKind, config: SynthConfig, samples: List[dict], extras: dict) -> Path:
    payload = {
        "kind": kind,
        "config": json.loads(config.model_dump_json()),
        "crs": config.crs,
        "samples": samples,
        **extras,
    }
    return write_json(root / MANIFEST, payload)


def write_damage_dataset(root: str | Path, config: SynthConfig, workers: int = 1) -> Path:
    """Generate ``config.n_samples`` damage pairs under ``root``.

    Returns:
        Path of the manifest
    """
    root = Path(root)

    def write_one(index: int) -> dict:
        pre, post, truth = generate_damage_pair(config, index)
        stem = f"{index:05d}"
        write_geotiff(root / "images" / f"{stem}_pre.tif", pre)
        write_geotiff(root / "images" / f"{stem}_post.tif", post)
        write_mask_png(root / "masks" / f"{stem}_mask.png", truth)
        return {
            "id": stem,
            "pre": f"images/{stem}_pre.tif",
            "post": f"images/{stem}_post.tif",
            "mask": f"masks/{stem}_mask.png",
            "transform": _transform_list(truth.transform),
        }

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        samples = list(pool.map(write_one, range(config.n_samples)))
    manifest = _write_manifest(root, "damage", config, samples, _write_regions(root, config))
    logger.info("Wrote %d damage pairs to %s", len(samples), root)
    return manifest


def write_flood_dataset(root: str | Path, config: SynthConfig, workers: int = 1) -> Path:
    """Generate ``config.n_samples`` flood scenes (RGB, HAND, semantic mask) under ``root``."""
    root = Path(root)

    def write_one(index: int) -> dict:
        rgb, hand, truth = generate_flood_scene(config, index)
        stem = f"{index:05d}"
        write_geotiff(root / "images" / f"{stem}_rgb.tif", rgb)
        write_geotiff(root / "images" / f"{stem}_hand.tif", hand)
        write_mask_png(root / "masks" / f"{stem}_mask.png", truth)
        return {
            "id": stem,
            "rgb": f"images/{stem}_rgb.tif",
            "hand": f"images/{stem}_hand.tif",
            "mask": f"masks/{stem}_mask.png",
            "transform": _transform_list(truth.transform),
        }

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        samples = list(pool.map(write_one, range(config.n_samples)))
    extras = {"classes": list(SEMANTIC_CLASSES)}
    manifest = _write_manifest(root, "flood", config, samples, extras)
    logger.info("Wrote %d flood scenes to %s", len(samples), root)
    return manifest


def read_manifest(root: str | Path, kind: Optional[DatasetKind] = None) -> dict:
    """Load and check ``manifest.json``.

    Raises:
        InvalidInputError: Missing manifest, wrong kind, or missing sample files
    """
    root = Path(root)
    path = root / MANIFEST
    if not path.exists():
        raise InvalidInputError(f"No {MANIFEST} in {root}")
    try:
        manifest = read_json(path)
    except ValueError as e:
        raise InvalidInputError(str(e)) from e
    if kind is not None and manifest.get("kind") != kind:
        raise InvalidInputError(f"{path} describes a {manifest.get('kind')!r} dataset, expected {kind!r}")
    for sample in manifest.get("samples", []):
        for key in ("pre", "post", "rgb", "hand", "mask"):
            if key in sample and not (root / sample[key]).exists():
                raise InvalidInputError(f"Manifest entry {sample['id']} references missing {sample[key]}")
    return manifest


def load_damage_dataset(root: str | Path) -> List[DamageSample]:
    root = Path(root)
    manifest = read_manifest(root, "damage")
    samples = []
    for entry in manifest["samples"]:
        pre = read_geotiff(root / entry["pre"])
        post = read_geotiff(root / entry["post"])
        truth = read_mask_png(root / entry["mask"], Affine(*entry["transform"]), manifest["crs"])
        samples.append(DamageSample(pre=pre, post=post, truth=truth))
    return samples


def load_flood_dataset(root: str | Path, with_hand: bool = True) -> List[SceneSample]:
    """Flood scenes as RGB+HAND (``with_hand``) or RGB-only samples."""
    root = Path(root)
    manifest = read_manifest(root, "flood")
    samples = []
    for entry in manifest["samples"]:
        rgb = read_geotiff(root / entry["rgb"])
        image = align_and_stack_hand(rgb, read_geotiff(root / entry["hand"])) if with_hand else rgb
        truth = read_mask_png(
            root / entry["mask"],
            Affine(*entry["transform"]),
            manifest["crs"],
            num_classes=len(SEMANTIC_CLASSES),
        )
        samples.append(SceneSample(image=image, truth=truth))
    return samples


def _read_image(path: Path) -> GeoRaster:
    if path.suffix.lower() in {".tif", ".tiff"}:
        return read_rgb_geotiff(path)
    try:
        with Image.open(path) as image:
            pixels = np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
    except OSError as e:
        raise InvalidInputError(f"Cannot read image {path}: {e}") from e
    return GeoRaster(pixels=pixels, transform=Affine.identity(), crs=DEFAULT_CRS, channel_names=RGB_CHANNELS)


def _rasterize_xbd_labels(path: Path, shape: tuple[int, int]) -> np.ndarray:
    payload = read_json(path)
    shapes = []
    for feature in payload.get("features", {}).get("xy", []):
        subtype = (feature.get("properties") or {}).get("subtype", "no-damage")
        level = XBD_SUBTYPES.get(subtype)
        if level is None:
            raise InvalidInputError(f"Unknown damage subtype {subtype!r} in {path}")
        try:
            shapes.append((wkt.loads(feature["wkt"]), level))
        except (KeyError, ShapelyError) as e:
            raise InvalidInputError(f"Bad polygon in {path}: {e}") from e
    if not shapes:
        return np.zeros(shape, dtype=np.uint8)
    # rasterize in ascending level order so overlaps keep the higher damage
    shapes.sort(key=lambda item: item[1])
    return features.rasterize(shapes, out_shape=shape, fill=0, dtype=np.uint8)


def load_xbd_directory(root: str | Path) -> List[DamageSample]:
    """Read an xBD-style split: ``images/<id>_pre_disaster.*`` and ``<id>_post_disaster.*``
    with either ``targets/<id>_post_disaster_target.png`` masks or
    ``labels/<id>_post_disaster.json`` polygon labels (pixel-space WKT).

    Raises:
        InvalidInputError: If a pair lacks its post image or its labels
    """
    root = Path(root)
    pre_paths = sorted((root / "images").glob("*_pre_disaster.*"))
    if not pre_paths:
        raise InvalidInputError(f"No *_pre_disaster images under {root / 'images'}")
    samples = []
    for pre_path in pre_paths:
        stem = pre_path.name.split("_pre_disaster")[0]
        post_matches = sorted((root / "images").glob(f"{stem}_post_disaster.*"))
        if not post_matches:
            raise InvalidInputError(f"No post-disaster image for {stem}")
        pre, post = _read_image(pre_path), _read_image(post_matches[0])
        if pre.pixels.shape != post.pixels.shape:
            raise InvalidInputError(f"Pre/post images of {stem} differ in size")

        target = root / "targets" / f"{stem}_post_disaster_target.png"
        label = root / "labels" / f"{stem}_post_disaster.json"
        if target.exists():
            truth = read_mask_png(target, pre.transform, pre.crs)
        elif label.exists():
            labels = _rasterize_xbd_labels(label, (pre.height, pre.width))
            truth = DamageMask(labels=labels, transform=pre.transform, crs=pre.crs)
        else:
            raise InvalidInputError(f"No target mask or label JSON for {stem}")
        samples.append(DamageSample(pre=pre, post=post, truth=truth))
    logger.info("Loaded %d xBD pairs from %s", len(samples), root)
    return samples
