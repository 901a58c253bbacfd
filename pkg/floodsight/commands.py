"""Pipeline stages as plain functions over files.

Each ``cmd_*`` reads its inputs from disk, writes its artifacts atomically
and returns their paths. The CLI and the LangGraph pipeline both call these;
stages share nothing but files.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from floodsight.config import PipelineConfig
from floodsight.errors import InvalidInputError
from floodsight.financial import (
    DamageFactors,
    PolygonIndex,
    ZhviTable,
    assess_buildings,
    assign_regions,
    extract_buildings,
    pixel_cost_map,
    read_buildings_geojson,
    write_buildings_geojson,
)
from floodsight.fileio import write_json
from floodsight.grid import aggregate, export_summary
from floodsight.metrics import score_masks, score_segmentation, write_metrics_json
from floodsight.models import (
    SEMANTIC_CLASSES,
    WATER_CLASS,
    build_dual_unet,
    build_segmentation_unet,
    extract_flood_extent,
    load_checkpoint,
    predict_damage,
    save_checkpoint,
    segment,
    write_flood_lines,
)
from floodsight.models.dual_unet import DualUNet
from floodsight.models.unet import SegmentationUNet
from floodsight.raster import (
    ClassMask,
    DamageMask,
    GeoRaster,
    align_and_stack_hand,
    compute_channel_stats,
    mask_to_raster,
    raster_to_mask,
    read_hand_geotiff,
    read_mask,
    read_rgb_geotiff,
    reassemble,
    tile_raster,
    write_geotiff,
)
from floodsight.raster.normalize import ChannelStats
from floodsight.synthetic import (
    load_damage_dataset,
    load_flood_dataset,
    read_manifest,
    write_damage_dataset,
    write_flood_dataset,
)
from floodsight.training import (
    DamagePairDataset,
    SceneDataset,
    build_sampling_plan,
    compute_class_weights,
    history_to_csv,
    train,
)

logger = logging.getLogger(__name__)

Task = Literal["damage", "segment"]
DATASET_DIRS = {"damage": "damage", "segment": "flood"}


def dataset_dir(config: PipelineConfig, task: Task) -> Path:
    return config.paths.data_dir / DATASET_DIRS[task]


def checkpoint_path(config: PipelineConfig, task: Task) -> Path:
    return config.paths.checkpoint_dir / f"{task}.pt"


def split_indices(count: int, val_fraction: float, seed: int) -> Tuple[List[int], List[int]]:
    """Deterministic ``(train, val)`` index split; at least one training sample."""
    order = np.random.default_rng(seed).permutation(count).tolist()
    n_val = min(int(round(count * val_fraction)), max(count - 1, 0))
    return sorted(order[n_val:]), sorted(order[:n_val])


# -- synth ---------------------------------------------------------------------


def cmd_synth(config: PipelineConfig, task: Literal["damage", "segment", "both"] = "both") -> List[Path]:
    """Generate synthetic datasets; returns the manifest paths."""
    synth = config.synth.model_copy(update={"seed": config.seed})
    manifests = []
    if task in ("damage", "both"):
        manifests.append(write_damage_dataset(dataset_dir(config, "damage"), synth, config.effective_workers))
    if task in ("segment", "both"):
        manifests.append(write_flood_dataset(dataset_dir(config, "segment"), synth, config.effective_workers))
    return manifests


# -- train ---------------------------------------------------------------------


def cmd_train(config: PipelineConfig, task: Task, data_dir: Optional[Path] = None) -> Tuple[Path, Path]:
    """Train the ``task`` model on a dataset directory.

    Writes the checkpoint, the per-epoch history CSV and the loss/optimizer
    settings actually used as JSON.

    Returns:
        ``(checkpoint, history_csv)``
    """
    root = Path(data_dir) if data_dir else dataset_dir(config, task)
    settings = config.training
    if task == "damage":
        samples = load_damage_dataset(root)
        model_config = config.damage
        num_classes = model_config.num_classes
    else:
        model_config = config.segmentation
        samples = load_flood_dataset(root, with_hand=model_config.in_channels == 4)
        num_classes = model_config.num_classes

    train_idx, val_idx = split_indices(len(samples), settings.val_fraction, config.seed)
    train_samples = [samples[i] for i in train_idx]
    val_samples = [samples[i] for i in val_idx]

    if task == "damage":
        stats = compute_channel_stats([r for s in train_samples for r in (s.pre, s.post)])
        dataset = DamagePairDataset(train_samples, stats, settings.augment, config.seed)
        val_dataset = DamagePairDataset(val_samples, stats) if val_samples else None
        model = build_dual_unet(model_config, config.seed)
        factor = settings.oversample_factor
    else:
        stats = compute_channel_stats([s.image for s in train_samples])
        dataset = SceneDataset(train_samples, stats, settings.augment, config.seed)
        val_dataset = SceneDataset(val_samples, stats) if val_samples else None
        model = build_segmentation_unet(model_config, config.seed)
        factor = 1  # minor/major oversampling applies to damage labels only

    loss_config = settings.loss
    if settings.auto_class_weights:
        weights = compute_class_weights([s.truth.labels for s in train_samples], num_classes)
        loss_config = loss_config.model_copy(update={"class_weights": weights})
    elif len(loss_config.class_weights) != num_classes:
        raise InvalidInputError(f"{len(loss_config.class_weights)} class weights for {num_classes} classes")

    plan = build_sampling_plan(dataset.class_index(), factor, config.seed)
    result = train(
        model,
        dataset,
        plan,
        loss_config,
        settings.optimizer,
        epochs=settings.epochs,
        seed=config.seed,
        val_dataset=val_dataset,
    )

    ckpt = save_checkpoint(checkpoint_path(config, task), result.model, stats)
    names = list(model_config.class_names or SEMANTIC_CLASSES) if task == "segment" else [
        "no_building", "no_damage", "minor", "major", "destroyed"
    ]
    history = history_to_csv(config.paths.output_dir / f"{task}_history.csv", result.history, names)
    write_json(
        config.paths.output_dir / f"{task}_training.json",
        {
            "loss": loss_config.model_dump(),
            "optimizer": settings.optimizer.model_dump(),
            "epochs": settings.epochs,
            "oversample_factor": factor,
            "seed": config.seed,
            "train_samples": len(train_samples),
            "val_samples": len(val_samples),
        },
    )
    return ckpt, history


# -- infer ---------------------------------------------------------------------


def _tile_size(raster: GeoRaster, requested: int, divisor: int) -> int:
    size = min(requested, max(raster.height, raster.width))
    return int(math.ceil(size / divisor) * divisor)


def infer_damage(
    model: DualUNet,
    pre: GeoRaster,
    post: GeoRaster,
    stats: Optional[ChannelStats],
    tile_size: int,
    workers: int = 1,
) -> DamageMask:
    """Tile an aligned pair, classify tiles in parallel and stitch the mask."""
    size = _tile_size(pre, tile_size, model.config.divisor)
    pre_tiles, post_tiles = tile_raster(pre, size), tile_raster(post, size)

    def run(pair: Tuple[GeoRaster, GeoRaster]) -> GeoRaster:
        return mask_to_raster(predict_damage(model, pair[0], pair[1], stats))

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        masks = list(pool.map(run, zip(pre_tiles.tiles, post_tiles.tiles)))
    logger.info("Classified %d tiles of %d px", len(masks), size)
    return raster_to_mask(reassemble(pre_tiles.with_tiles(masks)))


def infer_segmentation(
    model: SegmentationUNet,
    image: GeoRaster,
    stats: Optional[ChannelStats],
    tile_size: int,
    workers: int = 1,
) -> ClassMask:
    """Tile ``image``, segment tiles in parallel and stitch the mask."""
    size = _tile_size(image, tile_size, model.config.divisor)
    tiles = tile_raster(image, size)

    def run(tile: GeoRaster) -> GeoRaster:
        return mask_to_raster(segment(model, tile, stats).mask)

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        masks = list(pool.map(run, tiles.tiles))
    logger.info("Segmented %d tiles of %d px", len(masks), size)
    return raster_to_mask(reassemble(tiles.with_tiles(masks)), model.config.num_classes)


def write_flood_products(mask: ClassMask, out_dir: Path, stem: str) -> Path:
    """Water GeoTIFF and flood lines GeoJSON for a segmentation mask."""
    extent = extract_flood_extent(mask, WATER_CLASS)
    write_geotiff(out_dir / f"{stem}_water.tif", extent.water)
    return write_flood_lines(out_dir / f"{stem}_flood_lines.geojson", extent)


def cmd_infer(
    config: PipelineConfig,
    task: Task,
    inputs: Sequence[Path],
    checkpoint: Optional[Path] = None,
    output_dir: Optional[Path] = None,
    split: Literal["all", "val"] = "all",
) -> List[Path]:
    """Run a trained model on rasters or on a dataset directory.

    ``inputs`` is either one dataset directory (with ``manifest.json``), a
    ``pre``/``post`` GeoTIFF pair for ``damage``, or an RGB GeoTIFF (plus a
    HAND GeoTIFF for 4-channel models) for ``segment``.

    Returns:
        Paths of the predicted mask GeoTIFFs
    """
    ckpt = load_checkpoint(checkpoint or checkpoint_path(config, task))
    if ckpt.kind != task:
        raise InvalidInputError(f"Checkpoint holds a {ckpt.kind!r} model, not {task!r}")
    out = Path(output_dir) if output_dir else config.paths.output_dir / "predictions" / task
    workers = config.effective_workers
    inputs = [Path(p) for p in inputs]

    jobs: List[Tuple[str, GeoRaster, Optional[GeoRaster]]] = []
    if len(inputs) == 1 and inputs[0].is_dir():
        root = inputs[0]
        manifest = read_manifest(root)
        entries = manifest["samples"]
        if split == "val":
            _, val_idx = split_indices(len(entries), config.training.val_fraction, config.seed)
            entries = [entries[i] for i in val_idx]
        for entry in entries:
            if task == "damage":
                pre, post = read_rgb_geotiff(root / entry["pre"]), read_rgb_geotiff(root / entry["post"])
                jobs.append((entry["id"], pre, post))
            else:
                rgb, hand = read_rgb_geotiff(root / entry["rgb"]), read_hand_geotiff(root / entry["hand"])
                jobs.append((entry["id"], rgb, hand))
    elif task == "damage":
        if len(inputs) != 2:
            raise InvalidInputError("damage inference needs a dataset directory or PRE and POST rasters")
        jobs.append((inputs[1].stem, read_rgb_geotiff(inputs[0]), read_rgb_geotiff(inputs[1])))
    else:
        if not inputs or len(inputs) > 2:
            raise InvalidInputError("segment inference needs a dataset directory or RGB [HAND] rasters")
        hand = read_hand_geotiff(inputs[1]) if len(inputs) == 2 else None
        jobs.append((inputs[0].stem, read_rgb_geotiff(inputs[0]), hand))

    written = []
    for stem, first, second in jobs:
        if task == "damage":
            mask = infer_damage(ckpt.model, first, second, ckpt.stats, config.tile_size, workers)
        else:
            image = first
            if ckpt.model.config.in_channels == 4:
                if second is None:
                    raise InvalidInputError("4-channel model needs a HAND raster")
                image = align_and_stack_hand(first, second)
            mask = infer_segmentation(ckpt.model, image, ckpt.stats, config.tile_size, workers)
            write_flood_products(mask, out, stem)
        written.append(write_geotiff(out / f"{stem}_pred.tif", mask_to_raster(mask)))
    logger.info("Wrote %d %s predictions to %s", len(written), task, out)
    return written


# -- assess --------------------------------------------------------------------


def _optional_index(path: Optional[Path], key: str) -> Optional[PolygonIndex]:
    return PolygonIndex.from_geojson(path, key_property=key) if path else None


def cmd_assess(
    config: PipelineConfig,
    masks: Sequence[Path],
    zhvi_csv: Optional[Path] = None,
    zips: Optional[Path] = None,
    counties: Optional[Path] = None,
    output: Optional[Path] = None,
    gsd: Optional[float] = None,
) -> Path:
    """Damage masks to a buildings GeoJSON with per-building cost, plus cost map GeoTIFFs."""
    zhvi_csv = zhvi_csv or config.paths.zhvi_csv
    if zhvi_csv is None:
        raise InvalidInputError("A ZHVI price table is required for assessment")
    zhvi = ZhviTable.from_csv(zhvi_csv, fallback_price=config.fallback_price)
    zip_index = _optional_index(zips or config.paths.zips_geojson, "zip")
    county_index = _optional_index(counties or config.paths.counties_geojson, "county")
    factors: DamageFactors = config.damage_factors
    out = Path(output) if output else config.paths.output_dir / "buildings.geojson"

    records = []
    for mask_path in masks:
        mask = read_mask(mask_path)
        if mask.crs is None:
            raise InvalidInputError(f"{mask_path} has no georeferencing; use a GeoTIFF mask")
        found = extract_buildings(mask, gsd=gsd)
        found = assign_regions(found, zip_index, county_index)
        found = assess_buildings(found, zhvi, factors, config.stories)
        write_geotiff(out.parent / "cost_maps" / f"{Path(mask_path).stem}_cost.tif", pixel_cost_map(mask, found))
        records.extend(b.with_updates(id=len(records) + i) for i, b in enumerate(found))

    return write_buildings_geojson(out, records)


# -- aggregate -----------------------------------------------------------------


def cmd_aggregate(
    config: PipelineConfig,
    buildings: Path,
    level: Optional[str] = None,
    precision: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> Dict[str, Path]:
    """Buildings GeoJSON to summary GeoJSON and CSV."""
    level = level or config.aggregation_level
    precision = config.usng_precision if precision is None else precision
    records = read_buildings_geojson(buildings)
    summary = aggregate(records, level, precision)
    out = Path(output_dir) if output_dir else config.paths.output_dir
    stem = f"summary_{level}{precision if level == 'usng' else ''}"
    regions = None
    if level in ("zip", "county"):
        source = config.paths.zips_geojson if level == "zip" else config.paths.counties_geojson
        regions = _optional_index(source, level)
    return {
        "geojson": export_summary(summary, out / f"{stem}.geojson", "geojson", regions),
        "csv": export_summary(summary, out / f"{stem}.csv", "csv"),
    }


# -- score ---------------------------------------------------------------------


def cmd_score(
    config: PipelineConfig,
    predictions: Sequence[Path],
    truths: Sequence[Path],
    task: Task = "damage",
    output: Optional[Path] = None,
) -> Path:
    """Score predicted masks against truth masks, pairwise in the given order."""
    if len(predictions) != len(truths):
        raise InvalidInputError(f"{len(predictions)} predictions for {len(truths)} truth masks")
    preds = [read_mask(p) for p in predictions]
    gts = [read_mask(t) for t in truths]
    if task == "damage":
        report = score_masks(preds, gts)
    else:
        names = list(config.segmentation.class_names or SEMANTIC_CLASSES)
        report = score_segmentation(preds, gts, names)
    out = Path(output) if output else config.paths.output_dir / f"{task}_metrics.json"
    return write_metrics_json(out, report)


def truth_masks(root: Path, config: PipelineConfig, split: Literal["all", "val"] = "all") -> List[Path]:
    """Truth mask paths of a dataset directory in manifest order."""
    entries = read_manifest(root)["samples"]
    if split == "val":
        _, val_idx = split_indices(len(entries), config.training.val_fraction, config.seed)
        entries = [entries[i] for i in val_idx]
    return [root / entry["mask"] for entry in entries]
