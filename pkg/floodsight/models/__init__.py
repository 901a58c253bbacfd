"""U-Net models: scene segmentation (RGB / RGB+HAND) and dual-encoder damage classification."""

from floodsight.models.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from floodsight.models.dual_unet import DualUNet, DualUNetConfig, build_dual_unet, predict_damage
from floodsight.models.flood import FloodExtent, extract_flood_extent, write_flood_lines
from floodsight.models.unet import (
    SEMANTIC_CLASSES,
    WATER_CLASS,
    SegmentationResult,
    SegmentationUNet,
    SegUNetConfig,
    build_segmentation_unet,
    count_parameters,
    segment,
)

__all__ = [
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "DualUNet",
    "DualUNetConfig",
    "build_dual_unet",
    "predict_damage",
    "FloodExtent",
    "extract_flood_extent",
    "write_flood_lines",
    "SEMANTIC_CLASSES",
    "WATER_CLASS",
    "SegmentationResult",
    "SegmentationUNet",
    "SegUNetConfig",
    "build_segmentation_unet",
    "count_parameters",
    "segment",
]
