"""floodsight: flood mapping with a HAND side channel, dual-encoder U-Net damage
assessment and USNG-gridded financial damage estimates.

Quick start::

    from floodsight import SynthConfig, generate_damage_pair, DualUNetConfig, build_dual_unet

    pre, post, truth = generate_damage_pair(SynthConfig(seed=1), index=0)
    model = build_dual_unet(DualUNetConfig(depth=3), seed=1)
"""

from floodsight.config import PipelineConfig, load_config, save_config
from floodsight.errors import (
    AlignmentError,
    ConfigError,
    DivergenceError,
    FloodsightError,
    GridParseError,
    InvalidInputError,
    InvalidStatsError,
    OutOfDomainError,
    UnassignedError,
    ZipLookupError,
)
from floodsight.financial import (
    BuildingRecord,
    DamageFactors,
    PolygonIndex,
    ZhviTable,
    assign_zip,
    estimate_cost,
    extract_buildings,
)
from floodsight.grid import (
    GridSummary,
    UsngCell,
    aggregate,
    export_summary,
    latlon_to_usng,
    parse_usng,
    usng_to_bbox,
)
from floodsight.metrics import (
    ConfusionMatrix,
    confusion,
    f1_per_class,
    localization_f1,
    overall_score,
)
from floodsight.models import (
    DualUNet,
    DualUNetConfig,
    SegmentationUNet,
    SegUNetConfig,
    build_dual_unet,
    build_segmentation_unet,
    predict_damage,
    segment,
)
from floodsight.raster import (
    ChannelStats,
    ClassMask,
    DamageMask,
    GeoRaster,
    align_and_stack_hand,
    augment,
    normalize,
    reassemble,
    tile_raster,
)
from floodsight.synthetic import SynthConfig, generate_damage_pair, generate_flood_scene
from floodsight.training import (
    LossConfig,
    SamplingPlan,
    build_sampling_plan,
    combined_loss,
    compute_class_weights,
    generalized_dice_loss,
    train,
    weighted_cross_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "load_config",
    "save_config",
    "AlignmentError",
    "ConfigError",
    "DivergenceError",
    "FloodsightError",
    "GridParseError",
    "InvalidInputError",
    "InvalidStatsError",
    "OutOfDomainError",
    "UnassignedError",
    "ZipLookupError",
    "BuildingRecord",
    "DamageFactors",
    "PolygonIndex",
    "ZhviTable",
    "assign_zip",
    "estimate_cost",
    "extract_buildings",
    "GridSummary",
    "UsngCell",
    "aggregate",
    "export_summary",
    "latlon_to_usng",
    "parse_usng",
    "usng_to_bbox",
    "ConfusionMatrix",
    "confusion",
    "f1_per_class",
    "localization_f1",
    "overall_score",
    "DualUNet",
    "DualUNetConfig",
    "SegmentationUNet",
    "SegUNetConfig",
    "build_dual_unet",
    "build_segmentation_unet",
    "predict_damage",
    "segment",
    "ChannelStats",
    "ClassMask",
    "DamageMask",
    "GeoRaster",
    "align_and_stack_hand",
    "augment",
    "normalize",
    "reassemble",
    "tile_raster",
    "SynthConfig",
    "generate_damage_pair",
    "generate_flood_scene",
    "LossConfig",
    "SamplingPlan",
    "build_sampling_plan",
    "combined_loss",
    "compute_class_weights",
    "generalized_dice_loss",
    "train",
    "weighted_cross_entropy",
    "__version__",
]
