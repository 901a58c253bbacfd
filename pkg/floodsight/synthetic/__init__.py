"""Synthetic pre/post pairs, flood scenes, regions and dataset persistence."""

from floodsight.synthetic.dataset import (
    load_damage_dataset,
    load_flood_dataset,
    load_xbd_directory,
    read_manifest,
    write_damage_dataset,
    write_flood_dataset,
)
from floodsight.synthetic.generator import SynthConfig, generate_damage_pair, generate_flood_scene
from floodsight.synthetic.regions import generate_regions, scene_extent

__all__ = [
    "load_damage_dataset",
    "load_flood_dataset",
    "load_xbd_directory",
    "read_manifest",
    "write_damage_dataset",
    "write_flood_dataset",
    "SynthConfig",
    "generate_damage_pair",
    "generate_flood_scene",
    "generate_regions",
    "scene_extent",
]
