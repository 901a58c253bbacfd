"""Pipeline nodes: thin wrappers that call a stage and record its artifacts."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict

from floodsight import commands
from floodsight.pipeline.state import PipelineState
from floodsight.raster.io import read_mask

logger = logging.getLogger(__name__)


def _dataset(state: PipelineState) -> Path:
    if state.get("dataset_dir"):
        return Path(state["dataset_dir"])
    return commands.dataset_dir(state["config"], state["task"])


def synth_node(state: PipelineState) -> Dict:
    """Generate the synthetic dataset for the run's task, unless one is supplied."""
    if not state.get("synthesize", True):
        return {"dataset_dir": str(_dataset(state)), "completed": ["synth:skipped"]}
    manifests = commands.cmd_synth(state["config"], state["task"])
    return {"dataset_dir": str(manifests[0].parent), "completed": ["synth"]}


def train_node(state: PipelineState) -> Dict:
    ckpt, history = commands.cmd_train(state["config"], state["task"], _dataset(state))
    return {"checkpoint": str(ckpt), "history": str(history), "completed": ["train"]}


def infer_node(state: PipelineState) -> Dict:
    """Predict the validation split so scoring uses held-out samples."""
    config, task = state["config"], state["task"]
    root = _dataset(state)
    out = config.paths.output_dir / "predictions" / task
    predictions = commands.cmd_infer(
        config, task, [root], Path(state["checkpoint"]), output_dir=out, split="val"
    )
    truths = commands.truth_masks(root, config, split="val")
    return {
        "predictions": [str(p) for p in predictions],
        "truths": [str(t) for t in truths],
        "completed": ["infer"],
    }


def assess_node(state: PipelineState) -> Dict:
    config = state["config"]
    root = _dataset(state)
    buildings = commands.cmd_assess(
        config,
        [Path(p) for p in state["predictions"]],
        zhvi_csv=config.paths.zhvi_csv or root / "zhvi.csv",
        zips=config.paths.zips_geojson or root / "zips.geojson",
        counties=config.paths.counties_geojson or root / "counties.geojson",
    )
    return {"buildings": str(buildings), "completed": ["assess"]}


def aggregate_node(state: PipelineState) -> Dict:
    paths = commands.cmd_aggregate(state["config"], Path(state["buildings"]))
    return {"summaries": {fmt: str(p) for fmt, p in paths.items()}, "completed": ["aggregate"]}


def flood_lines_node(state: PipelineState) -> Dict:
    """Collect the flood line files written next to each segmentation prediction."""
    lines = []
    for prediction in state["predictions"]:
        path = Path(prediction)
        stem = path.name.removesuffix("_pred.tif")
        target = path.parent / f"{stem}_flood_lines.geojson"
        if not target.exists():
            target = commands.write_flood_products(read_mask(path), path.parent, stem)
        lines.append(str(target))
    return {"flood_lines": lines, "completed": ["flood_lines"]}


def score_node(state: PipelineState) -> Dict:
    metrics = commands.cmd_score(
        state["config"],
        [Path(p) for p in state["predictions"]],
        [Path(t) for t in state["truths"]],
        task=state["task"],
    )
    return {"metrics": str(metrics), "completed": ["score"]}


def route_task(state: PipelineState) -> str:
    """Damage runs go on to assessment; segmentation runs go to flood lines."""
    return "assess" if state["task"] == "damage" else "flood_lines"
