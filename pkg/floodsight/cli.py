"""Command-line entry point: ``floodsight <command> [options]``.

Exit codes: 0 success, 2 invalid input or configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from floodsight import commands
from floodsight.config import load_config
from floodsight.errors import VALIDATION_ERRORS

logger = logging.getLogger("floodsight")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILURE = 3


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="YAML or Markdown front-matter configuration")
    parser.add_argument("--seed", type=int, help="Override the configured seed")
    parser.add_argument("--workers", type=int, help="Parallel tiles/samples (default: CPU count)")
    parser.add_argument("--output-dir", type=Path, help="Artifact directory")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floodsight",
        description="Flood mapping, building damage assessment and gridded damage cost estimates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Generate synthetic datasets")
    _common(p)
    p.add_argument("--task", choices=["damage", "segment", "both"], default="both")
    p.add_argument("--data-dir", type=Path, help="Dataset root")
    p.add_argument("--samples", type=int, help="Number of samples")
    p.add_argument("--image-size", type=int, help="Image side in pixels")

    p = sub.add_parser("train", help="Train a model on a dataset directory")
    _common(p)
    p.add_argument("task", choices=["damage", "segment"])
    p.add_argument("--data-dir", type=Path, help="Dataset directory with manifest.json")
    p.add_argument("--epochs", type=int, help="Training epochs")

    p = sub.add_parser("infer", help="Run a trained model over rasters or a dataset")
    _common(p)
    p.add_argument("task", choices=["damage", "segment"])
    p.add_argument("inputs", nargs="+", type=Path, help="Dataset dir, PRE POST, or RGB [HAND]")
    p.add_argument("--checkpoint", type=Path, help="Model archive")
    p.add_argument("--split", choices=["all", "val"], default="all")
    p.add_argument("--tile-size", type=int, help="Inference tile side in pixels")

    p = sub.add_parser("assess", help="Estimate per-building damage cost from masks")
    _common(p)
    p.add_argument("masks", nargs="+", type=Path, help="Georeferenced damage mask GeoTIFFs")
    p.add_argument("--zhvi", type=Path, help="CSV with zip,price_per_sqft_usd")
    p.add_argument("--zips", type=Path, help="Zip code polygons GeoJSON")
    p.add_argument("--counties", type=Path, help="County polygons GeoJSON")
    p.add_argument("--gsd", type=float, help="Feet per pixel (derived from the mask by default)")
    p.add_argument("--output", type=Path, help="Buildings GeoJSON path")

    p = sub.add_parser("aggregate", help="Summarize building costs per USNG cell, zip or county")
    _common(p)
    p.add_argument("buildings", type=Path, help="Buildings GeoJSON from assess")
    p.add_argument("--level", choices=["usng", "zip", "county"])
    p.add_argument("--precision", type=int, choices=range(6), help="USNG precision 0-5")

    p = sub.add_parser("score", help="Score predicted masks against truth masks")
    _common(p)
    p.add_argument("--pred", nargs="+", type=Path, required=True, help="Predicted masks")
    p.add_argument("--truth", nargs="+", type=Path, required=True, help="Truth masks, same order")
    p.add_argument("--task", choices=["damage", "segment"], default="damage")
    p.add_argument("--output", type=Path, help="Metrics JSON path")

    p = sub.add_parser("pipeline", help="Run synth, train, infer, assess/flood lines, aggregate and score")
    _common(p)
    p.add_argument("task", choices=["damage", "segment"])
    p.add_argument("--data-dir", type=Path, help="Use an existing dataset instead of synthesizing")
    p.add_argument("--epochs", type=int, help="Training epochs")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.log_level:
        overrides["log_level"] = args.log_level.upper()
    if args.output_dir is not None:
        overrides.setdefault("paths", {})["output_dir"] = str(args.output_dir.resolve())
    if getattr(args, "epochs", None) is not None:
        overrides.setdefault("training", {})["epochs"] = args.epochs
    if getattr(args, "tile_size", None) is not None:
        overrides["tile_size"] = args.tile_size
    if getattr(args, "precision", None) is not None:
        overrides["usng_precision"] = args.precision
    if getattr(args, "samples", None) is not None:
        overrides.setdefault("synth", {})["n_samples"] = args.samples
    if getattr(args, "image_size", None) is not None:
        overrides.setdefault("synth", {})["image_size"] = args.image_size
    if args.command == "synth" and args.data_dir is not None:
        overrides.setdefault("paths", {})["data_dir"] = str(args.data_dir.resolve())
    return overrides


def _report(result: Any) -> None:
    def plain(value: Any) -> Any:
        if isinstance(value, Path):
            return str(value)
        if isinstance(value, (list, tuple)):
            return [plain(v) for v in value]
        if isinstance(value, dict):
            return {k: plain(v) for k, v in value.items() if k != "config"}
        return value

    print(json.dumps(plain(result), indent=2, sort_keys=True))


def run(args: argparse.Namespace) -> Any:
    config = load_config(args.config, _overrides(args))
    logging.getLogger().setLevel(config.log_level)

    if args.command == "synth":
        return commands.cmd_synth(config, args.task)
    if args.command == "train":
        return commands.cmd_train(config, args.task, args.data_dir)
    if args.command == "infer":
        return commands.cmd_infer(config, args.task, args.inputs, args.checkpoint, split=args.split)
    if args.command == "assess":
        return commands.cmd_assess(
            config, args.masks, args.zhvi, args.zips, args.counties, args.output, args.gsd
        )
    if args.command == "aggregate":
        return commands.cmd_aggregate(config, args.buildings, args.level, args.precision)
    if args.command == "score":
        return commands.cmd_score(config, args.pred, args.truth, args.task, args.output)
    if args.command == "pipeline":
        from floodsight.pipeline import run_pipeline

        data_dir = str(args.data_dir.resolve()) if args.data_dir else None
        return run_pipeline(config, args.task, dataset_dir=data_dir)
    raise ValueError(f"Unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        _report(run(args))
    except VALIDATION_ERRORS + (ValidationError,) as e:
        logger.error("%s", e)
        return EXIT_INVALID
    except Exception as e:
        logger.error("%s: %s", type(e).__name__, e)
        logger.debug("Traceback", exc_info=True)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
