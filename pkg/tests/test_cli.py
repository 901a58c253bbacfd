from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
import rasterio
from affine import Affine

from floodsight.cli import EXIT_FAILURE, EXIT_INVALID, EXIT_OK, build_parser, main
from floodsight.models import DualUNetConfig, build_dual_unet, save_checkpoint
from floodsight.raster import DamageMask, compute_channel_stats, read_mask, write_mask_png
from floodsight.synthetic import SynthConfig, generate_damage_pair


def _mask(tmp_path: Path) -> Path:
    labels = np.tile(np.arange(5, dtype=np.uint8), (5, 1))
    return write_mask_png(tmp_path / "truth.png", DamageMask(labels=labels))


def test_score_identical_masks(tmp_path: Path, capsys) -> None:
    mask = _mask(tmp_path)
    out = tmp_path / "metrics.json"
    code = main(["score", "--pred", str(mask), "--truth", str(mask), "--output", str(out)])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out) == str(out)
    assert json.loads(out.read_text())["F1 - Score"] == pytest.approx(1.0)


def test_synth_writes_manifest(tmp_path: Path, capsys) -> None:
    code = main(
        [
            "synth",
            "--task", "damage",
            "--data-dir", str(tmp_path / "data"),
            "--samples", "2",
            "--image-size", "16",
            "--workers", "1",
        ]
    )
    assert code == EXIT_OK
    (manifest,) = json.loads(capsys.readouterr().out)
    assert Path(manifest) == tmp_path / "data" / "damage" / "manifest.json"
    assert len(json.loads(Path(manifest).read_text())["samples"]) == 2


def test_bad_configuration_exits_invalid(tmp_path: Path) -> None:
    config = tmp_path / "bad.yaml"
    config.write_text("usng_precision: 9\n", encoding="utf-8")
    mask = _mask(tmp_path)
    assert main(["score", "--config", str(config), "--pred", str(mask), "--truth", str(mask)]) == EXIT_INVALID
    assert main(["score", "--config", str(tmp_path / "missing.yaml"), "--pred", str(mask), "--truth", str(mask)]) == EXIT_INVALID


def test_invalid_inputs_exit_invalid(tmp_path: Path) -> None:
    mask = _mask(tmp_path)
    assert main(["score", "--pred", str(mask), str(mask), "--truth", str(mask)]) == EXIT_INVALID
    assert main(["score", "--pred", str(tmp_path / "none.png"), "--truth", str(mask)]) == EXIT_INVALID

    buildings = tmp_path / "buildings.geojson"
    buildings.write_text(json.dumps({"type": "FeatureCollection", "features": [{"properties": {}}]}))
    assert main(["aggregate", str(buildings), "--output-dir", str(tmp_path)]) == EXIT_INVALID


def test_runtime_failure_exits_with_failure(tmp_path: Path, mocker) -> None:
    mocker.patch("floodsight.commands.cmd_train", side_effect=RuntimeError("out of memory"))
    assert main(["train", "damage", "--output-dir", str(tmp_path)]) == EXIT_FAILURE


def test_flags_reach_the_configuration(tmp_path: Path, mocker) -> None:
    aggregate = mocker.patch("floodsight.commands.cmd_aggregate", return_value={"csv": tmp_path / "s.csv"})
    code = main(["aggregate", "b.geojson", "--precision", "4", "--seed", "8", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    config, buildings, level, precision = aggregate.call_args.args
    assert (config.seed, config.usng_precision, precision, level) == (8, 4, 4, None)
    assert config.paths.output_dir == tmp_path.resolve()
    assert buildings == Path("b.geojson")


def test_parser_rejects_unknown_choices() -> None:
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["aggregate", "b.geojson", "--precision", "6"])
    with pytest.raises(SystemExit):
        parser.parse_args(["train", "flood"])


def _plain_rgb_tiff(path: Path, seed: int) -> Path:
    data = np.random.default_rng(seed).integers(0, 256, (3, 32, 32)).astype(np.uint8)
    with rasterio.open(
        path,
        "w",
        driver="GTiff",
        height=32,
        width=32,
        count=3,
        dtype="uint8",
        crs="EPSG:32615",
        transform=Affine(0.9144, 0, 270000.0, 0, -0.9144, 3300000.0),
    ) as dst:
        dst.write(data)
    return path


def test_infer_on_imagery_without_band_descriptions(tmp_path: Path, capsys) -> None:
    synth = SynthConfig(seed=0, image_size=16, n_samples=2, building_size=(3, 5))
    pairs = [generate_damage_pair(synth, i) for i in range(2)]
    stats = compute_channel_stats([r for pre, post, _ in pairs for r in (pre, post)])
    checkpoint = save_checkpoint(
        tmp_path / "damage.pt", build_dual_unet(DualUNetConfig(depth=2, base_width=4)), stats
    )
    pre = _plain_rgb_tiff(tmp_path / "scene_pre.tif", seed=1)
    post = _plain_rgb_tiff(tmp_path / "scene_post.tif", seed=2)

    code = main(
        [
            "infer", "damage", str(pre), str(post),
            "--checkpoint", str(checkpoint),
            "--tile-size", "16",
            "--workers", "1",
            "--output-dir", str(tmp_path / "out"),
        ]
    )
    assert code == EXIT_OK
    (written,) = json.loads(capsys.readouterr().out)
    mask = read_mask(written)
    assert mask.labels.shape == (32, 32)
    assert mask.labels.max() <= 4
