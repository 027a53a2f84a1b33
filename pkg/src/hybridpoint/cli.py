"""Command-line interface.

Subcommands: synth-data, cubemap2fisheye, make-pairs, pseudo-label,
eval, loss-check. All randomness flows from explicit --seed values, so
outputs are reproducible byte for byte.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import dataset as ds
from .backend import active_backend
from .benchmark import run_benchmark
from .camera import load_calibration
from .detect import DetectorConfig, baseline_detect, pseudo_label
from .homography import SamplingRanges, load_ranges
from .imgio import load_gray, save_gray, save_mask
from .losses import oracle_suite
from .metrics import EvalConfig
from .synthdata import KINDS, gen_primitive_image
from .warp import CUBE_FACE_SUFFIXES, CubeMap, cubemap_to_fisheye


def _parse_size(text: str) -> tuple[int, int]:
    if "x" in text:
        w, h = text.lower().split("x")
        return int(w), int(h)
    return int(text), int(text)


@click.group()
def main():
    """Hybrid fisheye/perspective keypoint toolkit."""


@main.command("synth-data")
@click.option("--kind", type=click.Choice(KINDS), default="mixed", show_default=True)
@click.option("--count", type=int, default=10, show_default=True)
@click.option("--size", default="320x320", show_default=True, help="WxH or a single side length")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def synth_data(kind, count, size, seed, out_dir):
    """Generate labeled geometric-primitive images."""
    w, h = _parse_size(size)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        labeled = gen_primitive_image(ds.derived_rng(seed, i), (w, h), kind)
        img_path = out_dir / f"img_{i:05d}.png"
        save_gray(img_path, labeled.image)
        ds.save_ground_truth(img_path, labeled.keypoints)
    click.echo(f"wrote {count} {kind} images to {out_dir}")


@main.command("cubemap2fisheye")
@click.option("--faces", "faces_dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--calib", "calib_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def cubemap2fisheye(faces_dir, calib_path, out_path):
    """Render a fisheye image from six cube-map faces (*_px.png etc.)."""
    face_paths = []
    for suf in CUBE_FACE_SUFFIXES:
        hits = sorted(faces_dir.glob(f"*_{suf}.*"))
        if len(hits) != 1:
            raise click.ClickException(f"expected exactly one *_{suf} face, found {len(hits)}")
        face_paths.append(hits[0])
    cube = CubeMap.from_arrays([load_gray(p) for p in face_paths])
    fisheye, _ = load_calibration(calib_path)
    img, mask = cubemap_to_fisheye(cube, fisheye)
    save_gray(out_path, img)
    mask_path = out_path.with_name(out_path.stem + "_mask.png")
    save_mask(mask_path, mask)
    click.echo(f"wrote {out_path} and {mask_path}")


@main.command("make-pairs")
@click.option("--fisheye", "fisheye_dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--calib", "calib_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--k", type=int, default=5, show_default=True, help="perspective views per fisheye image")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ranges", "ranges_path", type=click.Path(path_type=Path, exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def make_pairs_cmd(fisheye_dir, calib_path, k, seed, ranges_path, out_dir):
    """Sample hybrid homographies and synthesize perspective views."""
    fisheye, pinhole = load_calibration(calib_path)
    ranges = load_ranges(ranges_path) if ranges_path else SamplingRanges()
    names = ds.make_pairs(fisheye_dir, fisheye, pinhole, out_dir, k=k, seed=seed, ranges=ranges)
    click.echo(f"wrote {len(names)} pairs to {out_dir}")


@main.command("pseudo-label")
@click.option("--images", "images_dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--n-homographies", type=int, default=100, show_default=True)
@click.option("--rounds", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threshold", type=float, default=0.015, show_default=True)
@click.option("--nms-radius", type=float, default=4.0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def pseudo_label_cmd(images_dir, n_homographies, rounds, seed, threshold, nms_radius, out_dir):
    """Homographic-adaptation pseudo-labels for a directory of images."""
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = DetectorConfig(prob_threshold=threshold, nms_radius=nms_radius)
    images = ds.image_files(images_dir)
    if not images:
        raise click.ClickException(f"no images under {images_dir}")
    for i, path in enumerate(images):
        img = load_gray(path)
        dense, kps = pseudo_label(
            img, baseline_detect, n_homographies, rounds, ds.derived_rng(seed, i), cfg
        )
        ds.save_ground_truth(out_dir / path.name, kps)
        save_gray(out_dir / f"{path.stem}.heatmap.pgm", np.clip(dense, 0.0, 1.0))
    click.echo(f"labeled {len(images)} images into {out_dir}")


@main.command("eval")
@click.option("--dataset", "dataset_dir", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--detector", type=click.Choice(["baseline", "heatmap-files"]), default="baseline", show_default=True)
@click.option("--descriptor", type=click.Choice(["baseline", "grid-files"]), default="baseline", show_default=True)
@click.option("--eps", default=None, help="comma-separated pixel thresholds (default 3,5)")
@click.option("--preset", type=click.Choice(["standard", "wide"]), default="standard", show_default=True,
              help="wide = 5,10 px for higher reprojection error")
@click.option("--resize", default="320x320", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mutual/--no-mutual", default=True, show_default=True)
@click.option("--ratio", type=float, default=None, help="optional Lowe ratio test")
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None)
def eval_cmd(dataset_dir, detector, descriptor, eps, preset, resize, seed, mutual, ratio, report_path):
    """Run the detector/descriptor benchmark over a pair dataset."""
    if eps is not None:
        epsilons = tuple(float(e) for e in eps.split(","))
    else:
        epsilons = (5.0, 10.0) if preset == "wide" else (3.0, 5.0)
    w, h = _parse_size(resize)
    cfg = EvalConfig(epsilons=epsilons, resize_to=(w, h), seed=seed)
    report = run_benchmark(
        dataset_dir, detector=detector, descriptor=descriptor, cfg=cfg, mutual=mutual, ratio=ratio
    )
    click.echo(report.render_table())
    if report_path is not None:
        report_path.write_text(report.to_json(), encoding="utf-8")
        click.echo(f"report written to {report_path}")


@main.command("loss-check")
@click.option("--seed", type=int, default=0, show_default=True)
def loss_check(seed):
    """Check the loss implementations against independent oracles."""
    click.echo(f"kernel backend: {active_backend()}")
    failures = 0
    for name, passed, detail in oracle_suite(seed):
        status = "PASS" if passed else "FAIL"
        click.echo(f"[{status}] {name}: {detail}")
        failures += 0 if passed else 1
    if failures:
        sys.exit(1)


if __name__ == "__main__":
    main()
