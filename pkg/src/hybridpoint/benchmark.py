"""Benchmark orchestration: detect, describe, match and score over a
dataset of fisheye/perspective pairs.

Detectors and descriptors are pluggable. The string choices are
  detector:   "baseline" (corner heatmap) | "heatmap-files" (sidecars)
  descriptor: "baseline" (patch grid)     | "grid-files"    (sidecars)
File-based choices read `<image>.heatmap.*` / `<image>.desc.*` sidecars
produced at the evaluation resolution. Callables receive
(image, detector_cfg, image_path) and (image, keypoints, image_path).
"""

from __future__ import annotations

import numpy as np

from . import dataset as ds
from .camera import FisheyeModel, PinholeModel
from .descmatch import baseline_describe, interpolate_descriptors, match_nn
from .detect import DetectorConfig, baseline_detect, decode_detections
from .errors import EmptyInputError
from .homography import HybridMap
from .imgio import load_gray
from .keypoints import KeypointSet, MatchSet
from .metrics import (
    REPEATABILITY_FORMULA,
    EvalConfig,
    MetricsReport,
    mean_matching_score,
    repeatability,
)
from .warp import resize_bilinear


def rescale_hybrid_map(hmap: HybridMap, new_w: int, new_h: int) -> HybridMap:
    """Fold an image resize into the calibration (A, t and K scale; H is
    untouched since it acts on ray coordinates)."""
    fe, ph = hmap.fisheye, hmap.pinhole
    sx_f = fe.width / new_w
    sy_f = fe.height / new_h
    fisheye = FisheyeModel(
        coeffs=fe.coeffs,
        affine_a=fe.affine_a @ np.diag([sx_f, sy_f]),
        affine_t=fe.affine_t,
        width=new_w,
        height=new_h,
        fov_radius=fe.fov_radius,
    )
    sx_p = new_w / ph.width
    sy_p = new_h / ph.height
    pinhole = PinholeModel(
        fx=ph.fx * sx_p,
        fy=ph.fy * sy_p,
        cx=ph.cx * sx_p,
        cy=ph.cy * sy_p,
        skew=ph.skew * sx_p,
        width=new_w,
        height=new_h,
    )
    return HybridMap(fisheye=fisheye, pinhole=pinhole, h=hmap.h)


def _resolve_detector(choice):
    if choice == "baseline":
        return lambda img, cfg, path: decode_detections(baseline_detect(img), cfg)
    if choice == "heatmap-files":
        return lambda img, cfg, path: decode_detections(ds.load_cell_heatmap(path), cfg)
    if callable(choice):
        return choice
    raise ValueError(f"unknown detector choice {choice!r}")


def _resolve_descriptor(choice):
    if choice == "baseline":
        def describe(img, kps, path):
            grid = baseline_describe(img)
            return interpolate_descriptors(grid, kps, img.shape[1], img.shape[0])

        return describe
    if choice == "grid-files":
        def describe(img, kps, path):
            grid = ds.load_descriptor_grid(path)
            return interpolate_descriptors(grid, kps, img.shape[1], img.shape[0])

        return describe
    if callable(choice):
        return choice
    raise ValueError(f"unknown descriptor choice {choice!r}")


def run_benchmark(
    dataset_dir,
    detector="baseline",
    descriptor="baseline",
    cfg: EvalConfig | None = None,
    detector_cfg: DetectorConfig | None = None,
    mutual: bool = True,
    ratio: float | None = None,
) -> MetricsReport:
    """Evaluate a detector/descriptor over every pair of a dataset.

    Per pair: resize both images (and the map) to cfg.resize_to, detect
    with the per-view keypoint budget, describe, nearest-neighbor match,
    then score repeatability and mean matching score at each epsilon.
    Scores are averaged over pairs in dataset order; everything is
    deterministic for a fixed cfg.
    """
    if cfg is None:
        cfg = EvalConfig()
    base_cfg = detector_cfg if detector_cfg is not None else DetectorConfig()
    detect_fn = _resolve_detector(detector)
    describe_fn = _resolve_descriptor(descriptor)
    pairs = ds.discover_pairs(dataset_dir)
    w, h = cfg.resize_to
    cfg_fisheye = DetectorConfig(base_cfg.prob_threshold, base_cfg.nms_radius, cfg.top_k_fisheye)
    cfg_persp = DetectorConfig(base_cfg.prob_threshold, base_cfg.nms_radius, cfg.top_k_perspective)

    rep_sums = {eps: 0.0 for eps in cfg.epsilons}
    mms_sums = {eps: 0.0 for eps in cfg.epsilons}
    match_sum = 0.0
    for pair in pairs:
        fish = resize_bilinear(load_gray(pair.fisheye_image), w, h)
        persp = resize_bilinear(load_gray(pair.perspective_image), w, h)
        hmap = rescale_hybrid_map(pair.hmap, w, h)
        kps_f = detect_fn(fish, cfg_fisheye, pair.fisheye_image)
        kps_p = detect_fn(persp, cfg_persp, pair.perspective_image)
        if len(kps_f) and len(kps_p):
            desc_f = describe_fn(fish, kps_f, pair.fisheye_image)
            desc_p = describe_fn(persp, kps_p, pair.perspective_image)
            try:
                matches = match_nn(desc_f, desc_p, mutual=mutual, ratio=ratio)
            except EmptyInputError:
                matches = MatchSet.empty()
        else:
            matches = MatchSet.empty()
        match_sum += len(matches)
        for eps in cfg.epsilons:
            rep_sums[eps] += repeatability(kps_f, kps_p, hmap, eps)
            mms_sums[eps] += mean_matching_score(matches, kps_f, kps_p, hmap, eps)

    n = len(pairs)
    return MetricsReport(
        repeatability={eps: rep_sums[eps] / n for eps in cfg.epsilons},
        matching_score={eps: mms_sums[eps] / n for eps in cfg.epsilons},
        avg_matches=match_sum / n,
        pair_count=n,
        config=cfg.to_dict(),
        metadata={
            "detector": detector if isinstance(detector, str) else "custom",
            "descriptor": descriptor if isinstance(descriptor, str) else "custom",
            "matching": {"mutual": mutual, "ratio": ratio},
            "repeatability_formula": REPEATABILITY_FORMULA,
            "detector_config": {
                "prob_threshold": base_cfg.prob_threshold,
                "nms_radius": base_cfg.nms_radius,
            },
        },
    )
