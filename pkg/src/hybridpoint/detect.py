"""Cell-grid detection representation, a classical baseline detector, and
homographic-adaptation pseudo-labeling.

Images are split into disjoint 8x8 cells. A cell heatmap is an
(h/8, w/8, 65) probability array: channels 0..63 address the in-cell
pixel at row-major index (y % 8) * 8 + (x % 8), channel 64 is the
"no interest point" bin. Label grids store the chosen channel per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import DimensionNotMultipleOf8Error, ShapeMismatchError
from .homography import Homography, SamplingRanges, sample_pixel_homography
from .keypoints import KeypointSet
from .warp import warp_perspective

CELL = 8
N_CHANNELS = 65
BIN_CHANNEL = 64


@dataclass(frozen=True)
class DetectorConfig:
    prob_threshold: float = 0.015
    nms_radius: float = 4.0
    top_k: int = 1000

    def __post_init__(self):
        if not (0.0 < self.prob_threshold < 1.0):
            raise ValueError("prob_threshold must lie in (0, 1)")
        if self.nms_radius < 0.0:
            raise ValueError("nms_radius must be non-negative")
        if self.top_k < 1:
            raise ValueError("top_k must be positive")


def _check_dims(w: int, h: int) -> tuple[int, int]:
    if w % CELL or h % CELL:
        raise DimensionNotMultipleOf8Error(f"dimensions {w}x{h} are not multiples of {CELL}")
    return h // CELL, w // CELL


def validate_cell_heatmap(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 3 or probs.shape[2] != N_CHANNELS:
        raise ShapeMismatchError("cell heatmap must be (h_c, w_c, 65)")
    if probs.min() < 0.0 or np.abs(probs.sum(axis=2) - 1.0).max() > 1e-6:
        raise ShapeMismatchError("cell distributions must be non-negative and sum to 1")
    return probs


def encode_labels(kps: KeypointSet, w: int, h: int, rng: np.random.Generator) -> np.ndarray:
    """Build the per-cell label grid from keypoints.

    A cell containing one keypoint stores its in-cell pixel index; when
    several fall in one cell a single one is picked with the given rng
    (cells visited in row-major order). Empty cells store 64.
    """
    hc, wc = _check_dims(w, h)
    labels = np.full((hc, wc), BIN_CHANNEL, dtype=np.int64)
    if len(kps) == 0:
        return labels
    ix = np.floor(kps.xy[:, 0]).astype(np.int64)
    iy = np.floor(kps.xy[:, 1]).astype(np.int64)
    inb = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    ix, iy = ix[inb], iy[inb]
    cell = (iy // CELL) * wc + ix // CELL
    chan = (iy % CELL) * CELL + ix % CELL
    order = np.argsort(cell, kind="stable")
    cell, chan = cell[order], chan[order]
    start = 0
    n = cell.shape[0]
    while start < n:
        stop = start
        while stop < n and cell[stop] == cell[start]:
            stop += 1
        pick = start if stop - start == 1 else start + int(rng.integers(stop - start))
        labels[cell[start] // wc, cell[start] % wc] = chan[pick]
        start = stop
    return labels


def one_hot_labels(labels: np.ndarray) -> np.ndarray:
    """Turn a label grid into a one-hot cell heatmap."""
    labels = np.asarray(labels, dtype=np.int64)
    probs = np.zeros(labels.shape + (N_CHANNELS,))
    hc, wc = labels.shape
    probs[np.arange(hc)[:, None], np.arange(wc)[None, :], labels] = 1.0
    return probs


def scatter_heatmap(probs: np.ndarray) -> np.ndarray:
    """Drop the bin channel and scatter cell channels to a dense (h, w) map."""
    probs = np.asarray(probs, dtype=np.float64)
    hc, wc = probs.shape[:2]
    t = probs[:, :, :BIN_CHANNEL].reshape(hc, wc, CELL, CELL)
    return t.transpose(0, 2, 1, 3).reshape(hc * CELL, wc * CELL)


def pack_dense(dense: np.ndarray) -> np.ndarray:
    """Inverse of scatter: gather a dense map into (h_c, w_c, 64) cells."""
    h, w = dense.shape
    hc, wc = _check_dims(w, h)
    return dense.reshape(hc, CELL, wc, CELL).transpose(0, 2, 1, 3).reshape(hc, wc, CELL * CELL)


def extract_keypoints_dense(dense: np.ndarray, cfg: DetectorConfig) -> KeypointSet:
    """Threshold, greedy NMS by descending score, keep top_k."""
    dense = np.asarray(dense, dtype=np.float64)
    ys, xs = np.nonzero(dense >= cfg.prob_threshold)
    if xs.size == 0:
        return KeypointSet.empty()
    scores = dense[ys, xs]
    order = np.argsort(-scores, kind="stable")  # ties fall back to row-major pixel order
    xs = xs[order].astype(np.float64) + 0.5
    ys = ys[order].astype(np.float64) + 0.5
    scores = scores[order]
    keep = kernels.greedy_nms(xs, ys, cfg.nms_radius)
    xs, ys, scores = xs[keep], ys[keep], scores[keep]
    if xs.shape[0] > cfg.top_k:
        xs, ys, scores = xs[: cfg.top_k], ys[: cfg.top_k], scores[: cfg.top_k]
    return KeypointSet(np.stack([xs, ys], axis=1), scores)


def decode_detections(probs: np.ndarray, cfg: DetectorConfig) -> KeypointSet:
    """Keypoints from a cell heatmap: scatter, threshold, NMS, budget."""
    return extract_keypoints_dense(scatter_heatmap(validate_cell_heatmap(probs)), cfg)


def baseline_detect(img: np.ndarray) -> np.ndarray:
    """Classical corner detector as a cell heatmap.

    Minimum eigenvalue of the 5x5-windowed structure tensor over 3x3
    Sobel gradients, normalized to [0, 1] per image; each cell becomes a
    65-way distribution with bin mass 1 - max in-cell response.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    _check_dims(w, h)
    resp = kernels.shi_tomasi_response(img)
    mx = resp.max()
    if mx > 0.0:
        resp = resp / mx
    cells = pack_dense(resp)
    bin_mass = 1.0 - cells.max(axis=2)
    probs = np.concatenate([cells, bin_mass[..., None]], axis=2)
    return probs / probs.sum(axis=2, keepdims=True)


def dense_response(detector_output: np.ndarray) -> np.ndarray:
    """Accept either a cell heatmap or an already-dense (h, w) map."""
    out = np.asarray(detector_output, dtype=np.float64)
    if out.ndim == 3:
        return scatter_heatmap(validate_cell_heatmap(out))
    if out.ndim == 2:
        return out
    raise ShapeMismatchError("detector output must be (h_c, w_c, 65) or (h, w)")


def splat_keypoints(kps: KeypointSet, w: int, h: int) -> np.ndarray:
    """Dense score map with each keypoint's score at its pixel."""
    dense = np.zeros((h, w))
    if len(kps):
        ix = np.clip(np.floor(kps.xy[:, 0]).astype(np.int64), 0, w - 1)
        iy = np.clip(np.floor(kps.xy[:, 1]).astype(np.int64), 0, h - 1)
        np.maximum.at(dense, (iy, ix), kps.scores)
    return dense


IGNORE_SUPPORT = 3  # Sobel (1 px) + 5x5 window (2 px) receptive field


def erode_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Chebyshev erosion; pixels outside the image count as invalid."""
    if radius <= 0:
        return mask
    h, w = mask.shape
    padded = np.zeros((h + 2 * radius, w + 2 * radius), dtype=bool)
    padded[radius : radius + h, radius : radius + w] = mask
    out = np.ones((h, w), dtype=bool)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            out &= padded[dy : dy + h, dx : dx + w]
    return out


def _aggregate_over_warps(w, h, homographies, respond, aggregation, support_radius):
    acc = np.zeros((h, w))
    cnt = np.zeros((h, w))
    for hom in homographies:
        resp, mask = respond(hom)
        # responses whose receptive field touches invalid pixels are garbage
        mask = erode_mask(mask, support_radius)
        resp = resp * mask
        hinv = hom.inverse()
        back, sup = warp_perspective(resp, hinv, w, h)
        mfloat, msup = warp_perspective(mask.astype(np.float64), hinv, w, h)
        vis = sup & msup & (mfloat >= 1.0 - 1e-9)
        contrib = np.where(vis, back, 0.0)
        if aggregation == "max":
            acc = np.maximum(acc, contrib)
        else:
            acc += contrib
        cnt += vis
    if aggregation == "max":
        return acc, cnt
    return acc / np.maximum(cnt, 1.0), cnt


def homographic_adaptation(
    img: np.ndarray,
    detector,
    n: int,
    rng: np.random.Generator,
    cfg: DetectorConfig,
    ranges: SamplingRanges | None = None,
    aggregation: str = "mean",
    support_radius: int = IGNORE_SUPPORT,
):
    """Aggregate a detector over n random warps of one image.

    The first homography is always the identity. Each run detects on the
    warped image, scatters to a dense map, pulls the map back through the
    inverse warp, and masks invisible pixels; aggregated values divide by
    per-pixel visibility counts (or take the max with aggregation="max").
    Each warp's valid mask is eroded by `support_radius` so responses
    contaminated by the warp boundary never enter the aggregate.

    Returns (dense aggregate (h, w), pseudo-label KeypointSet).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if aggregation not in ("mean", "max"):
        raise ValueError("aggregation must be 'mean' or 'max'")
    if ranges is None:
        ranges = SamplingRanges.adaptation_default()
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    homs = [Homography.identity()]
    homs += [sample_pixel_homography(rng, w, h, ranges) for _ in range(n - 1)]

    def respond(hom):
        warped, mask = warp_perspective(img, hom, w, h)
        return dense_response(detector(warped)), mask

    agg, _ = _aggregate_over_warps(w, h, homs, respond, aggregation, support_radius)
    return agg, extract_keypoints_dense(agg, cfg)


def pseudo_label(
    img: np.ndarray,
    detector,
    n: int,
    rounds: int,
    rng: np.random.Generator,
    cfg: DetectorConfig,
    ranges: SamplingRanges | None = None,
    aggregation: str = "mean",
):
    """Repeated homographic adaptation.

    Round 1 adapts the detector; with a non-learning baseline there is
    nothing to retrain, so each later round re-labels from the previous
    round's keypoints: their splatted score map is pushed through fresh
    warps and re-aggregated.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if ranges is None:
        ranges = SamplingRanges.adaptation_default()
    agg, kps = homographic_adaptation(img, detector, n, rng, cfg, ranges, aggregation)
    for _ in range(rounds - 1):
        base = splat_keypoints(kps, w, h)
        homs = [Homography.identity()]
        homs += [sample_pixel_homography(rng, w, h, ranges) for _ in range(n - 1)]

        def respond(hom):
            return warp_perspective(base, hom, w, h)

        # splatted labels have no receptive field, so no support erosion
        agg, _ = _aggregate_over_warps(w, h, homs, respond, aggregation, 0)
        kps = extract_keypoints_dense(agg, cfg)
    return agg, kps
