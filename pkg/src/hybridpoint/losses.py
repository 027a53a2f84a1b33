"""Detection and descriptor losses as pure, oracle-checkable functions.

The detection loss is the mean per-cell cross-entropy between 65-way
logits and label grids. The descriptor loss is a temperature-scaled
contrastive objective: for every fisheye cell whose centroid maps inside
the paired perspective image, the cell it lands in provides the positive
and every other perspective cell a negative. Both use log-sum-exp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detect import CELL, N_CHANNELS
from .errors import EmptyInputError, EmptyOverlapError, ShapeMismatchError
from .homography import HybridMap, hybrid_forward_many


@dataclass(frozen=True)
class LossConfig:
    gamma: float = 0.001
    tau: float = 0.15
    k_views: int = 5

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.gamma < 0.0:
            raise ValueError("gamma must be non-negative")
        if self.k_views < 1:
            raise ValueError("k_views must be at least 1")


def _logsumexp(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(x - m), axis=axis))


def detection_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean cross-entropy over all cells, computed via log-sum-exp."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 3 or logits.shape[2] != N_CHANNELS:
        raise ShapeMismatchError("logits must be (h_c, w_c, 65)")
    if labels.shape != logits.shape[:2]:
        raise ShapeMismatchError("label grid shape must match the logits grid")
    if labels.min() < 0 or labels.max() >= N_CHANNELS:
        raise ValueError("labels must lie in [0, 64]")
    lse = _logsumexp(logits, axis=2)
    picked = np.take_along_axis(logits, labels[..., None], axis=2)[..., 0]
    return float(np.mean(lse - picked))


def detection_loss_total(fisheye_pair, view_pairs) -> float:
    """Fisheye term plus the mean of the K perspective-view terms."""
    if not view_pairs:
        raise EmptyInputError("at least one perspective view is required")
    total = detection_loss(*fisheye_pair)
    k = len(view_pairs)
    view_sum = sum(detection_loss(logits, labels) for logits, labels in view_pairs)
    return float(total + view_sum / k)


def descriptor_pair_loss(
    d_fisheye: np.ndarray,
    d_perspective: np.ndarray,
    hmap: HybridMap,
    tau: float,
) -> float:
    """Contrastive loss for one fisheye/perspective grid pair.

    Averaged over the fisheye cells whose centroid maps inside the
    perspective image: -log softmax(sim(positive) / tau) against all
    perspective cells. A centroid landing exactly on a cell boundary
    belongs to the higher-index cell (floor division).
    """
    from .descmatch import validate_descriptor_grid

    if tau <= 0.0:
        raise ValueError("tau must be positive")
    d_fisheye = validate_descriptor_grid(d_fisheye)
    d_perspective = validate_descriptor_grid(d_perspective)
    hc_f, wc_f = d_fisheye.shape[:2]
    hc_p, wc_p = d_perspective.shape[:2]
    if (hc_f * CELL, wc_f * CELL) != (hmap.fisheye.height, hmap.fisheye.width):
        raise ShapeMismatchError("fisheye grid does not tile the fisheye model")
    if (hc_p * CELL, wc_p * CELL) != (hmap.pinhole.height, hmap.pinhole.width):
        raise ShapeMismatchError("perspective grid does not tile the pinhole model")

    jj, ii = np.meshgrid(np.arange(wc_f), np.arange(hc_f))
    centroids = np.stack(
        [jj.ravel() * CELL + CELL / 2.0, ii.ravel() * CELL + CELL / 2.0], axis=1
    ).astype(np.float64)
    mapped, valid = hybrid_forward_many(hmap, centroids)
    w_p, h_p = hmap.pinhole.width, hmap.pinhole.height
    inside = (
        valid
        & (mapped[:, 0] >= 0.0)
        & (mapped[:, 0] < w_p)
        & (mapped[:, 1] >= 0.0)
        & (mapped[:, 1] < h_p)
    )
    if not np.any(inside):
        raise EmptyOverlapError("no fisheye centroid maps inside the perspective image")
    anchors = d_fisheye.reshape(-1, d_fisheye.shape[2])[inside]
    pos_j = np.floor(mapped[inside, 0] / CELL).astype(np.int64)
    pos_i = np.floor(mapped[inside, 1] / CELL).astype(np.int64)
    pos_flat = pos_i * wc_p + pos_j
    bank = d_perspective.reshape(-1, d_perspective.shape[2])
    sims = anchors @ bank.T / tau
    lse = _logsumexp(sims, axis=1)
    pos = sims[np.arange(sims.shape[0]), pos_flat]
    return float(np.mean(lse - pos))


def total_loss(det: float, des: float, cfg: LossConfig) -> float:
    """Detection plus gamma-weighted descriptor loss."""
    return float(det + cfg.gamma * des)


# --- self-check oracle suite (loss-check CLI) --------------------------------


def _aligned_identity_map(cells: int):
    """Hybrid map that is exactly the identity on pixel coordinates:
    constant-phi fisheye (a0) paired with a pinhole of focal a0."""
    from .camera import FisheyeModel, PinholeModel
    from .homography import Homography

    side = cells * CELL
    half = side / 2.0
    fisheye = FisheyeModel(
        coeffs=[100.0, 0.0, 0.0, 0.0],
        affine_a=np.eye(2),
        affine_t=[-half, -half],
        width=side,
        height=side,
        fov_radius=half * 1.5,
    )
    pinhole = PinholeModel(fx=100.0, fy=100.0, cx=half, cy=half, skew=0.0, width=side, height=side)
    return HybridMap(fisheye=fisheye, pinhole=pinhole, h=Homography.identity())


def _brute_force_detection(logits, labels):
    p = np.exp(logits) / np.sum(np.exp(logits), axis=2, keepdims=True)
    hc, wc = labels.shape
    total = 0.0
    for i in range(hc):
        for j in range(wc):
            total += -np.log(p[i, j, labels[i, j]])
    return total / (hc * wc)


def _brute_force_descriptor_identity(d_fish, d_persp, tau):
    hc, wc = d_fish.shape[:2]
    bank = d_persp.reshape(-1, d_persp.shape[2])
    total = 0.0
    for i in range(hc):
        for j in range(wc):
            anchor = d_fish[i, j]
            sims = np.exp(bank @ anchor / tau)
            total += -np.log(sims[i * wc + j] / sims.sum())
    return total / (hc * wc)


def _random_unit_grid(rng, cells, dim=32):
    g = rng.normal(size=(cells, cells, dim))
    return g / np.linalg.norm(g, axis=2, keepdims=True)


def oracle_suite(seed: int = 0):
    """Verify the losses against independent brute-force oracles.

    Yields (name, passed, detail) triples; used by the loss-check CLI.
    """
    results = []
    rng = np.random.default_rng(seed)

    uniform = detection_loss(np.zeros((4, 4, N_CHANNELS)), np.full((4, 4), 7))
    expected = float(np.log(N_CHANNELS))
    results.append(
        ("detection_loss(uniform) == ln 65", abs(uniform - expected) < 1e-6,
         f"got {uniform:.9f}, expected {expected:.9f}")
    )

    cells = 4
    hmap = _aligned_identity_map(cells)
    n = cells * cells
    eye = np.eye(256)[:n].reshape(cells, cells, 256)
    for tau in (0.15, 1.0):
        loss = descriptor_pair_loss(eye, eye, hmap, tau)
        closed = -np.log(np.exp(1.0 / tau) / (np.exp(1.0 / tau) + n - 1))
        results.append(
            (f"descriptor closed form (tau={tau})", abs(loss - closed) < 1e-6,
             f"got {loss:.9f}, expected {closed:.9f}")
        )

    worst_det = 0.0
    worst_des = 0.0
    for _ in range(25):
        logits = rng.normal(scale=3.0, size=(4, 4, N_CHANNELS))
        labels = rng.integers(0, N_CHANNELS, size=(4, 4))
        worst_det = max(worst_det, abs(detection_loss(logits, labels) - _brute_force_detection(logits, labels)))
        gf = _random_unit_grid(rng, cells)
        gp = _random_unit_grid(rng, cells)
        got = descriptor_pair_loss(_pad_grid(gf), _pad_grid(gp), hmap, 0.15)
        ref = _brute_force_descriptor_identity(gf, gp, 0.15)
        worst_des = max(worst_des, abs(got - ref))
    results.append(("detection_loss vs brute force (25 seeds)", worst_det < 1e-9, f"max |diff| {worst_det:.2e}"))
    results.append(("descriptor_pair_loss vs brute force (25 seeds)", worst_des < 1e-9, f"max |diff| {worst_des:.2e}"))
    return results


def _pad_grid(grid, dim: int = 256):
    """Embed a low-dimensional unit grid into `dim` dims (zero padding)."""
    hc, wc, d = grid.shape
    out = np.zeros((hc, wc, dim))
    out[:, :, :d] = grid
    return out
