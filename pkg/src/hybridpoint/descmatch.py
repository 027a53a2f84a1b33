"""Descriptor grids, pixel-wise bicubic interpolation, a classical patch
descriptor, and nearest-neighbor matching.

A descriptor grid assigns one unit vector (length 256) to each 8x8 cell;
pixel-wise descriptors come from Catmull-Rom bicubic interpolation over
the cell-centroid lattice, renormalized to unit length.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .detect import CELL, _check_dims
from .errors import EmptyInputError, ShapeMismatchError
from .keypoints import KeypointSet, MatchSet

DESCRIPTOR_DIM = 256
_PATCH_SIDE = 16  # baseline patch resampled to 16x16 = 256 taps


def canonical_descriptor(dim: int = DESCRIPTOR_DIM) -> np.ndarray:
    """Fixed unit vector assigned to structure-free (zero-variance) patches."""
    v = np.zeros(dim)
    v[0] = 1.0
    return v


def validate_descriptor_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 3:
        raise ShapeMismatchError("descriptor grid must be (h_c, w_c, dim)")
    norms = np.linalg.norm(grid, axis=2)
    if np.abs(norms - 1.0).max() > 1e-6:
        raise ShapeMismatchError("descriptor grid cells must be unit-norm")
    return grid


def _normalize_rows(vecs: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vecs, axis=1)
    out = vecs.copy()
    degenerate = norms < 1e-12
    if np.any(degenerate):
        out[degenerate] = canonical_descriptor(vecs.shape[1])
        norms = np.where(degenerate, 1.0, norms)
    return out / norms[:, None]


def interpolate_descriptors(grid: np.ndarray, points, w: int, h: int) -> np.ndarray:
    """Per-point descriptors by bicubic interpolation at (x, y) positions.

    The lattice node of cell (i, j) sits at its centroid
    (8j + 4, 8i + 4); border taps are clamped. Results are renormalized
    to unit length.
    """
    grid = validate_descriptor_grid(grid)
    hc, wc = grid.shape[:2]
    if (hc * CELL, wc * CELL) != (h, w):
        raise ShapeMismatchError(f"grid {wc}x{hc} does not tile a {w}x{h} image")
    xy = points.xy if isinstance(points, KeypointSet) else np.asarray(points, dtype=np.float64)
    xy = xy.reshape(-1, 2)
    if xy.shape[0] == 0:
        return np.zeros((0, grid.shape[2]))
    if np.any(xy[:, 0] < 0) or np.any(xy[:, 0] >= w) or np.any(xy[:, 1] < 0) or np.any(xy[:, 1] >= h):
        raise ValueError("query points must lie inside the image")
    gx = (xy[:, 0] - CELL / 2.0) / CELL
    gy = (xy[:, 1] - CELL / 2.0) / CELL
    vecs = kernels.interp_grid_bicubic(grid, gx, gy)
    return _normalize_rows(vecs)


def baseline_describe(img: np.ndarray) -> np.ndarray:
    """Patch descriptor grid: per cell, a bilinear-resampled 16x16 patch
    centered at the cell centroid, mean-subtracted, flattened and
    unit-normalized; zero patches map to the canonical vector."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    hc, wc = _check_dims(w, h)
    offsets = np.arange(_PATCH_SIDE, dtype=np.float64) - (_PATCH_SIDE - 1) / 2.0
    cx = (np.arange(wc, dtype=np.float64) * CELL + CELL / 2.0)[None, :, None, None]
    cy = (np.arange(hc, dtype=np.float64) * CELL + CELL / 2.0)[:, None, None, None]
    px = np.broadcast_to(cx + offsets[None, None, None, :], (hc, wc, _PATCH_SIDE, _PATCH_SIDE))
    py = np.broadcast_to(cy + offsets[None, None, :, None], (hc, wc, _PATCH_SIDE, _PATCH_SIDE))
    vals = kernels.bilinear_sample_clamped(img, px.ravel(), py.ravel())
    patches = vals.reshape(hc * wc, DESCRIPTOR_DIM)
    patches = patches - patches.mean(axis=1, keepdims=True)
    return _normalize_rows(patches).reshape(hc, wc, DESCRIPTOR_DIM)


def match_nn(desc_a, desc_b, mutual: bool = True, ratio: float | None = None) -> MatchSet:
    """Nearest-neighbor matching by maximum dot product.

    With `mutual` (default) only cross-consistent pairs survive. `ratio`
    optionally applies Lowe's test on unit-vector L2 distances.
    """
    a = np.atleast_2d(np.asarray(desc_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(desc_b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyInputError("both descriptor lists must be non-empty")
    sims = a @ b.T
    nn = np.argmax(sims, axis=1)
    best = sims[np.arange(a.shape[0]), nn]
    keep = np.ones(a.shape[0], dtype=bool)
    if ratio is not None and b.shape[0] >= 2:
        masked = sims.copy()
        masked[np.arange(a.shape[0]), nn] = -np.inf
        second = masked.max(axis=1)
        d1 = np.sqrt(np.maximum(2.0 - 2.0 * best, 0.0))
        d2 = np.sqrt(np.maximum(2.0 - 2.0 * second, 0.0))
        keep &= d1 <= ratio * d2
    if mutual:
        nn_b = np.argmax(sims, axis=0)
        keep &= nn_b[nn] == np.arange(a.shape[0])
    idx_a = np.nonzero(keep)[0]
    return MatchSet(idx_a, nn[idx_a], best[idx_a])
