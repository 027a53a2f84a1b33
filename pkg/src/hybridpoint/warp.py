"""Image synthesis: fisheye->perspective inverse warping, plain 2D
homographic warping, cube-map->fisheye rendering, and keypoint transfer.

All warps are inverse warps with bilinear interpolation: each output
pixel center is back-mapped into the source and sampled there. A pixel is
valid only when the back-map is defined and every nonzero-weight
interpolation tap is inside the source image; invalid pixels are zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backend import kernels
from .errors import ShapeMismatchError
from .homography import Homography, HybridMap, hybrid_forward_many, hybrid_inverse_many, inverse_grid, pixel_grid
from .imgio import load_gray, save_gray
from .keypoints import KeypointSet

CUBE_FACE_SUFFIXES = ("px", "nx", "py", "ny", "pz", "nz")


@dataclass(frozen=True, eq=False)
class CubeMap:
    """Six square 90-degree views ordered (+x, -x, +y, -y, +z, -z)."""

    faces: np.ndarray  # (6, m, m) float64

    def __post_init__(self):
        faces = np.asarray(self.faces, dtype=np.float64)
        if faces.ndim != 3 or faces.shape[0] != 6 or faces.shape[1] != faces.shape[2]:
            raise ShapeMismatchError("cube map needs six square faces of equal size")
        object.__setattr__(self, "faces", faces)

    @property
    def face_size(self) -> int:
        return self.faces.shape[1]

    @classmethod
    def from_arrays(cls, faces) -> "CubeMap":
        return cls(np.stack([np.asarray(f, dtype=np.float64) for f in faces]))

    @classmethod
    def load(cls, directory, stem: str = "face", ext: str = ".png") -> "CubeMap":
        directory = Path(directory)
        return cls.from_arrays(
            [load_gray(directory / f"{stem}_{suf}{ext}") for suf in CUBE_FACE_SUFFIXES]
        )

    def save(self, directory, stem: str = "face", ext: str = ".png") -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for face, suf in zip(self.faces, CUBE_FACE_SUFFIXES):
            save_gray(directory / f"{stem}_{suf}{ext}", face)


def _as_matrix(transform) -> np.ndarray:
    if isinstance(transform, Homography):
        return transform.m
    return Homography(np.asarray(transform, dtype=np.float64)).m


def synthesize_perspective(img: np.ndarray, hmap: HybridMap, out_w: int, out_h: int):
    """Render the perspective view of a fisheye image under a hybrid map.

    Returns (image (out_h, out_w), mask (out_h, out_w) bool).
    """
    img = np.asarray(img, dtype=np.float64)
    if img.shape != (hmap.fisheye.height, hmap.fisheye.width):
        raise ShapeMismatchError(
            f"image is {img.shape[1]}x{img.shape[0]} but the fisheye model is "
            f"{hmap.fisheye.width}x{hmap.fisheye.height}"
        )
    src, defined = inverse_grid(hmap, out_w, out_h)
    val, sup = kernels.bilinear_sample(img, src[:, 0], src[:, 1])
    mask = defined & sup
    out = np.where(mask, val, 0.0)
    return out.reshape(out_h, out_w), mask.reshape(out_h, out_w)


def warp_perspective(img: np.ndarray, transform, out_w: int, out_h: int):
    """Inverse-warp an image under a plain 2D homography on pixel coords."""
    img = np.asarray(img, dtype=np.float64)
    m = _as_matrix(transform)
    hinv = Homography(np.linalg.inv(m))
    src, defined = hinv.apply_points(pixel_grid(out_w, out_h))
    val, sup = kernels.bilinear_sample(img, src[:, 0], src[:, 1])
    mask = defined & sup
    out = np.where(mask, val, 0.0)
    return out.reshape(out_h, out_w), mask.reshape(out_h, out_w)


def cubemap_to_fisheye(cube: CubeMap, model):
    """Render a fisheye image by casting each in-FOV pixel's ray into the
    cube map (dominant-axis face selection, edge-clamped bilinear taps)."""
    from .camera import fisheye_unproject_many

    w, h = model.width, model.height
    rays, valid = fisheye_unproject_many(model, pixel_grid(w, h))
    out = np.zeros(w * h)
    if np.any(valid):
        out[valid] = kernels.cubemap_sample(cube.faces, rays[valid])
    return out.reshape(h, w), valid.reshape(h, w)


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Resize with bilinear interpolation (edge-clamped taps)."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if (w, h) == (out_w, out_h):
        return img.copy()
    grid = pixel_grid(out_w, out_h)
    xs = grid[:, 0] * (w / out_w)
    ys = grid[:, 1] * (h / out_h)
    return kernels.bilinear_sample_clamped(img, xs, ys).reshape(out_h, out_w)


def transfer_keypoints(
    kps: KeypointSet,
    transform,
    target_w: int,
    target_h: int,
    inverse: bool = False,
) -> KeypointSet:
    """Map keypoints through a hybrid map or plain homography, dropping
    points that leave the target bounds or the field of view."""
    if len(kps) == 0:
        return KeypointSet.empty()
    if isinstance(transform, HybridMap):
        if inverse:
            out, valid = hybrid_inverse_many(transform, kps.xy)
        else:
            out, valid = hybrid_forward_many(transform, kps.xy)
    else:
        m = _as_matrix(transform)
        hom = Homography(np.linalg.inv(m)) if inverse else Homography(m)
        out, valid = hom.apply_points(kps.xy)
    keep = (
        valid
        & (out[:, 0] >= 0.0)
        & (out[:, 0] < target_w)
        & (out[:, 1] >= 0.0)
        & (out[:, 1] < target_h)
    )
    return KeypointSet(out[keep], kps.scores[keep])
