"""Grayscale image and mask file IO (8-bit PNG and PGM).

Images live in memory as (h, w) float64 arrays in [0, 1]; color inputs
are reduced with ITU-R BT.601 luma weights.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

BT601 = np.array([0.299, 0.587, 0.114])


def to_gray(arr: np.ndarray) -> np.ndarray:
    """Normalize an array (uint8 or float, gray or RGB) to gray float64."""
    arr = np.asarray(arr)
    if arr.ndim == 3:
        arr = arr[..., :3].astype(np.float64) @ BT601
        if arr.max() > 1.0:
            arr = arr / 255.0
        return np.clip(arr, 0.0, 1.0)
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    return np.clip(arr.astype(np.float64), 0.0, 1.0)


def load_gray(path) -> np.ndarray:
    img = Image.open(path)
    return to_gray(np.asarray(img))


def save_gray(path, img: np.ndarray) -> None:
    data = np.clip(np.rint(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)
    pil = Image.fromarray(data, mode="L")
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        pil.save(path, format="PPM")
    else:
        pil.save(path)


def save_mask(path, mask: np.ndarray) -> None:
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def load_mask(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("L")) >= 128


def validate_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale array")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("intensities must be finite and within [0, 1]")
    return img
