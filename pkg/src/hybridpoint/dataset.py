"""Dataset file formats and pair generation.

An evaluation pair is described by a `*_map.json` file holding the full
hybrid map (fisheye calibration, pinhole intrinsics, H) plus the file
names of the two images. Heatmap and descriptor-grid sidecars use binary
little-endian float32 payloads with a small JSON header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyDatasetError, MissingCalibrationError, ShapeMismatchError
from .homography import HybridMap, SamplingRanges, sample
from .imgio import load_gray, save_gray
from .keypoints import KeypointSet
from .warp import resize_bilinear, synthesize_perspective

IMAGE_EXTENSIONS = (".png", ".pgm")


def image_files(directory) -> list:
    directory = Path(directory)
    out = [p for p in sorted(directory.iterdir()) if p.suffix.lower() in IMAGE_EXTENSIONS]
    return out


def derived_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent per-item stream: seed = base XOR index."""
    return np.random.default_rng(int(base_seed) ^ int(index))


# --- binary sidecar dumps ---------------------------------------------------


def _sidecar(path, kind: str, ext: str) -> Path:
    path = Path(path)
    return path.with_name(path.stem + f".{kind}{ext}")


def save_descriptor_grid(image_path, grid: np.ndarray) -> None:
    grid = np.asarray(grid, dtype=np.float64)
    hc, wc, dim = grid.shape
    header = {"h_c": hc, "w_c": wc, "dim": dim}
    _sidecar(image_path, "desc", ".json").write_text(
        json.dumps(header, sort_keys=True), encoding="utf-8"
    )
    grid.astype("<f4").tofile(_sidecar(image_path, "desc", ".bin"))


def load_descriptor_grid(image_path) -> np.ndarray:
    header = json.loads(_sidecar(image_path, "desc", ".json").read_text(encoding="utf-8"))
    data = np.fromfile(_sidecar(image_path, "desc", ".bin"), dtype="<f4")
    shape = (header["h_c"], header["w_c"], header["dim"])
    if data.size != np.prod(shape):
        raise ShapeMismatchError("descriptor payload does not match its header")
    grid = data.astype(np.float64).reshape(shape)
    norms = np.linalg.norm(grid, axis=2, keepdims=True)
    return grid / np.maximum(norms, 1e-12)  # re-unit after f32 rounding


def save_cell_heatmap(image_path, probs: np.ndarray) -> None:
    probs = np.asarray(probs, dtype=np.float64)
    hc, wc, ch = probs.shape
    header = {"h_c": hc, "w_c": wc, "channels": ch}
    _sidecar(image_path, "heatmap", ".json").write_text(
        json.dumps(header, sort_keys=True), encoding="utf-8"
    )
    probs.astype("<f4").tofile(_sidecar(image_path, "heatmap", ".bin"))


def load_cell_heatmap(image_path) -> np.ndarray:
    header = json.loads(_sidecar(image_path, "heatmap", ".json").read_text(encoding="utf-8"))
    data = np.fromfile(_sidecar(image_path, "heatmap", ".bin"), dtype="<f4")
    shape = (header["h_c"], header["w_c"], header["channels"])
    if data.size != np.prod(shape):
        raise ShapeMismatchError("heatmap payload does not match its header")
    probs = data.astype(np.float64).reshape(shape)
    return probs / probs.sum(axis=2, keepdims=True)  # re-normalize after f32 rounding


# --- evaluation pairs -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PairRecord:
    name: str
    fisheye_image: Path
    perspective_image: Path
    hmap: HybridMap


def save_pair_map(path, hmap: HybridMap, fisheye_image: str, perspective_image: str) -> None:
    data = hmap.to_dict()
    data["fisheye_image"] = fisheye_image
    data["perspective_image"] = perspective_image
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")


def load_pair_map(path) -> PairRecord:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    for key in ("fisheye", "pinhole", "H", "fisheye_image", "perspective_image"):
        if key not in data:
            raise MissingCalibrationError(f"{path.name} lacks required key {key!r}")
    return PairRecord(
        name=path.stem.removesuffix("_map"),
        fisheye_image=path.parent / data["fisheye_image"],
        perspective_image=path.parent / data["perspective_image"],
        hmap=HybridMap.from_dict(data),
    )


def discover_pairs(dataset_dir) -> list:
    dataset_dir = Path(dataset_dir)
    maps = sorted(dataset_dir.glob("*_map.json"))
    if not maps:
        raise EmptyDatasetError(f"no *_map.json pair files under {dataset_dir}")
    return [load_pair_map(p) for p in maps]


def make_pairs(
    fisheye_dir,
    fisheye_model,
    pinhole_model,
    out_dir,
    k: int = 5,
    seed: int = 0,
    ranges: SamplingRanges | None = None,
) -> list:
    """Sample k hybrid views per fisheye image and write an eval dataset.

    Produces {stem}_fisheye.png, {stem}_persp{j}.png and the matching
    {stem}_persp{j}_map.json records. Returns the pair names.
    """
    if ranges is None:
        ranges = SamplingRanges()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sources = image_files(fisheye_dir)
    if not sources:
        raise EmptyDatasetError(f"no {'/'.join(IMAGE_EXTENSIONS)} images under {fisheye_dir}")
    names = []
    for index, src in enumerate(sources):
        img = load_gray(src)
        if img.shape != (fisheye_model.height, fisheye_model.width):
            img = resize_bilinear(img, fisheye_model.width, fisheye_model.height)
        fish_name = f"{src.stem}_fisheye.png"
        save_gray(out_dir / fish_name, img)
        rng = derived_rng(seed, index)
        for j in range(1, k + 1):
            hmap = sample(rng, ranges, fisheye_model, pinhole_model)
            view, _ = synthesize_perspective(img, hmap, pinhole_model.width, pinhole_model.height)
            persp_name = f"{src.stem}_persp{j}.png"
            save_gray(out_dir / persp_name, view)
            save_pair_map(out_dir / f"{src.stem}_persp{j}_map.json", hmap, fish_name, persp_name)
            names.append(f"{src.stem}_persp{j}")
    return names


def ground_truth_sidecar(image_path) -> Path:
    return _sidecar(image_path, "keypoints", ".json")


def save_ground_truth(image_path, kps: KeypointSet) -> None:
    ground_truth_sidecar(image_path).write_text(
        json.dumps(kps.to_dict(), sort_keys=True), encoding="utf-8"
    )


def load_ground_truth(image_path) -> KeypointSet:
    return KeypointSet.from_dict(
        json.loads(ground_truth_sidecar(image_path).read_text(encoding="utf-8"))
    )
