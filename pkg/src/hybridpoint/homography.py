"""Planar homography algebra, the five-factor random sampler, and the
hybrid fisheye<->perspective pixel map.

The hybrid map chains: fisheye pixel -> sensor ray (u, v, phi) -> H ->
perspective ray -> pinhole intrinsics -> perspective pixel. H acts on the
ray's projective coordinates, so the same 3x3 machinery also serves plain
2D pixel warps (homogeneous coordinate 1 instead of phi).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backend import kernels
from .camera import (
    FisheyeModel,
    PinholeModel,
    fisheye_project,
    fisheye_project_many,
    fisheye_unproject,
    fisheye_unproject_many,
    pinhole_project,
    pinhole_project_many,
    pinhole_unproject,
    pinhole_unproject_many,
)
from .errors import (
    BehindCameraError,
    DegenerateHomographyError,
    RejectionExhaustedError,
)

_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 invertible matrix, normalized so results are comparable.

    The bottom-right entry is scaled to 1 when its magnitude exceeds
    1e-12, otherwise the matrix is scaled to unit Frobenius norm.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64).reshape(3, 3).copy()
        if abs(m[2, 2]) > _EPS:
            m = m / m[2, 2]
        else:
            m = m / np.linalg.norm(m)
        if abs(np.linalg.det(m)) <= _EPS:
            raise DegenerateHomographyError("homography is not invertible")
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def __matmul__(self, other: "Homography") -> "Homography":
        return Homography(self.m @ other.m)

    def apply_points(self, xy: np.ndarray):
        """Apply to 2D points in homogeneous form. Returns (out, valid)."""
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        p = self.m[:, 0][None, :] * xy[:, 0:1] + self.m[:, 1][None, :] * xy[:, 1:2] + self.m[:, 2][None, :]
        den = p[:, 2]
        valid = np.abs(den) > _EPS
        safe = np.where(valid, den, 1.0)
        return p[:, :2] / safe[:, None], valid

    def to_list(self) -> list:
        return self.m.tolist()


@dataclass(frozen=True)
class HomographyParams:
    """Raw entries of the five factor matrices."""

    a: float = 0.0
    s_x: float = 1.0
    s_y: float = 1.0
    k_x: float = 0.0
    k_y: float = 0.0
    h_x: float = 0.0
    h_y: float = 0.0
    t_x: float = 0.0
    t_y: float = 0.0

    def __post_init__(self):
        if self.s_x <= 0.0 or self.s_y <= 0.0:
            raise ValueError("scales must be positive")

    @classmethod
    def neutral(cls) -> "HomographyParams":
        return cls()


def factor(params: HomographyParams):
    """The five factor matrices (rotation, scale, skew, plane shear, translation)."""
    c, s = np.cos(params.a), np.sin(params.a)
    h_r = Homography([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    h_s = Homography([[params.s_x, 0.0, 0.0], [0.0, params.s_y, 0.0], [0.0, 0.0, 1.0]])
    h_k = Homography([[1.0, params.k_x, 0.0], [params.k_y, 1.0, 0.0], [0.0, 0.0, 1.0]])
    h_h = Homography([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [params.h_x, params.h_y, 1.0]])
    h_t = Homography([[1.0, 0.0, params.t_x], [0.0, 1.0, params.t_y], [0.0, 0.0, 1.0]])
    return h_r, h_s, h_k, h_h, h_t


def compose(params: HomographyParams) -> Homography:
    """Product of the five factors, in rotation-first order."""
    h_r, h_s, h_k, h_h, h_t = factor(params)
    return Homography(h_r.m @ h_s.m @ h_k.m @ h_h.m @ h_t.m)


_RANGE_FIELDS = ("a", "s_x", "s_y", "k_x", "k_y", "h_x", "h_y", "t_x", "t_y")
_NEUTRAL = {f: (1.0 if f.startswith("s_") else 0.0) for f in _RANGE_FIELDS}


@dataclass(frozen=True)
class SamplingRanges:
    """Closed intervals for the dimensionless factor parameters.

    Translations and plane-shear heights are expressed per unit of the
    target frame's length scale; `draw_params` converts them to matrix
    entries. Every interval must contain its neutral value so collapsed
    ranges reproduce the identity.
    """

    a: tuple = (-np.pi / 6, np.pi / 6)
    s_x: tuple = (0.7, 1.3)
    s_y: tuple = (0.7, 1.3)
    k_x: tuple = (-0.2, 0.2)
    k_y: tuple = (-0.2, 0.2)
    h_x: tuple = (-0.3, 0.3)
    h_y: tuple = (-0.3, 0.3)
    t_x: tuple = (-0.2, 0.2)
    t_y: tuple = (-0.2, 0.2)
    max_rejections: int = 50

    def __post_init__(self):
        for name in _RANGE_FIELDS:
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"range {name} is inverted")
            if not (lo <= _NEUTRAL[name] <= hi):
                raise ValueError(f"range {name} must contain its neutral value {_NEUTRAL[name]}")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be at least 1")

    @classmethod
    def neutral(cls) -> "SamplingRanges":
        kw = {f: (_NEUTRAL[f], _NEUTRAL[f]) for f in _RANGE_FIELDS}
        return cls(**kw)

    @classmethod
    def adaptation_default(cls) -> "SamplingRanges":
        """Half-strength ranges for homographic-adaptation warps: strong
        warps smear the unwarped detector response and drift pseudo-label
        positions by more than a pixel."""
        return cls(
            a=(-np.pi / 12, np.pi / 12),
            s_x=(0.85, 1.15),
            s_y=(0.85, 1.15),
            k_x=(-0.1, 0.1),
            k_y=(-0.1, 0.1),
            h_x=(-0.15, 0.15),
            h_y=(-0.15, 0.15),
            t_x=(-0.1, 0.1),
            t_y=(-0.1, 0.1),
        )

    @classmethod
    def from_config(cls, cfg: dict) -> "SamplingRanges":
        kw = {}
        for name in _RANGE_FIELDS:
            if name in cfg:
                lo, hi = cfg[name]
                kw[name] = (float(lo), float(hi))
        if "max_rejections" in cfg:
            kw["max_rejections"] = int(cfg["max_rejections"])
        return cls(**kw)

    def to_config(self) -> dict:
        out = {f: list(getattr(self, f)) for f in _RANGE_FIELDS}
        out["max_rejections"] = self.max_rejections
        return out


def load_ranges(path) -> SamplingRanges:
    """Read the `homography.ranges` section of a TOML or JSON config."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ImportError:
            import tomli as tomllib
        with open(path, "rb") as f:
            data = tomllib.load(f)
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
    section = data.get("homography", {}).get("ranges", data)
    return SamplingRanges.from_config(section)


def draw_params(
    rng: np.random.Generator,
    ranges: SamplingRanges,
    length_scale: float = 1.0,
    depth_scale: float = 1.0,
) -> HomographyParams:
    """Draw factor parameters for a frame with the given coordinate scales.

    `length_scale` is the typical in-plane coordinate magnitude (half
    image extent for pixel frames, fov_radius for fisheye sensor frames);
    `depth_scale` the magnitude of the homogeneous third coordinate (1
    for pixel points, a0 for fisheye rays). Translation entries scale by
    length/depth so the induced point shift is the drawn fraction of the
    length scale; shear entries scale inversely.
    """
    draws = {f: float(rng.uniform(*getattr(ranges, f))) for f in _RANGE_FIELDS}
    for f in ("t_x", "t_y"):
        draws[f] *= length_scale / depth_scale
    for f in ("h_x", "h_y"):
        draws[f] *= depth_scale / length_scale
    return HomographyParams(**draws)


def sample_pixel_homography(
    rng: np.random.Generator,
    w: int,
    h: int,
    ranges: SamplingRanges | None = None,
) -> Homography:
    """Random plain 2D homography acting on pixel coordinates about the
    image center (used for homographic adaptation warps)."""
    if ranges is None:
        ranges = SamplingRanges()
    params = draw_params(rng, ranges, length_scale=min(w, h) / 2.0, depth_scale=1.0)
    core = compose(params)
    t_c = np.array([[1.0, 0.0, w / 2.0], [0.0, 1.0, h / 2.0], [0.0, 0.0, 1.0]])
    t_ci = np.array([[1.0, 0.0, -w / 2.0], [0.0, 1.0, -h / 2.0], [0.0, 0.0, 1.0]])
    return Homography(t_c @ core.m @ t_ci)


@dataclass(frozen=True, eq=False)
class HybridMap:
    """Fisheye model + pinhole model + planar homography H."""

    fisheye: FisheyeModel
    pinhole: PinholeModel
    h: Homography

    def to_dict(self) -> dict:
        return {
            "fisheye": self.fisheye.to_dict(),
            "pinhole": self.pinhole.to_dict(),
            "H": self.h.to_list(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HybridMap":
        return cls(
            fisheye=FisheyeModel.from_dict(d["fisheye"]),
            pinhole=PinholeModel.from_dict(d["pinhole"]),
            h=Homography(np.asarray(d["H"], dtype=np.float64)),
        )


def hybrid_forward(hmap: HybridMap, fisheye_pixel) -> np.ndarray:
    """Map a fisheye pixel to its perspective pixel."""
    ray = fisheye_unproject(hmap.fisheye, fisheye_pixel)
    r2 = hmap.h.m @ ray
    if r2[2] <= 0.0:
        raise BehindCameraError("mapped ray points behind the perspective camera")
    return pinhole_project(hmap.pinhole, r2)


def hybrid_forward_many(hmap: HybridMap, pixels: np.ndarray):
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    rays, valid = fisheye_unproject_many(hmap.fisheye, pixels)
    r2 = rays @ hmap.h.m.T
    out, ok = pinhole_project_many(hmap.pinhole, r2)
    return out, valid & ok


def hybrid_inverse(hmap: HybridMap, perspective_pixel) -> np.ndarray:
    """Map a perspective pixel back to its fisheye pixel."""
    ray = pinhole_unproject(hmap.pinhole, perspective_pixel)
    r1 = hmap.h.inverse().m @ ray
    return fisheye_project(hmap.fisheye, r1)


def hybrid_inverse_many(hmap: HybridMap, pixels: np.ndarray):
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    rays = pinhole_unproject_many(hmap.pinhole, pixels)
    r1 = rays @ hmap.h.inverse().m.T
    return fisheye_project_many(hmap.fisheye, r1)


def pixel_grid(w: int, h: int) -> np.ndarray:
    """(h*w, 2) array of pixel-center coordinates in row-major order."""
    xs = np.arange(w, dtype=np.float64) + 0.5
    ys = np.arange(h, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def inverse_grid(hmap: HybridMap, out_w: int, out_h: int):
    """Back-map every perspective pixel center into the fisheye image.

    Returns (src (out_h*out_w, 2), defined (out_h*out_w,)).
    """
    return hybrid_inverse_many(hmap, pixel_grid(out_w, out_h))


def synthesis_mask(hmap: HybridMap, out_w: int, out_h: int) -> np.ndarray:
    """Validity of the synthesized perspective view, per output pixel."""
    src, ok = inverse_grid(hmap, out_w, out_h)
    sup = kernels.bilinear_support_ok(src[:, 0], src[:, 1], hmap.fisheye.width, hmap.fisheye.height)
    return (ok & sup).reshape(out_h, out_w)


def sample(
    rng: np.random.Generator,
    ranges: SamplingRanges,
    fisheye: FisheyeModel,
    pinhole: PinholeModel,
) -> HybridMap:
    """Draw a hybrid map whose synthesized view is fully inside the
    fisheye field of view (100% valid pixels), by rejection."""
    a0 = float(fisheye.coeffs[0])
    for _ in range(ranges.max_rejections):
        params = draw_params(rng, ranges, length_scale=fisheye.fov_radius, depth_scale=a0)
        try:
            hmap = HybridMap(fisheye=fisheye, pinhole=pinhole, h=compose(params))
        except DegenerateHomographyError:
            continue
        if synthesis_mask(hmap, pinhole.width, pinhole.height).all():
            return hmap
    raise RejectionExhaustedError(
        f"no fully-overlapping draw within {ranges.max_rejections} attempts"
    )
