"""Fisheye (polynomial omnidirectional) and pinhole camera models.

The fisheye pixel->ray map follows the omnidirectional calibration
convention: pixel coordinates relate to sensor coordinates through an
affine transform (A, t), and a sensor point (u, v) lifts to the ray
(u, v, phi(rho)) with rho = sqrt(u^2 + v^2) and

    phi(rho) = a0 + a2 rho^2 + a3 rho^3 + a4 rho^4     (no linear term).

This toolkit fixes a0 > 0 with the optical axis along +z; calibrations
using the opposite sign are negated on import.

All continuous coordinates are corner-origin: pixel index (ix, iy) has
its center at (ix + 0.5, iy + 0.5). Scalar operations raise typed errors;
`*_many` variants return a validity mask instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backend import kernels
from .errors import (
    BehindCameraError,
    CalibrationError,
    NoRootError,
    OutOfBoundsError,
    OutOfFovError,
)

MONOTONE_CHECK_SAMPLES = 1000


@dataclass(frozen=True, eq=False)
class FisheyeModel:
    """Polynomial omnidirectional camera.

    coeffs: (a0, a2, a3, a4) of phi in sensor units.
    affine_a: 2x2 sensor-alignment matrix (pixels -> sensor, linear part).
    affine_t: 2-vector offset (pixels -> sensor).
    fov_radius: largest valid sensor radius rho_max.
    """

    coeffs: np.ndarray
    affine_a: np.ndarray
    affine_t: np.ndarray
    width: int
    height: int
    fov_radius: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.float64).reshape(4))
        object.__setattr__(self, "affine_a", np.asarray(self.affine_a, dtype=np.float64).reshape(2, 2))
        object.__setattr__(self, "affine_t", np.asarray(self.affine_t, dtype=np.float64).reshape(2))
        if self.coeffs[0] == 0.0:
            raise CalibrationError("a0 must be nonzero")
        if self.coeffs[0] < 0.0:
            raise CalibrationError("a0 must be positive (+z optical axis); negate coeffs on import")
        if abs(np.linalg.det(self.affine_a)) < 1e-12:
            raise CalibrationError("affine_a must be invertible")
        if self.fov_radius <= 0.0:
            raise CalibrationError("fov_radius must be positive")
        object.__setattr__(self, "_affine_inv", np.linalg.inv(self.affine_a))
        rho = np.linspace(0.0, self.fov_radius, MONOTONE_CHECK_SAMPLES)
        theta = np.arctan2(rho, kernels.poly_eval(self.coeffs, rho))
        if np.any(np.diff(theta) <= 0.0):
            raise CalibrationError("angle from axis must be strictly monotone on [0, fov_radius]")

    def pixel_to_sensor(self, pixels: np.ndarray) -> np.ndarray:
        return np.asarray(pixels, dtype=np.float64) @ self.affine_a.T + self.affine_t

    def sensor_to_pixel(self, sensor: np.ndarray) -> np.ndarray:
        return (np.asarray(sensor, dtype=np.float64) - self.affine_t) @ self._affine_inv.T

    def to_dict(self) -> dict:
        return {
            "coeffs": self.coeffs.tolist(),
            "A": self.affine_a.tolist(),
            "t": self.affine_t.tolist(),
            "width": self.width,
            "height": self.height,
            "fov_radius": self.fov_radius,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FisheyeModel":
        coeffs = np.asarray(d["coeffs"], dtype=np.float64)
        if coeffs[0] < 0.0:
            coeffs = -coeffs  # opposite axis-sign convention
        width = int(d["width"])
        height = int(d["height"])
        fov_radius = d.get("fov_radius")
        if fov_radius is None:
            fov_radius = min(width, height) / 2.0  # inscribed-circle default
        return cls(
            coeffs=coeffs,
            affine_a=np.asarray(d["A"], dtype=np.float64),
            affine_t=np.asarray(d["t"], dtype=np.float64),
            width=width,
            height=height,
            fov_radius=float(fov_radius),
        )


@dataclass(frozen=True, eq=False)
class PinholeModel:
    fx: float
    fy: float
    cx: float
    cy: float
    skew: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise CalibrationError("focal lengths must be positive")

    @property
    def k_matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, self.skew, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def to_dict(self) -> dict:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "skew": self.skew,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PinholeModel":
        return cls(
            fx=float(d["fx"]),
            fy=float(d["fy"]),
            cx=float(d["cx"]),
            cy=float(d["cy"]),
            skew=float(d.get("skew", 0.0)),
            width=int(d["width"]),
            height=int(d["height"]),
        )


def fisheye_unproject(model: FisheyeModel, pixel) -> np.ndarray:
    """Lift a fisheye pixel to its (unnormalized) ray (u, v, phi(rho))."""
    pixel = np.asarray(pixel, dtype=np.float64).reshape(2)
    if not (0.0 <= pixel[0] < model.width and 0.0 <= pixel[1] < model.height):
        raise OutOfBoundsError(f"pixel {pixel.tolist()} outside {model.width}x{model.height}")
    sensor = model.pixel_to_sensor(pixel)
    rho = float(np.hypot(sensor[0], sensor[1]))
    if rho > model.fov_radius:
        raise OutOfFovError(f"sensor radius {rho:.3f} exceeds fov_radius {model.fov_radius:.3f}")
    return np.array([sensor[0], sensor[1], kernels.poly_eval(model.coeffs, rho)])


def fisheye_unproject_many(model: FisheyeModel, pixels: np.ndarray):
    """Batch unprojection. Returns (rays (n, 3), valid (n,))."""
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    in_bounds = (
        (pixels[:, 0] >= 0.0)
        & (pixels[:, 0] < model.width)
        & (pixels[:, 1] >= 0.0)
        & (pixels[:, 1] < model.height)
    )
    sensor = model.pixel_to_sensor(pixels)
    rho = np.hypot(sensor[:, 0], sensor[:, 1])
    valid = in_bounds & (rho <= model.fov_radius)
    rays = np.empty((pixels.shape[0], 3))
    rays[:, 0] = sensor[:, 0]
    rays[:, 1] = sensor[:, 1]
    rays[:, 2] = kernels.poly_eval(model.coeffs, rho)
    return rays, valid


def fisheye_project(model: FisheyeModel, ray) -> np.ndarray:
    """Project a ray to a fisheye pixel (inverse of fisheye_unproject)."""
    ray = np.asarray(ray, dtype=np.float64).reshape(1, 3)
    sensor, ok = kernels.project_rays(ray, model.coeffs, model.fov_radius)
    if not ok[0]:
        raise NoRootError("ray outside the fisheye field of view")
    return model.sensor_to_pixel(sensor[0])


def fisheye_project_many(model: FisheyeModel, rays: np.ndarray):
    """Batch projection. Returns (pixels (n, 2), valid (n,))."""
    rays = np.asarray(rays, dtype=np.float64).reshape(-1, 3)
    sensor, ok = kernels.project_rays(rays, model.coeffs, model.fov_radius)
    return model.sensor_to_pixel(sensor), ok


def pinhole_project(model: PinholeModel, ray) -> np.ndarray:
    ray = np.asarray(ray, dtype=np.float64).reshape(3)
    if ray[2] <= 0.0:
        raise BehindCameraError(f"ray z-component {ray[2]} is not positive")
    x = ray[0] / ray[2]
    y = ray[1] / ray[2]
    return np.array([model.fx * x + model.skew * y + model.cx, model.fy * y + model.cy])


def pinhole_project_many(model: PinholeModel, rays: np.ndarray):
    rays = np.asarray(rays, dtype=np.float64).reshape(-1, 3)
    valid = rays[:, 2] > 0.0
    z = np.where(valid, rays[:, 2], 1.0)
    x = rays[:, 0] / z
    y = rays[:, 1] / z
    out = np.empty((rays.shape[0], 2))
    out[:, 0] = model.fx * x + model.skew * y + model.cx
    out[:, 1] = model.fy * y + model.cy
    return out, valid


def pinhole_unproject(model: PinholeModel, pixel) -> np.ndarray:
    pixel = np.asarray(pixel, dtype=np.float64).reshape(2)
    y = (pixel[1] - model.cy) / model.fy
    x = (pixel[0] - model.cx - model.skew * y) / model.fx
    return np.array([x, y, 1.0])


def pinhole_unproject_many(model: PinholeModel, pixels: np.ndarray) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    rays = np.empty((pixels.shape[0], 3))
    rays[:, 1] = (pixels[:, 1] - model.cy) / model.fy
    rays[:, 0] = (pixels[:, 0] - model.cx - model.skew * rays[:, 1]) / model.fx
    rays[:, 2] = 1.0
    return rays


def load_calibration(path) -> tuple[FisheyeModel, PinholeModel]:
    """Read a calibration JSON with "fisheye" and "pinhole" sections."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return FisheyeModel.from_dict(data["fisheye"]), PinholeModel.from_dict(data["pinhole"])


def save_calibration(path, fisheye: FisheyeModel, pinhole: PinholeModel) -> None:
    data = {"fisheye": fisheye.to_dict(), "pinhole": pinhole.to_dict()}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")
