"""Procedural geometric-primitive images with exact ground-truth corners.

Shapes are rasterized with 4x supersampling so anti-aliased edges stay
sub-pixel consistent with the analytic keypoint labels. Ground truth per
kind: segment endpoints (lines), vertices (triangles, polygons, stars),
inner grid nodes (checkerboard, (n-1)(m-1) for an n x m board), centers
(ellipses). A star with k spikes carries 2k labeled vertices. The
generator keeps labels at least 4 px apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgio import validate_image
from .keypoints import KeypointSet

KINDS = ("lines", "triangles", "polygons", "stars", "checkerboard", "ellipses", "mixed")
MIN_KEYPOINT_SEP = 4.0
SUPERSAMPLE = 4
MARGIN = 10.0


@dataclass(frozen=True, eq=False)
class PrimitiveScene:
    """Analytic scene: painted shapes plus their interest points."""

    kind: str
    background: float
    shapes: tuple  # of ("poly", verts (n,2), intensity) | ("ellipse", (cx,cy,a,b,th), intensity)
    keypoints: np.ndarray  # (n, 2)

    def render(self, w: int, h: int, supersample: int = SUPERSAMPLE) -> np.ndarray:
        ss = supersample
        canvas = np.full((h * ss, w * ss), self.background)
        for shape in self.shapes:
            if shape[0] == "poly":
                _paint_polygon(canvas, ss, shape[1], shape[2])
            else:
                _paint_ellipse(canvas, ss, shape[1], shape[2])
        img = canvas.reshape(h, ss, w, ss).mean(axis=(1, 3))
        return np.clip(img, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class LabeledImage:
    image: np.ndarray
    keypoints: KeypointSet
    kind: str


def _sample_coords(ss, x0, x1, y0, y1):
    xs = (np.arange(x0, x1) + 0.5) / ss
    ys = (np.arange(y0, y1) + 0.5) / ss
    return np.meshgrid(xs, ys)


def _paint_polygon(canvas, ss, verts, intensity):
    hh, ww = canvas.shape
    x0 = max(int(np.floor(verts[:, 0].min() * ss)) - 1, 0)
    x1 = min(int(np.ceil(verts[:, 0].max() * ss)) + 1, ww)
    y0 = max(int(np.floor(verts[:, 1].min() * ss)) - 1, 0)
    y1 = min(int(np.ceil(verts[:, 1].max() * ss)) + 1, hh)
    if x0 >= x1 or y0 >= y1:
        return
    gx, gy = _sample_coords(ss, x0, x1, y0, y1)
    inside = np.zeros(gx.shape, dtype=bool)
    n = verts.shape[0]
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if ay == by:
            continue
        crosses = (ay > gy) != (by > gy)
        xint = ax + (gy - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (gx < xint)
    canvas[y0:y1, x0:x1][inside] = intensity


def _paint_ellipse(canvas, ss, params, intensity):
    cx, cy, a, b, th = params
    hh, ww = canvas.shape
    r = max(a, b)
    x0 = max(int(np.floor((cx - r) * ss)) - 1, 0)
    x1 = min(int(np.ceil((cx + r) * ss)) + 1, ww)
    y0 = max(int(np.floor((cy - r) * ss)) - 1, 0)
    y1 = min(int(np.ceil((cy + r) * ss)) + 1, hh)
    if x0 >= x1 or y0 >= y1:
        return
    gx, gy = _sample_coords(ss, x0, x1, y0, y1)
    dx = gx - cx
    dy = gy - cy
    c, s = np.cos(th), np.sin(th)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    canvas[y0:y1, x0:x1][inside] = intensity


def _contrasting(rng, bg):
    for _ in range(64):
        v = rng.uniform(0.0, 1.0)
        if abs(v - bg) >= 0.15:
            return float(v)
    return 1.0 - round(bg)


def _min_sep_ok(existing, pts, sep=MIN_KEYPOINT_SEP):
    if existing.shape[0] == 0 or pts.shape[0] == 0:
        return True
    d = np.linalg.norm(existing[:, None, :] - pts[None, :, :], axis=-1)
    return bool(d.min() >= sep)


def _pairwise_ok(pts, sep=MIN_KEYPOINT_SEP):
    if pts.shape[0] < 2:
        return True
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    d = d + np.eye(pts.shape[0]) * 1e9
    return bool(d.min() >= sep)


def _seg_point_dist(p0, p1, q):
    d = p1 - p0
    t = np.clip(np.dot(q - p0, d) / max(np.dot(d, d), 1e-12), 0.0, 1.0)
    return float(np.linalg.norm(p0 + t * d - q))


def _seg_seg_dist(p0, p1, q0, q1):
    d1 = p1 - p0
    d2 = q1 - q0
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) > 1e-12:
        r = q0 - p0
        t = (r[0] * d2[1] - r[1] * d2[0]) / denom
        u = (r[0] * d1[1] - r[1] * d1[0]) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return 0.0
    return min(
        _seg_point_dist(p0, p1, q0),
        _seg_point_dist(p0, p1, q1),
        _seg_point_dist(q0, q1, p0),
        _seg_point_dist(q0, q1, p1),
    )


def _rect_around_segment(p0, p1, thickness):
    d = p1 - p0
    n = np.array([-d[1], d[0]]) / np.linalg.norm(d)
    half = 0.5 * thickness * n
    return np.array([p0 + half, p1 + half, p1 - half, p0 - half])


def _build_lines(rng, w, h, bg):
    n_seg = int(rng.integers(3, 9))
    shapes = []
    segs = []
    keypoints = []
    for _ in range(n_seg):
        for _attempt in range(50):
            p0 = rng.uniform([MARGIN, MARGIN], [w - MARGIN, h - MARGIN])
            p1 = rng.uniform([MARGIN, MARGIN], [w - MARGIN, h - MARGIN])
            if np.linalg.norm(p1 - p0) < 30.0:
                continue
            if any(_seg_seg_dist(p0, p1, q0, q1) < 6.0 for q0, q1 in segs):
                continue
            pts = np.array([p0, p1])
            if not _min_sep_ok(np.array(keypoints).reshape(-1, 2), pts):
                continue
            thickness = rng.uniform(1.5, 3.0)
            shapes.append(("poly", _rect_around_segment(p0, p1, thickness), _contrasting(rng, bg)))
            segs.append((p0, p1))
            keypoints.extend([p0, p1])
            break
    return shapes, np.array(keypoints).reshape(-1, 2)


def _polygon_vertices(rng, center, k, r_lo, r_hi):
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=k))
    radii = rng.uniform(r_lo, r_hi, size=k)
    return center + np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)


def _corner_angles_ok(verts, lo_deg=25.0, hi_deg=155.0):
    n = verts.shape[0]
    for i in range(n):
        a = verts[(i - 1) % n] - verts[i]
        b = verts[(i + 1) % n] - verts[i]
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na < 1e-9 or nb < 1e-9:
            return False
        ang = np.degrees(np.arccos(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0)))
        if not (lo_deg <= ang <= hi_deg):
            return False
    return True


def _place_blobs(rng, w, h, n_shapes, builders):
    """Place non-overlapping shapes via bounding circles; returns scene parts."""
    shapes = []
    keypoints = []
    circles = []
    for _ in range(n_shapes):
        builder = builders[int(rng.integers(0, len(builders)))]
        for _attempt in range(50):
            built = builder(rng)
            if built is None:
                continue
            shape, pts, center, radius = built
            if np.any(pts[:, 0] < MARGIN) or np.any(pts[:, 0] > w - MARGIN):
                continue
            if np.any(pts[:, 1] < MARGIN) or np.any(pts[:, 1] > h - MARGIN):
                continue
            if any(np.linalg.norm(center - c) < radius + cr + 4.0 for c, cr in circles):
                continue
            if not _pairwise_ok(pts) or not _min_sep_ok(np.array(keypoints).reshape(-1, 2), pts):
                continue
            shapes.append(shape)
            keypoints.extend(pts)
            circles.append((center, radius))
            break
    return shapes, np.array(keypoints).reshape(-1, 2)


def _triangle_builder(w, h, bg):
    def build(rng):
        center = rng.uniform([MARGIN + 60, MARGIN + 60], [w - MARGIN - 60, h - MARGIN - 60])
        verts = _polygon_vertices(rng, center, 3, 20.0, 55.0)
        sides = np.linalg.norm(verts - np.roll(verts, 1, axis=0), axis=1)
        if sides.min() < 18.0 or not _corner_angles_ok(verts, 22.0, 140.0):
            return None
        radius = float(np.linalg.norm(verts - center, axis=1).max())
        return ("poly", verts, _contrasting(rng, bg)), verts, center, radius

    return build


def _polygon_builder(w, h, bg):
    def build(rng):
        k = int(rng.integers(4, 9))
        center = rng.uniform([MARGIN + 75, MARGIN + 75], [w - MARGIN - 75, h - MARGIN - 75])
        verts = _polygon_vertices(rng, center, k, 28.0, 70.0)
        if not _pairwise_ok(verts, 8.0) or not _corner_angles_ok(verts):
            return None
        radius = float(np.linalg.norm(verts - center, axis=1).max())
        return ("poly", verts, _contrasting(rng, bg)), verts, center, radius

    return build


def _star_builder(w, h, bg):
    def build(rng):
        k = int(rng.integers(4, 8))
        outer = rng.uniform(30.0, 65.0)
        inner = outer * rng.uniform(0.38, 0.55)
        center = rng.uniform(
            [MARGIN + outer, MARGIN + outer], [w - MARGIN - outer, h - MARGIN - outer]
        )
        phase = rng.uniform(0.0, 2.0 * np.pi)
        angles = phase + np.arange(2 * k) * np.pi / k
        radii = np.where(np.arange(2 * k) % 2 == 0, outer, inner)
        verts = center + np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        return ("poly", verts, _contrasting(rng, bg)), verts, center, outer

    return build


def _ellipse_builder(w, h, bg):
    def build(rng):
        a = rng.uniform(10.0, 38.0)
        b = rng.uniform(8.0, a)
        th = rng.uniform(0.0, np.pi)
        center = rng.uniform([MARGIN + a, MARGIN + a], [w - MARGIN - a, h - MARGIN - a])
        shape = ("ellipse", (center[0], center[1], a, b, th), _contrasting(rng, bg))
        return shape, center.reshape(1, 2), center, a

    return build


def _build_checkerboard(rng, w, h, bg):
    bleed = 6.0
    max_cells_w = int((w + 2 * bleed) // 10)
    max_cells_h = int((h + 2 * bleed) // 10)
    m = int(rng.integers(3, min(7, max_cells_w) + 1))
    n = int(rng.integers(3, min(7, max_cells_h) + 1))
    c1 = rng.uniform(0.0, 1.0)
    c2 = _contrasting(rng, c1)
    cell_w = (w + 2 * bleed) / m
    cell_h = (h + 2 * bleed) / n
    shapes = []
    for i in range(n):
        for j in range(m):
            x0 = -bleed + j * cell_w
            y0 = -bleed + i * cell_h
            verts = np.array(
                [[x0, y0], [x0 + cell_w, y0], [x0 + cell_w, y0 + cell_h], [x0, y0 + cell_h]]
            )
            shapes.append(("poly", verts, c1 if (i + j) % 2 == 0 else float(c2)))
    nodes = [
        [-bleed + j * cell_w, -bleed + i * cell_h]
        for i in range(1, n)
        for j in range(1, m)
    ]
    return shapes, np.array(nodes)


def build_scene(rng: np.random.Generator, w: int, h: int, kind: str) -> PrimitiveScene:
    if kind not in KINDS:
        raise ValueError(f"unknown primitive kind {kind!r}; expected one of {KINDS}")
    bg = float(rng.uniform(0.05, 0.95))
    if kind == "lines":
        shapes, pts = _build_lines(rng, w, h, bg)
    elif kind == "triangles":
        shapes, pts = _place_blobs(rng, w, h, int(rng.integers(1, 4)), [_triangle_builder(w, h, bg)])
    elif kind == "polygons":
        shapes, pts = _place_blobs(rng, w, h, int(rng.integers(1, 3)), [_polygon_builder(w, h, bg)])
    elif kind == "stars":
        shapes, pts = _place_blobs(rng, w, h, int(rng.integers(1, 3)), [_star_builder(w, h, bg)])
    elif kind == "checkerboard":
        shapes, pts = _build_checkerboard(rng, w, h, bg)
    elif kind == "ellipses":
        shapes, pts = _place_blobs(rng, w, h, int(rng.integers(1, 5)), [_ellipse_builder(w, h, bg)])
    else:  # mixed
        builders = [
            _triangle_builder(w, h, bg),
            _polygon_builder(w, h, bg),
            _star_builder(w, h, bg),
            _ellipse_builder(w, h, bg),
        ]
        shapes, pts = _place_blobs(rng, w, h, int(rng.integers(2, 5)), builders)
    return PrimitiveScene(kind=kind, background=bg, shapes=tuple(shapes), keypoints=pts)


def gen_primitive_image(rng: np.random.Generator, size, kind: str) -> LabeledImage:
    """Generate one labeled primitive image; deterministic given the rng state."""
    if isinstance(size, int):
        w = h = size
    else:
        w, h = size
    if w < 64 or h < 64:
        raise ValueError("canvas must be at least 64x64")
    scene = build_scene(rng, w, h, kind)
    img = scene.render(w, h)
    return LabeledImage(image=img, keypoints=KeypointSet.from_points(scene.keypoints), kind=kind)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with a normalized kernel (reflect padding)."""
    if sigma < 0.0:
        raise ValueError("sigma must be non-negative")
    img = np.asarray(img, dtype=np.float64)
    if sigma == 0.0:
        return img.copy()
    radius = max(1, int(np.ceil(3.0 * sigma)))
    k = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma) ** 2)
    k /= k.sum()
    pad = np.pad(img, ((0, 0), (radius, radius)), mode="reflect")
    out = np.zeros_like(img)
    for j, kj in enumerate(k):
        out += kj * pad[:, j : j + img.shape[1]]
    pad = np.pad(out, ((radius, radius), (0, 0)), mode="reflect")
    out = np.zeros_like(img)
    for j, kj in enumerate(k):
        out += kj * pad[j : j + img.shape[0], :]
    return out


def augment(
    img: np.ndarray,
    rng: np.random.Generator,
    sigma_range=(0.0, 2.0),
    delta_range=(-0.2, 0.2),
) -> np.ndarray:
    """Random Gaussian blur plus brightness shift; geometry is untouched."""
    img = validate_image(img)
    sigma = float(rng.uniform(*sigma_range))
    delta = float(rng.uniform(*delta_range))
    out = gaussian_blur(img, sigma) if sigma > 0.0 else img.copy()
    return np.clip(out + delta, 0.0, 1.0)
