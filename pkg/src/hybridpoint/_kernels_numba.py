"""Numba-accelerated twins of the kernels in `_kernels_numpy`.

Per-element arithmetic (operation order included) matches the numpy
backend so both produce the same results up to reduction rounding.
"""

import numpy as np
from numba import njit

from ._kernels_numpy import CUBE_FACE_AXES, PROJECT_MAX_ITER, PROJECT_TOL, bilinear_support_ok

__all__ = [
    "project_rays",
    "bilinear_support_ok",
    "bilinear_sample",
    "bilinear_sample_clamped",
    "shi_tomasi_response",
    "greedy_nms",
    "interp_grid_bicubic",
    "cubemap_sample",
    "poly_eval",
    "poly_deriv",
    "warmup",
]

_FACE_AXES = np.ascontiguousarray(CUBE_FACE_AXES)


@njit(cache=True, inline="always")
def _phi(a0, a2, a3, a4, rho):
    return a0 + rho * rho * (a2 + rho * (a3 + rho * a4))


@njit(cache=True, inline="always")
def _dphi(a2, a3, a4, rho):
    return rho * (2.0 * a2 + rho * (3.0 * a3 + 4.0 * a4 * rho))


def poly_eval(coeffs, rho):
    a0, a2, a3, a4 = coeffs[0], coeffs[1], coeffs[2], coeffs[3]
    return a0 + rho * rho * (a2 + rho * (a3 + rho * a4))


def poly_deriv(coeffs, rho):
    a2, a3, a4 = coeffs[1], coeffs[2], coeffs[3]
    return rho * (2.0 * a2 + rho * (3.0 * a3 + 4.0 * a4 * rho))


@njit(cache=True)
def _project_rays(dirs, a0, a2, a3, a4, rho_max):
    n = dirs.shape[0]
    sensor = np.zeros((n, 2))
    ok = np.zeros(n, dtype=np.bool_)
    phi_edge = _phi(a0, a2, a3, a4, rho_max)
    for i in range(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        rho_d = np.hypot(dx, dy)
        if rho_d < 1e-12:
            ok[i] = dz > 0.0
            continue
        hi = rho_max / rho_d
        if phi_edge - hi * dz > 0.0:
            continue
        lo = 0.0
        lam = 0.5 * hi
        for _ in range(PROJECT_MAX_ITER):
            r = lam * rho_d
            fl = _phi(a0, a2, a3, a4, r) - lam * dz
            if fl == 0.0:
                break
            if fl > 0.0:
                lo = lam
            else:
                hi = lam
            fp = rho_d * _dphi(a2, a3, a4, r) - dz
            if fp != 0.0:
                newton = lam - fl / fp
            else:
                newton = lam - fl  # placeholder, rejected below
            if fp != 0.0 and lo < newton < hi:
                lam_new = newton
            else:
                lam_new = 0.5 * (lo + hi)
            conv = abs(lam_new - lam) * rho_d <= PROJECT_TOL
            lam = lam_new
            if conv:
                break
        sensor[i, 0] = lam * dx
        sensor[i, 1] = lam * dy
        ok[i] = True
    return sensor, ok


def project_rays(dirs, coeffs, rho_max):
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    c = np.asarray(coeffs, dtype=np.float64)
    return _project_rays(dirs, c[0], c[1], c[2], c[3], float(rho_max))


@njit(cache=True)
def _bilinear_sample(img, x, y):
    h, w = img.shape
    n = x.shape[0]
    val = np.zeros(n)
    ok = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        u = x[i] - 0.5
        v = y[i] - 0.5
        x0 = np.floor(u)
        y0 = np.floor(v)
        fx = u - x0
        fy = v - y0
        hx = x0 + 1.0 if fx > 0.0 else x0
        hy = y0 + 1.0 if fy > 0.0 else y0
        if x0 < 0.0 or hx > w - 1.0 or y0 < 0.0 or hy > h - 1.0:
            continue
        ix0 = int(x0)
        iy0 = int(y0)
        ix1 = min(ix0 + 1, w - 1)
        iy1 = min(iy0 + 1, h - 1)
        a = img[iy0, ix0]
        b = img[iy0, ix1]
        c = img[iy1, ix0]
        d = img[iy1, ix1]
        val[i] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
        ok[i] = True
    return val, ok


def bilinear_sample(img, x, y):
    return _bilinear_sample(
        np.ascontiguousarray(img, dtype=np.float64),
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
    )


@njit(cache=True)
def _bilinear_sample_clamped(img, x, y):
    h, w = img.shape
    n = x.shape[0]
    val = np.zeros(n)
    for i in range(n):
        u = min(max(x[i] - 0.5, 0.0), w - 1.0)
        v = min(max(y[i] - 0.5, 0.0), h - 1.0)
        x0 = min(np.floor(u), w - 2.0) if w > 1 else 0.0
        y0 = min(np.floor(v), h - 2.0) if h > 1 else 0.0
        fx = u - x0
        fy = v - y0
        ix0 = int(x0)
        iy0 = int(y0)
        ix1 = min(ix0 + 1, w - 1)
        iy1 = min(iy0 + 1, h - 1)
        a = img[iy0, ix0]
        b = img[iy0, ix1]
        c = img[iy1, ix0]
        d = img[iy1, ix1]
        val[i] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
    return val


def bilinear_sample_clamped(img, x, y):
    return _bilinear_sample_clamped(
        np.ascontiguousarray(img, dtype=np.float64),
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
    )


@njit(cache=True)
def _shi_tomasi_response(img):
    h, w = img.shape
    resp = np.zeros((h, w))
    if h < 7 or w < 7:
        return resp
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            gx[y, x] = (
                (img[y - 1, x + 1] + 2.0 * img[y, x + 1] + img[y + 1, x + 1])
                - (img[y - 1, x - 1] + 2.0 * img[y, x - 1] + img[y + 1, x - 1])
            )
            gy[y, x] = (
                (img[y + 1, x - 1] + 2.0 * img[y + 1, x] + img[y + 1, x + 1])
                - (img[y - 1, x - 1] + 2.0 * img[y - 1, x] + img[y - 1, x + 1])
            )
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            sxx = 0.0
            sxy = 0.0
            syy = 0.0
            for dy in range(-2, 3):
                for dx in range(-2, 3):
                    a = gx[y + dy, x + dx]
                    b = gy[y + dy, x + dx]
                    sxx += a * a
                    sxy += a * b
                    syy += b * b
            half_tr = 0.5 * (sxx + syy)
            half_df = 0.5 * (sxx - syy)
            lam = half_tr - np.sqrt(half_df * half_df + sxy * sxy)
            resp[y, x] = lam if lam > 0.0 else 0.0
    return resp


def shi_tomasi_response(img):
    return _shi_tomasi_response(np.ascontiguousarray(img, dtype=np.float64))


@njit(cache=True)
def _greedy_nms(xs, ys, radius):
    n = xs.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    kept_x = np.empty(n)
    kept_y = np.empty(n)
    m = 0
    r2 = radius * radius
    for i in range(n):
        hit = False
        for j in range(m):
            dx = kept_x[j] - xs[i]
            dy = kept_y[j] - ys[i]
            if dx * dx + dy * dy <= r2:
                hit = True
                break
        if hit:
            continue
        keep[i] = True
        kept_x[m] = xs[i]
        kept_y[m] = ys[i]
        m += 1
    return keep


def greedy_nms(xs, ys, radius):
    return _greedy_nms(
        np.ascontiguousarray(xs, dtype=np.float64),
        np.ascontiguousarray(ys, dtype=np.float64),
        float(radius),
    )


@njit(cache=True, inline="always")
def _cr_weight(f, k):
    if k == 0:
        return 0.5 * (-f + 2.0 * f * f - f * f * f)
    if k == 1:
        return 0.5 * (2.0 - 5.0 * f * f + 3.0 * f * f * f)
    if k == 2:
        return 0.5 * (f + 4.0 * f * f - 3.0 * f * f * f)
    return 0.5 * (-f * f + f * f * f)


@njit(cache=True)
def _interp_grid_bicubic(grid, gx, gy):
    hc, wc, d = grid.shape
    n = gx.shape[0]
    out = np.zeros((n, d))
    for q in range(n):
        x0 = np.floor(gx[q])
        y0 = np.floor(gy[q])
        fx = gx[q] - x0
        fy = gy[q] - y0
        ix = int(x0)
        iy = int(y0)
        for j in range(4):
            cy = min(max(iy + (j - 1), 0), hc - 1)
            wyj = _cr_weight(fy, j)
            for i in range(4):
                cx = min(max(ix + (i - 1), 0), wc - 1)
                wgt = wyj * _cr_weight(fx, i)
                for k in range(d):
                    out[q, k] += wgt * grid[cy, cx, k]
    return out


def interp_grid_bicubic(grid, gx, gy):
    return _interp_grid_bicubic(
        np.ascontiguousarray(grid, dtype=np.float64),
        np.ascontiguousarray(gx, dtype=np.float64),
        np.ascontiguousarray(gy, dtype=np.float64),
    )


@njit(cache=True)
def _cubemap_sample(faces, dirs, axes):
    m = faces.shape[1]
    n = dirs.shape[0]
    out = np.zeros(n)
    for i in range(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        ax = abs(dx)
        ay = abs(dy)
        az = abs(dz)
        if ax >= ay and ax >= az:
            fi = 0 if dx > 0.0 else 1
        elif ay >= az:
            fi = 2 if dy > 0.0 else 3
        else:
            fi = 4 if dz > 0.0 else 5
        den = dx * axes[fi, 0, 0] + dy * axes[fi, 0, 1] + dz * axes[fi, 0, 2]
        u = (dx * axes[fi, 1, 0] + dy * axes[fi, 1, 1] + dz * axes[fi, 1, 2]) / den
        v = (dx * axes[fi, 2, 0] + dy * axes[fi, 2, 1] + dz * axes[fi, 2, 2]) / den
        px = (u + 1.0) * 0.5 * m
        py = (v + 1.0) * 0.5 * m

        uu = min(max(px - 0.5, 0.0), m - 1.0)
        vv = min(max(py - 0.5, 0.0), m - 1.0)
        x0 = min(np.floor(uu), m - 2.0) if m > 1 else 0.0
        y0 = min(np.floor(vv), m - 2.0) if m > 1 else 0.0
        fx = uu - x0
        fy = vv - y0
        ix0 = int(x0)
        iy0 = int(y0)
        ix1 = min(ix0 + 1, m - 1)
        iy1 = min(iy0 + 1, m - 1)
        a = faces[fi, iy0, ix0]
        b = faces[fi, iy0, ix1]
        c = faces[fi, iy1, ix0]
        e = faces[fi, iy1, ix1]
        out[i] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * e)
    return out


def cubemap_sample(faces, dirs):
    return _cubemap_sample(
        np.ascontiguousarray(faces, dtype=np.float64),
        np.ascontiguousarray(dirs, dtype=np.float64),
        _FACE_AXES,
    )


def warmup():
    """Compile every kernel on toy inputs (cached across processes)."""
    img = np.zeros((8, 8))
    xy = np.array([4.0])
    project_rays(np.array([[0.0, 0.0, 1.0], [0.1, 0.0, 1.0]]), np.array([1.0, 0.0, 0.0, 0.0]), 4.0)
    bilinear_sample(img, xy, xy)
    bilinear_sample_clamped(img, xy, xy)
    shi_tomasi_response(np.zeros((8, 8)))
    greedy_nms(xy, xy, 1.0)
    interp_grid_bicubic(np.zeros((2, 2, 3)), np.array([0.5]), np.array([0.5]))
    cubemap_sample(np.zeros((6, 4, 4)), np.array([[0.0, 0.0, 1.0]]))
