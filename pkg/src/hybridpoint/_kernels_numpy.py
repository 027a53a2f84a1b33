"""Pure-numpy implementations of the hot per-pixel kernels.

This is the fallback backend; `_kernels_numba.py` mirrors every function
with identical per-element arithmetic. Select with HYBRIDPOINT_BACKEND.

Conventions shared by both backends:
  * images are (h, w) float64 arrays,
  * continuous coordinates are corner-origin: pixel index (ix, iy) has its
    center at (ix + 0.5, iy + 0.5),
  * bilinear taps with exactly zero weight are not required to be in
    bounds, so an identity warp keeps a full valid mask.
"""

import numpy as np

PROJECT_TOL = 1e-9
PROJECT_MAX_ITER = 60

# face order +x, -x, +y, -y, +z, -z; rows are (forward, right, down)
CUBE_FACE_AXES = np.array(
    [
        [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
        [[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
        [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]],
        [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        [[0.0, 0.0, -1.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    ]
)


def poly_eval(coeffs, rho):
    """phi(rho) = a0 + a2 rho^2 + a3 rho^3 + a4 rho^4 (no linear term)."""
    a0, a2, a3, a4 = coeffs[0], coeffs[1], coeffs[2], coeffs[3]
    return a0 + rho * rho * (a2 + rho * (a3 + rho * a4))


def poly_deriv(coeffs, rho):
    a2, a3, a4 = coeffs[1], coeffs[2], coeffs[3]
    return rho * (2.0 * a2 + rho * (3.0 * a3 + 4.0 * a4 * rho))


def project_rays(dirs, coeffs, rho_max):
    """Invert the fisheye forward map for a batch of rays.

    Finds lam > 0 such that (lam*dx, lam*dy, phi(lam*rho_d)) is parallel
    to the ray, i.e. the root of f(lam) = phi(lam*rho_d) - lam*dz on the
    bracket [0, rho_max/rho_d]. Safeguarded Newton from the midpoint-ish
    start rho_max / (2 rho_d), bisection step whenever Newton leaves the
    bracket.

    Returns (sensor (n, 2), ok (n,)); ok is False where no root exists
    inside the field of view.
    """
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    n = dirs.shape[0]
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    rho_d = np.hypot(dx, dy)

    sensor = np.zeros((n, 2))
    on_axis = rho_d < 1e-12
    ok = np.where(on_axis, dz > 0.0, False)

    active = ~on_axis
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = np.where(active, rho_max / np.where(active, rho_d, 1.0), 0.0)
    phi_edge = poly_eval(coeffs, rho_max)
    f_hi = phi_edge - hi * dz
    active &= f_hi <= 0.0  # f(0) = a0 > 0, so a root needs f(hi) <= 0

    lo = np.zeros(n)
    lam = np.where(active, 0.5 * hi, 0.0)
    done = ~active
    for _ in range(PROJECT_MAX_ITER):
        if done.all():
            break
        live = ~done
        r = lam * rho_d
        fl = poly_eval(coeffs, r) - lam * dz
        done |= live & (fl == 0.0)
        live = ~done
        pos = fl > 0.0
        lo = np.where(live & pos, lam, lo)
        hi = np.where(live & ~pos, lam, hi)
        fp = rho_d * poly_deriv(coeffs, r) - dz
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = lam - fl / np.where(fp != 0.0, fp, 1.0)
        mid = 0.5 * (lo + hi)
        good = (fp != 0.0) & (newton > lo) & (newton < hi)
        lam_new = np.where(good, newton, mid)
        conv = live & (np.abs(lam_new - lam) * rho_d <= PROJECT_TOL)
        lam = np.where(live, lam_new, lam)
        done |= conv

    # the safeguarded bracket always converges within the iteration cap
    ok = ok | active
    sensor[:, 0] = np.where(active, lam * dx, sensor[:, 0])
    sensor[:, 1] = np.where(active, lam * dy, sensor[:, 1])
    return sensor, ok


def bilinear_support_ok(x, y, w, h):
    """True where every nonzero-weight bilinear tap of (x, y) is in bounds."""
    u = x - 0.5
    v = y - 0.5
    x0 = np.floor(u)
    y0 = np.floor(v)
    fx = u - x0
    fy = v - y0
    ok_x = (x0 >= 0.0) & (np.where(fx > 0.0, x0 + 1.0, x0) <= w - 1.0)
    ok_y = (y0 >= 0.0) & (np.where(fy > 0.0, y0 + 1.0, y0) <= h - 1.0)
    return ok_x & ok_y


def bilinear_sample(img, x, y):
    """Strict bilinear sampling; returns (values, ok). Invalid points get 0."""
    h, w = img.shape
    u = x - 0.5
    v = y - 0.5
    x0 = np.floor(u)
    y0 = np.floor(v)
    fx = u - x0
    fy = v - y0
    ok_x = (x0 >= 0.0) & (np.where(fx > 0.0, x0 + 1.0, x0) <= w - 1.0)
    ok_y = (y0 >= 0.0) & (np.where(fy > 0.0, y0 + 1.0, y0) <= h - 1.0)
    ok = ok_x & ok_y

    ix0 = np.clip(x0.astype(np.int64), 0, w - 1)
    iy0 = np.clip(y0.astype(np.int64), 0, h - 1)
    ix1 = np.minimum(ix0 + 1, w - 1)
    iy1 = np.minimum(iy0 + 1, h - 1)
    a = img[iy0, ix0]
    b = img[iy0, ix1]
    c = img[iy1, ix0]
    d = img[iy1, ix1]
    val = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
    return np.where(ok, val, 0.0), ok


def bilinear_sample_clamped(img, x, y):
    """Bilinear sampling with edge-clamped taps (always defined)."""
    h, w = img.shape
    u = np.clip(x - 0.5, 0.0, w - 1.0)
    v = np.clip(y - 0.5, 0.0, h - 1.0)
    x0 = np.minimum(np.floor(u), w - 2.0) if w > 1 else np.zeros_like(u)
    y0 = np.minimum(np.floor(v), h - 2.0) if h > 1 else np.zeros_like(v)
    fx = u - x0
    fy = v - y0
    ix0 = x0.astype(np.int64)
    iy0 = y0.astype(np.int64)
    ix1 = np.minimum(ix0 + 1, w - 1)
    iy1 = np.minimum(iy0 + 1, h - 1)
    a = img[iy0, ix0]
    b = img[iy0, ix1]
    c = img[iy1, ix0]
    d = img[iy1, ix1]
    return (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)


def shi_tomasi_response(img):
    """Minimum-eigenvalue corner response.

    3x3 Sobel gradients on the 1-px interior, structure tensor summed over
    a 5x5 box window; pixels without full support (3-px border) are zero.
    """
    h, w = img.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    if h >= 3 and w >= 3:
        gx[1:-1, 1:-1] = (
            (img[:-2, 2:] + 2.0 * img[1:-1, 2:] + img[2:, 2:])
            - (img[:-2, :-2] + 2.0 * img[1:-1, :-2] + img[2:, :-2])
        )
        gy[1:-1, 1:-1] = (
            (img[2:, :-2] + 2.0 * img[2:, 1:-1] + img[2:, 2:])
            - (img[:-2, :-2] + 2.0 * img[:-2, 1:-1] + img[:-2, 2:])
        )
    resp = np.zeros((h, w))
    if h < 7 or w < 7:
        return resp
    xx = gx * gx
    xy = gx * gy
    yy = gy * gy
    sxx = np.zeros((h - 6, w - 6))
    sxy = np.zeros((h - 6, w - 6))
    syy = np.zeros((h - 6, w - 6))
    # fixed accumulation order (row-major offsets) so backends agree bitwise
    for dy in range(5):
        for dx in range(5):
            sxx += xx[1 + dy : h - 5 + dy, 1 + dx : w - 5 + dx]
            sxy += xy[1 + dy : h - 5 + dy, 1 + dx : w - 5 + dx]
            syy += yy[1 + dy : h - 5 + dy, 1 + dx : w - 5 + dx]
    half_tr = 0.5 * (sxx + syy)
    half_df = 0.5 * (sxx - syy)
    lam = half_tr - np.sqrt(half_df * half_df + sxy * sxy)
    resp[3 : h - 3, 3 : w - 3] = np.maximum(lam, 0.0)
    return resp


def greedy_nms(xs, ys, radius):
    """Greedy suppression over points already sorted by priority.

    keep[i] is True iff no earlier kept point lies within `radius`.
    """
    n = xs.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    kept_x = np.empty(n)
    kept_y = np.empty(n)
    m = 0
    r2 = radius * radius
    for i in range(n):
        if m > 0:
            dx = kept_x[:m] - xs[i]
            dy = kept_y[:m] - ys[i]
            if np.any(dx * dx + dy * dy <= r2):
                continue
        keep[i] = True
        kept_x[m] = xs[i]
        kept_y[m] = ys[i]
        m += 1
    return keep


def _catmull_rom_weights(f):
    w0 = 0.5 * (-f + 2.0 * f * f - f * f * f)
    w1 = 0.5 * (2.0 - 5.0 * f * f + 3.0 * f * f * f)
    w2 = 0.5 * (f + 4.0 * f * f - 3.0 * f * f * f)
    w3 = 0.5 * (-f * f + f * f * f)
    return w0, w1, w2, w3


def interp_grid_bicubic(grid, gx, gy):
    """Catmull-Rom (a = -0.5) interpolation on a vector lattice.

    grid is (hc, wc, d); (gx, gy) are lattice coordinates (node j at j.0).
    Taps outside the lattice are clamped to the border nodes.
    """
    hc, wc, d = grid.shape
    x0 = np.floor(gx)
    y0 = np.floor(gy)
    fx = gx - x0
    fy = gy - y0
    wx = _catmull_rom_weights(fx)
    wy = _catmull_rom_weights(fy)
    ix = x0.astype(np.int64)
    iy = y0.astype(np.int64)
    out = np.zeros((gx.shape[0], d))
    for j in range(4):
        cy = np.clip(iy + (j - 1), 0, hc - 1)
        for i in range(4):
            cx = np.clip(ix + (i - 1), 0, wc - 1)
            out += (wy[j] * wx[i])[:, None] * grid[cy, cx, :]
    return out


def cubemap_sample(faces, dirs):
    """Sample a 6-face cube map along rays.

    Face choice follows the dominant axis with ties resolved in the fixed
    order +x, -x, +y, -y, +z, -z; taps are edge-clamped within each face.
    """
    m = faces.shape[1]
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    ax, ay, az = np.abs(dx), np.abs(dy), np.abs(dz)
    x_dom = (ax >= ay) & (ax >= az)
    y_dom = ~x_dom & (ay >= az)
    z_dom = ~x_dom & ~y_dom
    face = np.where(
        x_dom,
        np.where(dx > 0.0, 0, 1),
        np.where(y_dom, np.where(dy > 0.0, 2, 3), np.where(dz > 0.0, 4, 5)),
    )
    out = np.zeros(dirs.shape[0])
    for fi in range(6):
        sel = face == fi
        if not np.any(sel):
            continue
        fwd = CUBE_FACE_AXES[fi, 0]
        rgt = CUBE_FACE_AXES[fi, 1]
        dwn = CUBE_FACE_AXES[fi, 2]
        d = dirs[sel]
        den = d[:, 0] * fwd[0] + d[:, 1] * fwd[1] + d[:, 2] * fwd[2]
        u = (d[:, 0] * rgt[0] + d[:, 1] * rgt[1] + d[:, 2] * rgt[2]) / den
        v = (d[:, 0] * dwn[0] + d[:, 1] * dwn[1] + d[:, 2] * dwn[2]) / den
        px = (u + 1.0) * 0.5 * m
        py = (v + 1.0) * 0.5 * m
        out[sel] = bilinear_sample_clamped(faces[fi], px, py)
    return out
