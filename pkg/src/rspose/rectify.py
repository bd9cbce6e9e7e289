"""Removal of radial and rotational rolling-shutter distortion.

Points are centered pixel coordinates ``(row, col)``. A measured point on
row ``r`` is undistorted with the division model and mapped to the camera
orientation of the reference row by the homography
``K exp((r - r0)[w]x)^T K^-1``. Translation during readout is not
compensated since that needs per-pixel depth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .geom import _distortion_factor, rotation_exp, undistort_division


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image stored as a ``(height, width)`` array."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.ndim != 2:
            raise ValueError("image data must be two-dimensional")
        object.__setattr__(self, "data", np.ascontiguousarray(a, dtype=np.uint8))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def center(self):
        """Pixel position of the principal point, ``(row, col)``."""
        return np.array([(self.height - 1) / 2.0, (self.width - 1) / 2.0])


def _row_rotations(rows, model):
    return rotation_exp((np.asarray(rows) - model.r0)[:, None] * model.w)


def _to_rays(p, f):
    return np.c_[p / f, np.ones(len(p))]


def _from_rays(rays, f):
    return f * rays[:, :2] / rays[:, 2:3]


def rectify_points(points, model):
    """Global-shutter-equivalent pinhole points at the reference row."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    h = undistort_division(x, model.lam)
    pin = h[:, :2] / h[:, 2:3]
    R = _row_rotations(x[:, 0], model)
    rays = np.einsum("nji,nj->ni", R, _to_rays(pin, model.f))
    return _from_rays(rays, model.f)


def _distort_rows(g, rows, model):
    """Measured points of GS points ``g`` if they were read out on ``rows``."""
    R = _row_rotations(rows, model)
    rays = np.einsum("nij,nj->ni", R, _to_rays(g, model.f))
    with np.errstate(divide="ignore", invalid="ignore"):
        pin = _from_rays(rays, model.f)
        k = _distortion_factor(np.sum(pin**2, axis=1), model.lam)
    k[rays[:, 2] <= 0] = np.nan
    return pin * k[:, None]


def unrectify_points(points, model, *, max_iter=10, tol=1e-6, strict=False):
    """Inverse of :func:`rectify_points`.

    Solves for the readout row of each point with Newton steps on the scalar
    equation ``row(x(r)) = r`` (numerical derivative), at most ``max_iter``
    steps. Points outside the domain come back as NaN; with ``strict`` a
    point that does not reach ``tol`` raises :class:`NoConvergence`.
    """
    g = np.atleast_2d(np.asarray(points, dtype=float))
    r = g[:, 0].copy()
    h = 1e-3
    done = np.zeros(len(g), dtype=bool)
    for _ in range(max_iter):
        a = ~done
        if not a.any():
            break
        F = _distort_rows(g[a], r[a], model)[:, 0] - r[a]
        dF = (_distort_rows(g[a], r[a] + h, model)[:, 0] - (r[a] + h) - F) / h
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(dF) > 1e-12, F / dF, F)
        r[a] -= step
        small = np.abs(step) < tol
        bad = ~np.isfinite(step)
        idx = np.flatnonzero(a)
        done[idx[small | bad]] = True
        r[idx[bad]] = np.nan
    if strict and not done.all():
        raise NoConvergence("row iteration did not reach the tolerance")
    out = _distort_rows(g, np.nan_to_num(r), model)
    out[~np.isfinite(r)] = np.nan
    return out


def bilinear_sample(img, rows, cols):
    """Sample ``img`` at pixel positions; samples outside the image are 0."""
    a = img.astype(float)
    H, W = a.shape
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    ok = np.isfinite(rows) & np.isfinite(cols)
    ok &= (rows >= 0) & (rows <= H - 1) & (cols >= 0) & (cols <= W - 1)
    r = np.where(ok, rows, 0.0)
    c = np.where(ok, cols, 0.0)
    r0 = np.minimum(np.floor(r).astype(int), H - 2 if H > 1 else 0)
    c0 = np.minimum(np.floor(c).astype(int), W - 2 if W > 1 else 0)
    r1 = np.minimum(r0 + 1, H - 1)
    c1 = np.minimum(c0 + 1, W - 1)
    fr, fc = r - r0, c - c0
    out = (
        a[r0, c0] * (1 - fr) * (1 - fc)
        + a[r0, c1] * (1 - fr) * fc
        + a[r1, c0] * fr * (1 - fc)
        + a[r1, c1] * fr * fc
    )
    return np.where(ok, out, 0.0)


def rectify_image(img, model, *, max_iter=10, tol=1e-6):
    """Warp ``img`` to the global-shutter reference view of ``model``.

    Each output pixel is mapped back into the input with
    :func:`unrectify_points` and sampled bilinearly; uncovered pixels are
    black. The model is in pixels with the origin at the image center.
    """
    H, W = img.height, img.width
    center = img.center()
    ii, jj = np.mgrid[0:H, 0:W]
    g = np.c_[ii.ravel() - center[0], jj.ravel() - center[1]]
    x = unrectify_points(g, model, max_iter=max_iter, tol=tol)
    vals = bilinear_sample(img.data, x[:, 0] + center[0], x[:, 1] + center[1])
    return GrayImage(np.clip(np.rint(vals), 0, 255).reshape(H, W))


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def read_pgm(path):
    """Read a binary 8-bit PGM (P5) file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(raw, pos)
        if m is None:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = tokens
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    pos += 1  # single whitespace after maxval
    data = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=pos)
    return GrayImage(data.reshape(h, w))


def write_pgm(path, img):
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        fh.write(img.data.tobytes())
