"""Camera geometry: rotations, the division distortion model and
rolling-shutter projection.

Image points are ``(r, c)`` pairs (row, column) in centered coordinates, with
the principal point and the distortion center at the origin. Scene points are
``(x, y, z)``. All functions are vectorized over the leading axis.

The rolling-shutter camera maps a scene point ``X`` observed at row ``r`` to

    alpha * [r, c, 1 + lam * (r^2 + c^2)] = K (R(r) X + C(r)),   K = diag(f, f, 1)

with ``R(r)`` the orientation and ``C(r) = C0 + (r - r0) t`` the translation at
the time row ``r`` is read out.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BehindCamera, DegenerateDistortion, NoConvergence

_DENOM_EPS = 1e-12


def skew(a):
    """Cross-product matrix: ``skew(a) @ b == np.cross(a, b)``.

    Accepts a 3-vector or an ``(n, 3)`` stack and returns ``(3, 3)`` or
    ``(n, 3, 3)``.
    """
    a = np.asarray(a, dtype=float)
    S = np.zeros(a.shape[:-1] + (3, 3))
    S[..., 0, 1] = -a[..., 2]
    S[..., 0, 2] = a[..., 1]
    S[..., 1, 0] = a[..., 2]
    S[..., 1, 2] = -a[..., 0]
    S[..., 2, 0] = -a[..., 1]
    S[..., 2, 1] = a[..., 0]
    return S


def rotation_exp(a):
    """Rodrigues formula, ``exp(skew(a))``. Vectorized over leading axes."""
    a = np.asarray(a, dtype=float)
    theta = np.linalg.norm(a, axis=-1)[..., None, None]
    K = skew(a)
    K2 = K @ K
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    s = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    c = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + s * K + c * K2


def rotation_log(R):
    """Axis-angle vector of a rotation matrix (angle in ``[0, pi]``)."""
    R = np.asarray(R, dtype=float)
    cos_t = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_t)
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta < 1e-8:
        return 0.5 * w
    if np.pi - theta < 1e-6:
        # near pi the antisymmetric part vanishes; use the symmetric part
        M = (R + np.eye(3)) / 2.0
        axis = M[np.argmax(np.diag(M))]
        axis = axis / np.linalg.norm(axis)
        if np.dot(axis, w) < 0:
            axis = -axis
        return theta * axis
    return theta / (2.0 * np.sin(theta)) * w


def rotation_angle(R):
    """Rotation angle of ``R`` in radians."""
    return float(np.linalg.norm(rotation_log(R)))


def nearest_rotation(M):
    """Orthogonal polar factor of ``M`` with determinant +1."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=float))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def orientation_from_v(v):
    """Rotation closest to the linearized orientation ``I + [v]x``."""
    return nearest_rotation(np.eye(3) + skew(v))


def v_from_rotation(R):
    """Inverse of :func:`orientation_from_v`.

    The polar factor of ``I + [v]x`` rotates by ``atan(|v|)`` about ``v``, so
    a rotation by ``theta < pi/2`` is represented by ``tan(theta) * axis``.
    """
    a = rotation_log(R)
    theta = np.linalg.norm(a)
    if theta < 1e-15:
        return np.zeros(3)
    return np.tan(theta) * a / theta


@dataclass(frozen=True)
class RsCameraModel:
    """Parameters of the relaxed rolling-shutter camera.

    ``v`` is the linearized orientation (relative to any pre-rotation), ``w``
    the angular velocity per row, ``c0`` the translation at the reference row
    ``r0`` and ``t`` the translational velocity per row. Units follow the
    image coordinates the model is used with (pixels unless stated).
    """

    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w: np.ndarray = field(default_factory=lambda: np.zeros(3))
    c0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f: float = 1.0
    lam: float = 0.0
    r0: float = 0.0

    def __post_init__(self):
        for name in ("v", "w", "c0", "t"):
            arr = np.array(getattr(self, name), dtype=float).reshape(3)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "f", float(self.f))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "r0", float(self.r0))

    def normalized(self, scale):
        """Express the model in image coordinates divided by ``scale``."""
        return replace(
            self,
            w=self.w * scale,
            t=self.t * scale,
            f=self.f / scale,
            lam=self.lam * scale**2,
            r0=self.r0 / scale,
        )

    def denormalized(self, scale):
        """Inverse of :meth:`normalized`."""
        return self.normalized(1.0 / scale)

    def params(self):
        """Flat array ``[v, w, c0, t, f, lam]``."""
        return np.concatenate([self.v, self.w, self.c0, self.t, [self.f, self.lam]])


def undistort_division(points, lam):
    """Homogeneous undistorted points ``[r, c, 1 + lam (r^2 + c^2)]``."""
    p = np.asarray(points, dtype=float)
    d = 1.0 + lam * np.sum(p**2, axis=-1)
    if np.any(np.abs(d) < _DENOM_EPS):
        raise DegenerateDistortion("point maps to infinity under the division model")
    return np.concatenate([p, d[..., None]], axis=-1)


def _distortion_factor(rho_u2, lam):
    """Ratio of distorted to undistorted radius; NaN where undefined."""
    disc = 1.0 - 4.0 * lam * rho_u2
    with np.errstate(invalid="ignore"):
        return np.where(disc >= 0.0, 2.0 / (1.0 + np.sqrt(disc)), np.nan)


def distort_division(points, lam):
    """Forward division model: pinhole points to measured points.

    Solves ``lam r_u r_d^2 - r_d + r_u = 0`` for the distorted radius and takes
    the root that tends to ``r_u`` as ``lam -> 0``.
    """
    p = np.asarray(points, dtype=float)
    k = _distortion_factor(np.sum(p**2, axis=-1), lam)
    if np.any(np.isnan(k)):
        raise DegenerateDistortion("no distorted point for this radius and lambda")
    return p * k[..., None]


def _rows_rotation(rows, cam, R0, mode, v_hat):
    dr = rows - cam.r0
    if mode == "exact":
        return rotation_exp(dr[:, None] * cam.w) @ R0
    Wx = skew(cam.w)
    Vx = skew(cam.v)
    I = np.eye(3)
    if mode == "double_linearized":
        return (I + dr[:, None, None] * Wx) @ (I + Vx) @ R0
    if mode == "relaxed":
        Vh = skew(np.zeros(3) if v_hat is None else v_hat)
        return (I + dr[:, None, None] * Wx + Vx + dr[:, None, None] * (Wx @ Vh)) @ R0
    raise ValueError(f"unknown projection mode {mode!r}")


def project_rs_batch(
    X,
    cam,
    R0=None,
    *,
    mode="exact",
    v_hat=None,
    fixed_center=False,
    tol=1e-10,
    max_iter=100,
):
    """Rolling-shutter projection without raising.

    Returns ``(points, ok)`` where ``ok`` flags points that converged, are in
    front of the camera and have a defined distortion. ``mode`` selects the
    orientation model: ``"exact"`` uses ``exp((r - r0)[w]x) R0``;
    ``"double_linearized"`` and ``"relaxed"`` use the first-order models and
    include ``cam.v``. With ``fixed_center`` the translation rotates with the
    camera, i.e. the camera spins about its own center.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    R0 = np.eye(3) if R0 is None else np.asarray(R0, dtype=float)
    rows = np.full(n, cam.r0)
    out = np.full((n, 2), np.nan)
    ok = np.ones(n, dtype=bool)
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        active = ~done & ok
        if not active.any():
            break
        r = rows[active]
        R = _rows_rotation(r, cam, R0, mode, v_hat)
        if fixed_center:
            Rw = rotation_exp((r - cam.r0)[:, None] * cam.w)
            C = Rw @ cam.c0
        else:
            C = cam.c0 + (r - cam.r0)[:, None] * cam.t
        Xc = np.einsum("nij,nj->ni", R, X[active]) + C
        depth = Xc[:, 2]
        front = depth > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            pin = cam.f * Xc[:, :2] / depth[:, None]
        k = _distortion_factor(np.sum(pin**2, axis=1), cam.lam)
        good = front & np.isfinite(k)
        p = pin * k[:, None]
        idx = np.flatnonzero(active)
        ok[idx[~good]] = False
        conv = good & (np.abs(p[:, 0] - r) < tol)
        out[idx[good]] = p[good]
        rows[idx[good]] = p[good, 0]
        done[idx[conv]] = True
    ok &= done
    return out, ok


def project_rs_exact(X, cam, R0=None, **kwargs):
    """Measured (distorted) image points of ``X`` under the exact RS model.

    The row at which a point is observed is found by fixed-point iteration
    started at ``r0``. Raises :class:`BehindCamera`, :class:`NoConvergence` or
    :class:`DegenerateDistortion`.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pts, ok = project_rs_batch(X, cam, R0, **kwargs)
    if not ok.all():
        R0m = np.eye(3) if R0 is None else np.asarray(R0, dtype=float)
        depth = (X @ R0m.T + cam.c0)[:, 2]
        if np.any(depth[~ok] <= 0):
            raise BehindCamera("scene point behind the camera")
        if np.any(np.isnan(pts[~ok])):
            raise DegenerateDistortion("projection leaves the division-model domain")
        raise NoConvergence("row fixed point not reached")
    return pts


def project_gs(X, f, R, C, lam=0.0):
    """Global-shutter projection with camera center ``C`` (not translation)."""
    Xc = (np.atleast_2d(X) - C) @ np.asarray(R).T
    if np.any(Xc[:, 2] <= 0):
        raise BehindCamera("scene point behind the camera")
    pin = f * Xc[:, :2] / Xc[:, 2:3]
    return distort_division(pin, lam) if lam else pin


def residual_double_lin(x, X, cam):
    """Per-point normalized residual of the double-linearized model.

    ``x`` are measured points ``(n, 2)`` and ``X`` scene points ``(n, 3)``
    already expressed in the frame the linearized orientation ``v`` refers to.
    The depth factor is removed with the cross product by the undistorted
    point, and the result is divided by the norm of the model-side vector.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    u = undistort_division(x, cam.lam)
    dr = x[:, 0] - cam.r0
    I = np.eye(3)
    R = (I + dr[:, None, None] * skew(cam.w)) @ (I + skew(cam.v))
    P = np.einsum("nij,nj->ni", R, X) + cam.c0 + dr[:, None] * cam.t
    P = P * np.array([cam.f, cam.f, 1.0])
    e = np.cross(u, P)
    return np.linalg.norm(e, axis=1) / np.linalg.norm(P, axis=1)


def total_rotation(cam, r_gs):
    """Absolute orientation at the reference row: polar(I + [v]x) @ R_GS."""
    return orientation_from_v(cam.v) @ np.asarray(r_gs, dtype=float)


def residual_reprojection_px(x, X, cam, r_gs=None):
    """Pixel distance between measured points and the exact RS projection.

    The linearized orientation of ``cam`` is projected onto SO(3) and composed
    with ``r_gs``. Points that cannot be projected score ``inf``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    R = total_rotation(cam, np.eye(3) if r_gs is None else r_gs)
    pred, ok = project_rs_batch(X, cam, R)
    d = np.linalg.norm(pred - x, axis=1)
    d[~ok] = np.inf
    return d


def camera_center(R, c0):
    """Camera center ``-R^T C0`` for orientation ``R`` and translation ``C0``."""
    return -np.asarray(R).T @ np.asarray(c0)


@dataclass(frozen=True)
class Correspondences:
    """Measured image points ``(n, 2)`` matched to scene points ``(n, 3)``.

    ``scale`` is the normalization constant (half the image diagonal) used
    before solving; when unknown, the largest image radius is used.
    """

    image: np.ndarray
    scene: np.ndarray
    scale: float | None = None

    def __post_init__(self):
        image = np.array(self.image, dtype=float).reshape(-1, 2)
        scene = np.array(self.scene, dtype=float).reshape(-1, 3)
        if image.shape[0] != scene.shape[0]:
            raise ValueError("image and scene point counts differ")
        if not (np.isfinite(image).all() and np.isfinite(scene).all()):
            raise ValueError("correspondences must be finite")
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "scene", scene)

    def __len__(self):
        return self.image.shape[0]

    @property
    def norm_scale(self):
        if self.scale is not None:
            return float(self.scale)
        r = np.linalg.norm(self.image, axis=1).max(initial=0.0)
        return float(r) if r > 0 else 1.0

    def subset(self, idx):
        idx = np.asarray(idx)
        return Correspondences(self.image[idx], self.scene[idx], self.scale)
