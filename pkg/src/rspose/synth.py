"""Synthetic scenes: random points in a unit cube seen by a moving RS camera."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .geom import Correspondences, RsCameraModel, project_rs_batch


@dataclass(frozen=True)
class SynthConfig:
    """Scene and camera settings.

    Velocities are given per frame, where one frame is the readout of all
    ``height`` rows: ``rot_velocity_max`` in degrees and
    ``trans_velocity_max`` as a fraction of the camera distance. With
    ``exact_motion`` the magnitudes equal the maxima instead of being drawn
    uniformly below them. ``lambda_true`` is in normalized units (image
    coordinates divided by half the diagonal). ``noise_px`` is the RMS length
    of the 2D pixel noise vector.
    """

    n_points: int = 7
    cube_side: float = 1.0
    fov_deg: float = 60.0
    distance_range: tuple = (1.0, 4.0)
    rot_velocity_max: float = 0.0
    trans_velocity_max: float = 0.0
    exact_motion: bool = False
    lambda_true: float = 0.0
    noise_px: float = 0.0
    outlier_fraction: float = 0.0
    orientation_mode: str = "random"
    projection: str = "exact"
    fixed_center: bool = False
    seed: int = 0
    width: int = 2000
    height: int = 2000

    def __post_init__(self):
        if self.n_points < 1 or self.cube_side <= 0 or not 0 < self.fov_deg < 180:
            raise ValueError("invalid scene size or field of view")
        lo, hi = self.distance_range
        if not 0 < lo <= hi:
            raise ValueError("invalid distance range")
        if min(self.rot_velocity_max, self.trans_velocity_max, self.noise_px) < 0:
            raise ValueError("velocities and noise must be non-negative")
        if not 0 <= self.outlier_fraction < 1:
            raise ValueError("outlier_fraction must be in [0, 1)")
        if self.orientation_mode not in ("identity", "random"):
            raise ValueError("orientation_mode must be 'identity' or 'random'")
        if self.projection not in ("exact", "double_linearized"):
            raise ValueError("projection must be 'exact' or 'double_linearized'")

    @property
    def scale(self):
        """Half the image diagonal, the normalization constant."""
        return 0.5 * float(np.hypot(self.width, self.height))

    @property
    def focal_px(self):
        return 0.5 * self.width / np.tan(np.radians(self.fov_deg) / 2)


@dataclass(frozen=True)
class SynthDataset:
    corrs: Correspondences
    model: RsCameraModel
    R0: np.ndarray
    is_outlier: np.ndarray
    config: SynthConfig

    @property
    def scale(self):
        return self.config.scale

    @property
    def inliers(self):
        return self.corrs.subset(np.flatnonzero(~self.is_outlier))


def _unit(rng, n=None):
    v = rng.standard_normal(3 if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _look_at(rng, direction):
    """World-to-camera rotation looking along ``-direction`` with random roll."""
    z = -direction
    x = np.cross(z, _unit(rng))
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def generate(cfg=SynthConfig()):
    """Draw one dataset. Identical configs (including seed) give identical data."""
    rng = np.random.default_rng(cfg.seed)
    d = rng.uniform(*cfg.distance_range)
    if cfg.orientation_mode == "identity":
        R0 = np.eye(3)
        center = np.array([0.0, 0.0, -d])
    else:
        u = _unit(rng)
        R0 = _look_at(rng, u)
        center = d * u
    c0 = -R0 @ center

    rot = np.radians(cfg.rot_velocity_max)
    trans = cfg.trans_velocity_max * d
    if not cfg.exact_motion:
        rot *= rng.uniform()
        trans *= rng.uniform()
    w = _unit(rng) * rot / cfg.height
    t = _unit(rng) * trans / cfg.height
    if cfg.fixed_center:
        t = np.cross(w, c0)
    f = cfg.focal_px
    lam_px = cfg.lambda_true / cfg.scale**2
    cam = RsCameraModel(np.zeros(3), w, c0, t, f, lam_px, 0.0)

    half = np.array([cfg.height, cfg.width]) / 2.0
    n = cfg.n_points
    X = np.zeros((n, 3))
    x = np.zeros((n, 2))
    todo = np.arange(n)
    for _ in range(1000):
        X[todo] = rng.uniform(-0.5, 0.5, (len(todo), 3)) * cfg.cube_side
        p, ok = project_rs_batch(
            X[todo], cam, R0, mode=cfg.projection, fixed_center=cfg.fixed_center, tol=1e-11
        )
        ok &= np.all(np.abs(np.nan_to_num(p, nan=np.inf)) <= half, axis=1)
        x[todo[ok]] = p[ok]
        todo = todo[~ok]
        if todo.size == 0:
            break
    if todo.size:
        raise RuntimeError("could not place all points inside the image")

    if cfg.noise_px > 0:
        x = x + rng.normal(0.0, cfg.noise_px / np.sqrt(2.0), x.shape)
    is_outlier = np.zeros(n, dtype=bool)
    n_out = int(round(cfg.outlier_fraction * n))
    if n_out:
        idx = rng.permutation(n)[:n_out]
        is_outlier[idx] = True
        x[idx] = rng.uniform(-half, half, (n_out, 2))
    return SynthDataset(Correspondences(x, X, cfg.scale), cam, R0, is_outlier, cfg)


def config_dict(cfg):
    d = asdict(cfg)
    d["distance_range"] = list(cfg.distance_range)
    return d
