"""Global-shutter initialization by the direct linear transform.

Provides the coarse pre-rotation that keeps the residual orientation of the
rolling-shutter solvers small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDegenerate
from .geom import Correspondences
from .numlin import nullspace, rq_decompose


@dataclass(frozen=True)
class GsInitialization:
    r_gs: np.ndarray
    c_gs: np.ndarray
    f_gs: float
    lambda_gs: float = 0.0


def _similarity_2d(x):
    mean = x.mean(axis=0)
    s = np.sqrt(2.0) / max(np.linalg.norm(x - mean, axis=1).mean(), 1e-300)
    T = np.array([[s, 0, -s * mean[0]], [0, s, -s * mean[1]], [0, 0, 1]])
    return T


def _similarity_3d(X):
    mean = X.mean(axis=0)
    s = np.sqrt(3.0) / max(np.linalg.norm(X - mean, axis=1).mean(), 1e-300)
    U = np.eye(4)
    U[:3, :3] *= s
    U[:3, 3] = -s * mean
    return U


def _check_configuration(corrs):
    X = corrs.scene - corrs.scene.mean(axis=0)
    sx = np.linalg.svd(X, compute_uv=False)
    if sx[0] == 0 or sx[2] < 1e-6 * sx[0]:
        raise RankDegenerate("scene points are coplanar")


def dlt_pose(corrs):
    """Uncalibrated pose from six or more correspondences, ignoring RS effects.

    The projection matrix is the smallest right singular vector of the
    Hartley-normalized ``2n x 12`` system; its RQ split gives the rotation,
    the camera center and ``f = mean(K[0, 0], K[1, 1])``.
    """
    if len(corrs) < 6:
        raise ValueError("DLT needs at least 6 correspondences")
    _check_configuration(corrs)
    T = _similarity_2d(corrs.image)
    U = _similarity_3d(corrs.scene)
    n = len(corrs)
    xh = np.c_[corrs.image, np.ones(n)] @ T.T
    Xh = np.c_[corrs.scene, np.ones(n)] @ U.T
    A = np.zeros((2 * n, 12))
    A[0::2, 0:4] = Xh
    A[0::2, 8:12] = -xh[:, [0]] * Xh
    A[1::2, 4:8] = Xh
    A[1::2, 8:12] = -xh[:, [1]] * Xh
    # the rank test on the configuration is done above; RS distortion can make
    # the smallest singular values of A close, which is not a degeneracy
    p, _ = nullspace(A, 1, check=False)
    P = np.linalg.solve(T, p.reshape(3, 4)) @ U
    K, R, C = rq_decompose(P)
    f = 0.5 * (K[0, 0] + K[1, 1])
    return GsInitialization(r_gs=R, c_gs=C, f_gs=float(f))


def prerotate(corrs, r_gs):
    """Rotate the scene points by ``r_gs``; image points are unchanged."""
    return Correspondences(corrs.image, corrs.scene @ np.asarray(r_gs).T, corrs.scale)
