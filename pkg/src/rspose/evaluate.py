"""Accuracy metrics against ground truth and across sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import camera_center, rotation_angle, total_rotation


@dataclass(frozen=True)
class PoseErrors:
    rot_err_deg: float
    center_err: float
    focal_rel_err: float
    lambda_abs_err: float
    inlier_count: int = 0


def estimated_pose(est):
    """Absolute rotation and camera center of an estimate with ``model``/``r_gs``."""
    R = total_rotation(est.model, est.r_gs)
    return R, camera_center(R, est.model.c0)


def pose_errors(est, gt, inlier_count=0):
    """Errors of an estimate against a synthetic dataset.

    Rotation error is the angle of ``R_est R_gt^T``; the center error compares
    camera centers ``-R^T C0``; the distortion error is in normalized units.
    """
    R, C = estimated_pose(est)
    C_gt = camera_center(gt.R0, gt.model.c0)
    s2 = gt.scale**2
    return PoseErrors(
        rot_err_deg=float(np.degrees(rotation_angle(R @ gt.R0.T))),
        center_err=float(np.linalg.norm(C - C_gt)),
        focal_rel_err=float(abs(est.model.f - gt.model.f) / gt.model.f),
        lambda_abs_err=float(abs(est.model.lam - gt.model.lam) * s2),
        inlier_count=int(inlier_count),
    )


def center_stddev(results):
    """Root mean squared distance of estimated camera centers from their mean."""
    if len(results) < 2:
        raise ValueError("need at least two results")
    C = np.array([estimated_pose(r)[1] for r in results])
    return float(np.sqrt(np.mean(np.sum((C - C.mean(axis=0)) ** 2, axis=1))))
