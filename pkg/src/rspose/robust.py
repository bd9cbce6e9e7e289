"""RANSAC over seven-point samples and local optimization on the inliers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .driver import SOLVERS, IterConfig, run
from .errors import NoModelFound, RsPoseError
from .geom import (
    RsCameraModel,
    project_rs_batch,
    residual_reprojection_px,
    rotation_exp,
    total_rotation,
    v_from_rotation,
)

SAMPLE_SIZE = 7
# residual component assigned to points that cannot be projected during LO
_FAILED_RESIDUAL = 1e4


@dataclass(frozen=True)
class RansacConfig:
    max_iterations: int = 1000
    inlier_threshold_px: float = 2.0
    confidence: float = 0.99
    seed: int = 0
    solver_kind: str = "R7Pfr"
    iter_config: IterConfig = field(default_factory=IterConfig)

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.inlier_threshold_px <= 0:
            raise ValueError("inlier_threshold_px must be positive")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must be in (0, 1)")
        if self.solver_kind not in SOLVERS:
            raise ValueError(f"solver_kind must be one of {SOLVERS}")


@dataclass(frozen=True)
class RansacResult:
    model: RsCameraModel
    r_gs: np.ndarray
    inlier_mask: np.ndarray
    inlier_count: int
    iterations_run: int
    seed: int
    mean_inlier_residual: float = np.inf

    def __post_init__(self):
        mask = np.asarray(self.inlier_mask, dtype=bool)
        object.__setattr__(self, "inlier_mask", mask)
        if int(mask.sum()) != self.inlier_count:
            raise ValueError("inlier_count must equal the number of inliers in the mask")


def required_iterations(inlier_ratio, confidence, sample_size=SAMPLE_SIZE):
    """Samples needed to draw one all-inlier sample with the given confidence."""
    p = inlier_ratio**sample_size
    if p <= 0:
        return np.inf
    if p >= 1:
        return 1
    return float(np.ceil(np.log(1 - confidence) / np.log(1 - p)))


def score(corrs, model, r_gs, threshold):
    """Inlier mask and mean inlier residual of a model on all correspondences."""
    d = residual_reprojection_px(corrs.image, corrs.scene, model, r_gs)
    mask = d < threshold
    mean = float(d[mask].mean()) if mask.any() else np.inf
    return mask, mean


def _hypothesis(corrs, cfg, i):
    rng = np.random.default_rng([cfg.seed, i])
    sample = rng.choice(len(corrs), SAMPLE_SIZE, replace=False)
    icfg = replace(cfg.iter_config, solver_kind=cfg.solver_kind)
    try:
        est = run(corrs.subset(sample), icfg)
    except (RsPoseError, np.linalg.LinAlgError):
        return None
    mask, mean = score(corrs, est.model, est.r_gs, cfg.inlier_threshold_px)
    return est, mask, mean


def ransac(corrs, cfg=RansacConfig(), *, workers=1):
    """Hypothesize-and-test over random seven-point samples.

    Hypothesis ``i`` draws its sample from a generator seeded by
    ``(cfg.seed, i)`` and hypotheses are folded into the best model in index
    order, so any ``workers`` count gives the same result.
    """
    if len(corrs) < SAMPLE_SIZE:
        raise NoModelFound(f"need at least {SAMPLE_SIZE} correspondences, got {len(corrs)}")
    best = None
    bound = cfg.max_iterations
    i = 0
    batch = max(1, int(workers))
    pool = ThreadPoolExecutor(batch) if batch > 1 else None
    try:
        while i < bound:
            idx = range(i, min(i + batch, bound))
            if pool is None:
                outs = [_hypothesis(corrs, cfg, j) for j in idx]
            else:
                outs = list(pool.map(lambda j: _hypothesis(corrs, cfg, j), idx))
            for out in outs:
                i += 1
                if out is not None:
                    est, mask, mean = out
                    count = int(mask.sum())
                    if best is None or (count, -mean) > (best[1], -best[2]):
                        best = (est, count, mean, mask)
                        need = required_iterations(count / len(corrs), cfg.confidence)
                        bound = int(min(cfg.max_iterations, max(need, 1)))
                if i >= bound:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    if best is None:
        raise NoModelFound("no sample produced a feasible model")
    est, count, mean, mask = best
    return RansacResult(est.model, est.r_gs, mask, count, i, cfg.seed, mean)


def _pack(model, scale):
    m = model.normalized(scale)
    return np.concatenate([np.zeros(3), m.w, m.c0, m.t, [m.f, m.lam]])


def _unpack(p, R_ref, r_gs, scale, r0):
    R = rotation_exp(p[:3]) @ R_ref
    v = v_from_rotation(R @ r_gs.T)
    m = RsCameraModel(v, p[3:6], p[6:9], p[9:12], p[12], p[13], r0 / scale)
    return m.denormalized(scale)


def _residuals(p, x, X, R_ref, r_gs, scale, r0):
    cam = _unpack(p, R_ref, r_gs, scale, r0)
    R = rotation_exp(p[:3]) @ R_ref
    pred, ok = project_rs_batch(X, cam, R)
    res = pred - x
    res[~ok] = _FAILED_RESIDUAL
    return res.ravel()


def reprojection_cost(corrs, mask, model, r_gs):
    """Sum of squared pixel reprojection errors over the masked points."""
    d = residual_reprojection_px(corrs.image[mask], corrs.scene[mask], model, r_gs)
    return float(np.sum(np.minimum(d, np.sqrt(2) * _FAILED_RESIDUAL) ** 2))


def local_optimize(corrs, inliers, init, *, max_iterations=50, tol=1e-10):
    """Refine all camera parameters on the inliers with damped least squares.

    The orientation is updated multiplicatively through the exponential map
    and re-expressed as ``v`` relative to ``init.r_gs``. Returns the refined
    model, or ``init.model`` when the refinement does not lower the cost.
    """
    mask = np.asarray(inliers, dtype=bool)
    if mask.sum() < SAMPLE_SIZE:
        return init.model
    model, r_gs = init.model, np.asarray(init.r_gs, dtype=float)
    scale = corrs.norm_scale
    R_ref = total_rotation(model, r_gs)
    x, X = corrs.image[mask], corrs.scene[mask]
    args = (x, X, R_ref, r_gs, scale, model.r0)
    p0 = _pack(model, scale)
    c_init = reprojection_cost(corrs, mask, model, r_gs)
    try:
        sol = least_squares(
            _residuals,
            p0,
            args=args,
            jac="3-point",
            method="trf",
            x_scale="jac",
            ftol=tol,
            xtol=1e-12,
            gtol=1e-12,
            max_nfev=max_iterations,
        )
    except (ValueError, np.linalg.LinAlgError):
        return model
    refined = _unpack(sol.x, *args[2:])
    if not np.isfinite(refined.params()).all():
        return model
    if reprojection_cost(corrs, mask, refined, r_gs) <= c_init:
        return refined
    return model


def refine(corrs, result, cfg=RansacConfig(), *, max_rounds=10):
    """Local optimization with guarded acceptance of the inlier set.

    Each round refines on the current inliers and rescores all points at the
    same threshold. A round is kept only when it does not lose inliers, so
    the inlier count never decreases; rounds stop once the set is stable.
    """
    for _ in range(max_rounds):
        model = local_optimize(corrs, result.inlier_mask, result)
        if model is result.model:
            break
        mask, mean = score(corrs, model, result.r_gs, cfg.inlier_threshold_px)
        count = int(mask.sum())
        if count < result.inlier_count:
            break
        stable = np.array_equal(mask, result.inlier_mask)
        result = replace(
            result, model=model, inlier_mask=mask, inlier_count=count, mean_inlier_residual=mean
        )
        if stable:
            break
    return result
