"""Iterative outer loop: pre-rotate, solve with frozen ``v_hat``, update."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dlt import dlt_pose, prerotate
from .errors import NoFeasibleSolution
from .geom import Correspondences
from .r7pf import solve_inner_r7pf
from .r7pfr import solve_inner_r7pfr

SOLVERS = ("R7Pf", "R7Pfr")


@dataclass(frozen=True)
class IterConfig:
    """Outer-loop settings.

    ``init`` selects the pre-rotation: ``"dlt"`` estimates it from the sample,
    ``"identity"`` skips it (scene already roughly aligned with the camera).
    """

    k_max: int = 5
    eps_err: float = 1e-10
    solver_kind: str = "R7Pf"
    init: str = "dlt"
    gep_size: int = 6

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.eps_err <= 0:
            raise ValueError("eps_err must be positive")
        if self.solver_kind not in SOLVERS:
            raise ValueError(f"solver_kind must be one of {SOLVERS}")
        if self.init not in ("dlt", "identity"):
            raise ValueError("init must be 'dlt' or 'identity'")


@dataclass(frozen=True)
class IterResult:
    """Outcome of :func:`run`. ``model`` is in pixel units."""

    model: object
    r_gs: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    scale: float = 1.0
    residual_history: tuple = field(default_factory=tuple)
    n_candidates: tuple = field(default_factory=tuple)

    @property
    def model_normalized(self):
        return self.model.normalized(self.scale)


def inner_solve(corrs, v_hat, cfg):
    if cfg.solver_kind == "R7Pf":
        return solve_inner_r7pf(corrs, v_hat, gep_size=cfg.gep_size)
    return solve_inner_r7pfr(corrs, v_hat)


def run(corrs, cfg=IterConfig()):
    """Estimate the RS camera from exactly seven correspondences.

    Image points are centered pixel coordinates; they are divided by
    ``corrs.norm_scale`` before solving and the model is scaled back.
    """
    if len(corrs) != 7:
        raise ValueError("the iterative solver needs exactly 7 correspondences")
    scale = corrs.norm_scale
    norm = Correspondences(corrs.image / scale, corrs.scene, 1.0)
    if cfg.init == "dlt":
        r_gs = dlt_pose(norm).r_gs
    else:
        r_gs = np.eye(3)
    rot = prerotate(norm, r_gs)

    best = None
    prev_err = np.inf
    history = []
    counts = []
    k = 0
    converged = False
    v_prev = np.zeros(3)
    for k in range(1, cfg.k_max + 1):
        try:
            cands = inner_solve(rot, v_prev, cfg)
        except NoFeasibleSolution:
            if best is None:
                raise
            k -= 1
            break
        err = min(c.residual for c in cands)
        sel = next(c for c in cands if c.residual == err)
        history.append(err)
        counts.append(len(cands))
        best = sel
        v_prev = sel.v
        if err < cfg.eps_err or (k > 1 and abs(err - prev_err) < cfg.eps_err):
            converged = True
            break
        prev_err = err

    return IterResult(
        model=best.model().denormalized(scale),
        r_gs=r_gs,
        iterations=k,
        final_residual=float(best.residual),
        converged=converged,
        scale=scale,
        residual_history=tuple(history),
        n_candidates=tuple(counts),
    )
