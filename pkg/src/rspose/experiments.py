"""Synthetic sweeps over motion and distortion strength."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .driver import IterConfig, run
from .errors import RsPoseError
from .evaluate import pose_errors
from .synth import SynthConfig, generate

AXES = ("rot_velocity", "trans_velocity", "lambda")
N_INCREMENTS = 10
METRICS = ("rot_err_deg", "center_err", "focal_rel_err", "lambda_abs_err")


@dataclass(frozen=True)
class SweepSpec:
    """A sweep of one axis from 0 to ``max_value`` in ten increments.

    ``joint_trans_max`` sweeps the translational velocity in lockstep with
    the rotational one (the combined motion experiment); other scene settings
    come from ``base``. Trial ``j`` of every increment uses seed
    ``base.seed + j`` so the increments share scenes.
    """

    axis: str
    max_value: float
    trials: int = 1000
    solvers: tuple = ("R7Pf", "R7Pfr")
    base: SynthConfig = SynthConfig()
    iter_config: IterConfig = IterConfig()
    joint_trans_max: float = 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def values(self):
        return np.linspace(0.0, self.max_value, N_INCREMENTS)

    def config(self, k, trial):
        frac = k / (N_INCREMENTS - 1)
        value = self.values()[k]
        cfg = replace(self.base, seed=self.base.seed + trial)
        if self.axis == "rot_velocity":
            cfg = replace(cfg, rot_velocity_max=value)
            if self.joint_trans_max:
                cfg = replace(cfg, trans_velocity_max=frac * self.joint_trans_max)
        elif self.axis == "trans_velocity":
            cfg = replace(cfg, trans_velocity_max=value)
        else:
            cfg = replace(cfg, lambda_true=value)
        return cfg


def run_trial(cfg, solver, iter_config):
    """Errors of one solve, or None when the solver finds no model."""
    ds = generate(cfg)
    try:
        est = run(ds.corrs, replace(iter_config, solver_kind=solver))
    except (RsPoseError, np.linalg.LinAlgError):
        return None
    e = pose_errors(est, ds)
    return [getattr(e, m) for m in METRICS] + [est.iterations, est.converged]


def sweep(spec, *, workers=1):
    """Rows of per-increment statistics, ordered by increment then solver.

    Failed trials are counted and excluded from the means and medians.
    """
    rows = []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for k, value in enumerate(spec.values()):
            cfgs = [spec.config(k, j) for j in range(spec.trials)]
            for solver in spec.solvers:
                def job(c, solver=solver):
                    return run_trial(c, solver, spec.iter_config)

                outs = list(pool.map(job, cfgs)) if pool else [job(c) for c in cfgs]
                rows.append(_summarize(spec, k, value, solver, outs))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def _summarize(spec, k, value, solver, outs):
    ok = np.array([o for o in outs if o is not None], dtype=float).reshape(-1, len(METRICS) + 2)
    row = {
        "axis": spec.axis,
        "increment": k,
        "value": float(value),
        "solver": solver,
        "trials": len(outs),
        "failures": len(outs) - len(ok),
    }
    for i, m in enumerate(METRICS):
        col = ok[:, i]
        row[f"mean_{m}"] = float(col.mean()) if len(col) else np.nan
        row[f"median_{m}"] = float(np.median(col)) if len(col) else np.nan
    row["mean_iterations"] = float(ok[:, -2].mean()) if len(ok) else np.nan
    row["converged_fraction"] = float(ok[:, -1].sum() / len(outs))
    return row


def write_csv(path, rows):
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
