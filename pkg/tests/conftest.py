"""Shared fixtures: exact synthetic data for the inner solvers."""

from __future__ import annotations

import numpy as np
import pytest

from rspose.dlt import prerotate
from rspose.geom import Correspondences
from rspose.synth import SynthConfig, generate


def relaxed_dataset(seed, lam=0.0, rot=30.0, trans=0.1, orientation="random"):
    """Seven noiseless points from the double-linearized model with ``v = 0``.

    Returns the dataset and its normalized, pre-rotated correspondences, on
    which the inner solvers with ``v_hat = 0`` are exact.
    """
    ds = generate(
        SynthConfig(
            rot_velocity_max=rot,
            trans_velocity_max=trans,
            lambda_true=lam,
            orientation_mode=orientation,
            projection="double_linearized",
            seed=seed,
        )
    )
    s = ds.scale
    norm = Correspondences(ds.corrs.image / s, ds.corrs.scene, 1.0)
    return ds, prerotate(norm, ds.R0)


def truth_vector(ds):
    """Ground truth ``[w, c0, t]`` in normalized units and ``f``, ``lam``."""
    m = ds.model.normalized(ds.scale)
    return np.concatenate([m.w, m.c0, m.t]), m.f, m.lam


def candidate_vector(c):
    return np.concatenate([c.w, c.c0, c.t])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion and return it."""

    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
