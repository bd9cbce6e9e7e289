import numpy as np
import pytest

import rspose.driver as driver
from rspose.driver import IterConfig, run
from rspose.errors import NoFeasibleSolution
from rspose.evaluate import pose_errors
from rspose.synth import SynthConfig, generate


def test_config_validation():
    with pytest.raises(ValueError):
        IterConfig(k_max=0)
    with pytest.raises(ValueError):
        IterConfig(eps_err=0)
    with pytest.raises(ValueError):
        IterConfig(solver_kind="P3P")
    with pytest.raises(ValueError):
        IterConfig(init="random")


@pytest.mark.parametrize("solver, lam", [("R7Pf", 0.0), ("R7Pfr", -0.2)])
def test_exact_relaxed_data_converges_immediately(solver, lam):
    ds = generate(SynthConfig(rot_velocity_max=20, trans_velocity_max=0.1, lambda_true=lam,
                              orientation_mode="identity", projection="double_linearized", seed=2))
    res = run(ds.corrs, IterConfig(solver_kind=solver, init="identity"))
    assert res.converged
    assert res.final_residual < 1e-10
    e = pose_errors(res, ds)
    assert e.rot_err_deg < 1e-7 and e.focal_rel_err < 1e-9


def test_model_is_returned_in_pixels():
    ds = generate(SynthConfig(orientation_mode="identity", seed=4))
    res = run(ds.corrs, IterConfig(init="identity"))
    assert abs(res.model.f - ds.model.f) / ds.model.f < 1e-8
    assert res.scale == ds.scale
    assert np.isclose(res.model_normalized.f, res.model.f / ds.scale)


def test_iteration_reduces_linearization_error():
    ds = generate(SynthConfig(rot_velocity_max=30, trans_velocity_max=0.1, exact_motion=True,
                              orientation_mode="identity", seed=8))
    res = run(ds.corrs, IterConfig(init="identity", k_max=5))
    assert res.residual_history[-1] <= res.residual_history[0]
    assert len(res.residual_history) == res.iterations


def test_identity_rotation_gives_zero_v_on_gs_data():
    # global-shutter data pre-rotated by the DLT rotation leaves no orientation to solve
    ds = generate(SynthConfig(seed=9))
    res = run(ds.corrs, IterConfig(init="dlt"))
    assert np.linalg.norm(res.model.v) < 1e-6


def test_needs_seven_points():
    ds = generate(SynthConfig(n_points=8, seed=1))
    with pytest.raises(ValueError):
        run(ds.corrs)


def test_falls_back_to_previous_iterate(monkeypatch):
    ds = generate(SynthConfig(rot_velocity_max=30, exact_motion=True, orientation_mode="identity",
                              seed=3))
    real = driver.inner_solve
    calls = []

    def flaky(corrs, v_hat, cfg):
        calls.append(1)
        if len(calls) == 2:
            raise NoFeasibleSolution("injected")
        return real(corrs, v_hat, cfg)

    monkeypatch.setattr(driver, "inner_solve", flaky)
    res = run(ds.corrs, IterConfig(init="identity"))
    assert res.iterations == 1 and not res.converged
    assert len(res.residual_history) == 1


def test_first_iteration_failure_propagates(monkeypatch):
    ds = generate(SynthConfig(seed=3))

    def never(corrs, v_hat, cfg):
        raise NoFeasibleSolution("injected")

    monkeypatch.setattr(driver, "inner_solve", never)
    with pytest.raises(NoFeasibleSolution):
        run(ds.corrs)
