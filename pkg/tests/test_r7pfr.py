import numpy as np
import pytest

from conftest import candidate_vector, relaxed_dataset, truth_vector
from oracles import match_one_to_one, newton_roots, real_roots_in_box
from rspose import template
from rspose.r7pf import build_row3_system, nullspace_param
from rspose.r7pfr import (
    MONOMIALS,
    ReducedSystem5,
    build_row1_system_r,
    reduce_system,
    solve_5quadrics,
    solve_inner_r7pfr,
)


def truth_values(ds, corrs):
    truth, f, lam = truth_vector(ds)
    ns = nullspace_param(build_row3_system(corrs, np.zeros(3)))
    y = np.r_[np.zeros(3), truth[0:3], truth[3:5], truth[6:8], 1.0]
    b1, b2, b3 = ns.beta_of(y)
    vals = {"b1": b1, "b2": b2, "b3": b3, "C0z": truth[5], "tz": truth[8], "q": 1 / f, "lam": lam}
    return ns, vals


def test_row1_system_vanishes_at_truth():
    for seed in range(20):
        ds, corrs = relaxed_dataset(seed, lam=-0.3)
        ns, vals = truth_values(ds, corrs)
        sys7 = build_row1_system_r(corrs, ns, np.zeros(3))
        assert sys7.coeffs.shape == (7, len(MONOMIALS))
        assert np.abs(sys7.evaluate(vals)).max() < 1e-10


def test_reduced_system_keeps_truth():
    ds, corrs = relaxed_dataset(3, lam=-0.2)
    ns, vals = truth_values(ds, corrs)
    sys5 = reduce_system(build_row1_system_r(corrs, ns, np.zeros(3)))
    sol = [vals[k] for k in ("b1", "b2", "b3", "q", "lam")]
    assert np.abs(sys5.evaluate(sol)).max() < 1e-10
    roots = solve_5quadrics(sys5)
    assert np.min(np.abs(roots - np.array(sol)).max(axis=1)) < 1e-8


def test_random_systems_have_ten_roots(rng):
    for _ in range(50):
        sys5 = ReducedSystem5(rng.normal(size=(5, 12)), np.zeros((2, 14)))
        roots = solve_5quadrics(sys5)
        assert len(roots) == 10
        for z in roots:
            assert np.abs(sys5.evaluate(z)).max() < 1e-6


def test_roots_match_newton_oracle():
    rng = np.random.default_rng(7)
    for _ in range(15):
        sys5 = ReducedSystem5(rng.normal(size=(5, 12)), np.zeros((2, 14)))
        ours = real_roots_in_box(solve_5quadrics(sys5))
        assert match_one_to_one(ours, newton_roots(sys5))


def test_exact_recovery_with_distortion():
    for seed in range(50):
        lam_true = -0.2 if seed % 2 == 0 else np.random.default_rng(seed).uniform(-0.5, 0.1)
        ds, corrs = relaxed_dataset(seed, lam=lam_true)
        truth, f, lam = truth_vector(ds)
        best = solve_inner_r7pfr(corrs)[0]
        assert abs(best.lam - lam) < 1e-8
        assert abs(best.f - f) / f < 1e-8
        assert np.abs(candidate_vector(best) - truth).max() < 1e-8


def test_zero_distortion_is_recovered():
    ds, corrs = relaxed_dataset(5, lam=0.0)
    assert abs(solve_inner_r7pfr(corrs)[0].lam) < 1e-10


def test_needs_seven_points():
    _, corrs = relaxed_dataset(1)
    with pytest.raises(ValueError):
        solve_inner_r7pfr(corrs.subset(np.arange(8) % 7))


def test_shipped_template_is_reproducible():
    shipped = template.load()
    fresh = template.generate()
    assert np.array_equal(np.array(fresh["nodes"]), shipped["nodes"])
    assert fresh["template_shape"] == shipped["template_shape"] == [5, 15]
    assert shipped["action_matrix_size"] == 10
    assert shipped["interpolation_condition"] < 100


def test_template_interpolates_quartics(rng):
    t = template.load()
    exps = np.array(t["homogeneous_monomials"])
    coeffs = rng.normal(size=len(exps))
    vals = np.prod(t["nodes"][:, None, :] ** exps[None], axis=2) @ coeffs
    assert np.allclose(t["interpolation_inverse"] @ vals, coeffs, atol=1e-10)


def test_action_structure_covers_basis():
    kinds = template.action_structure()
    assert len(kinds) == 10
    assert sum(k == "quartic" for k, _ in kinds) == 4
