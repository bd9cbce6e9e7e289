import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation

from rspose.errors import BehindCamera, DegenerateDistortion
from rspose.geom import (
    Correspondences,
    RsCameraModel,
    camera_center,
    distort_division,
    nearest_rotation,
    orientation_from_v,
    project_gs,
    project_rs_batch,
    project_rs_exact,
    residual_double_lin,
    residual_reprojection_px,
    rotation_angle,
    rotation_exp,
    rotation_log,
    skew,
    undistort_division,
    v_from_rotation,
)
from rspose.synth import SynthConfig, generate

vec3 = arrays(np.float64, 3, elements=st.floats(-3, 3))


@given(vec3, vec3)
def test_skew_is_cross_product(a, b):
    assert np.allclose(skew(a) @ b, np.cross(a, b), atol=1e-12)
    assert np.allclose(skew(a), -skew(a).T)


def test_rotation_exp_matches_scipy(rng):
    a = rng.normal(size=(200, 3)) * rng.uniform(0, 3, (200, 1))
    ours = rotation_exp(a)
    ref = Rotation.from_rotvec(a).as_matrix()
    assert np.abs(ours - ref).max() < 1e-12


def test_rotation_exp_small_angles():
    a = np.array([1e-10, -2e-10, 3e-11])
    assert np.allclose(rotation_exp(a), Rotation.from_rotvec(a).as_matrix(), atol=1e-15)


def test_rotation_log_matches_scipy(rng):
    for _ in range(200):
        R = Rotation.random(random_state=rng.integers(1 << 31))
        assert np.allclose(rotation_log(R.as_matrix()), R.as_rotvec(), atol=1e-9)


def test_rotation_log_near_pi():
    a = np.array([0.0, 0.0, np.pi - 1e-9])
    assert np.allclose(rotation_log(rotation_exp(a)), a, atol=1e-6)


def test_rotation_angle_of_one_degree(rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    R = rotation_exp(np.radians(1.0) * axis)
    assert abs(np.degrees(rotation_angle(R)) - 1.0) < 1e-9


@given(vec3)
def test_v_from_rotation_inverts_polar_projection(v):
    v = v * 0.5
    assert np.allclose(v_from_rotation(orientation_from_v(v)), v, atol=1e-9)


def test_nearest_rotation_is_rotation(rng):
    R = nearest_rotation(rng.normal(size=(3, 3)))
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.isclose(np.linalg.det(R), 1.0)


def test_orientation_from_v_angle_is_atan():
    v = np.array([0.3, -0.1, 0.2])
    assert np.isclose(rotation_angle(orientation_from_v(v)), np.arctan(np.linalg.norm(v)))


@settings(max_examples=200)
@given(
    arrays(np.float64, (5, 2), elements=st.floats(-1, 1)),
    st.floats(-0.2, 0.1),
)
def test_division_model_round_trip(p, lam):
    x = distort_division(p, lam)
    h = undistort_division(x, lam)
    assert np.allclose(h[:, :2] / h[:, 2:3], p, atol=1e-12)


def test_undistort_division_hand_values():
    h = undistort_division(np.array([[0.5, 1.0]]), -0.2)
    assert np.allclose(h, [[0.5, 1.0, 1.0 - 0.2 * 1.25]])


def test_undistort_division_rejects_infinity():
    with pytest.raises(DegenerateDistortion):
        undistort_division(np.array([[1.0, 0.0]]), -1.0)


def test_distort_division_outside_domain():
    with pytest.raises(DegenerateDistortion):
        distort_division(np.array([[2.0, 0.0]]), 0.5)


def test_static_camera_reduces_to_perspective(rng):
    worst = 0.0
    for _ in range(1000):
        R0 = Rotation.random(random_state=rng.integers(1 << 31)).as_matrix()
        C = rng.normal(size=3)
        X = C + R0.T @ np.r_[rng.normal(size=2), rng.uniform(2, 5)]
        f = rng.uniform(500, 2000)
        lam = rng.uniform(-1e-7, 0)
        cam = RsCameraModel(c0=-R0 @ C, f=f, lam=lam)
        a = project_rs_exact(X, cam, R0)
        b = project_gs(X, f, R0, C, lam)
        worst = max(worst, np.abs(a - b).max())
    assert worst < 1e-12


def test_project_rs_row_is_consistent(rng):
    ds = generate(SynthConfig(n_points=50, rot_velocity_max=30, trans_velocity_max=0.1, seed=3))
    m = ds.model
    x = ds.corrs.image
    # the row a point is measured on is the row whose pose projects it there
    R = rotation_exp((x[:, 0] - m.r0)[:, None] * m.w) @ ds.R0
    Xc = np.einsum("nij,nj->ni", R, ds.corrs.scene) + m.c0 + (x[:, 0] - m.r0)[:, None] * m.t
    assert np.allclose(m.f * Xc[:, :2] / Xc[:, 2:3], x, atol=1e-7)


def test_project_rs_exact_behind_camera():
    cam = RsCameraModel(c0=np.array([0, 0, -5.0]), f=100.0)
    with pytest.raises(BehindCamera):
        project_rs_exact(np.zeros(3), cam)


def test_project_rs_batch_flags_failures():
    cam = RsCameraModel(c0=np.array([0, 0, 1.0]), f=100.0)
    pts, ok = project_rs_batch(np.array([[0, 0, 0.0], [0, 0, -3.0]]), cam)
    assert ok.tolist() == [True, False]
    assert np.allclose(pts[0], 0.0)


def test_reprojection_residual_of_true_model():
    ds = generate(SynthConfig(n_points=30, rot_velocity_max=30, trans_velocity_max=0.1,
                              lambda_true=-0.3, seed=5))
    d = residual_reprojection_px(ds.corrs.image, ds.corrs.scene, ds.model, ds.R0)
    assert d.max() < 1e-6


def test_reprojection_residual_scores_failures_as_inf():
    cam = RsCameraModel(c0=np.array([0, 0, 1.0]), f=100.0)
    d = residual_reprojection_px(np.zeros((1, 2)), np.array([[0, 0, -3.0]]), cam)
    assert np.isinf(d[0])


def test_double_linearized_residual_vanishes_on_its_own_model(rng):
    cam = RsCameraModel(
        v=rng.normal(size=3) * 0.1,
        w=rng.normal(size=3) * 0.2,
        c0=np.array([0.1, -0.2, 3.0]),
        t=rng.normal(size=3) * 0.1,
        f=1.3,
        lam=-0.2,
    )
    X = rng.uniform(-0.5, 0.5, (7, 3))
    x, ok = project_rs_batch(X, cam, mode="double_linearized", tol=1e-14)
    assert ok.all()
    assert residual_double_lin(x, X, cam).max() < 1e-12
    assert residual_double_lin(x + 0.01, X, cam).min() > 1e-4


def test_model_normalization_round_trip(rng):
    cam = RsCameraModel(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3),
                        rng.normal(size=3), 1700.0, -1e-7, 3.0)
    back = cam.normalized(1414.2).denormalized(1414.2)
    assert np.allclose(back.params(), cam.params(), rtol=1e-14)
    n = cam.normalized(1000.0)
    assert np.isclose(n.f, 1.7) and np.isclose(n.lam, -0.1)


def test_camera_center():
    R = rotation_exp(np.array([0, 0.3, 0]))
    C = np.array([1.0, 2.0, 3.0])
    assert np.allclose(camera_center(R, -R @ C), C)


def test_correspondences_validation():
    with pytest.raises(ValueError):
        Correspondences(np.zeros((3, 2)), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        Correspondences(np.full((1, 2), np.nan), np.zeros((1, 3)))
    c = Correspondences(np.array([[3.0, 4.0]]), np.zeros((1, 3)))
    assert len(c) == 1 and c.norm_scale == 5.0
