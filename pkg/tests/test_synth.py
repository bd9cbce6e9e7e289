import numpy as np
import pytest

from rspose.geom import project_gs, residual_reprojection_px, camera_center
from rspose.synth import SynthConfig, generate


def test_static_noiseless_data_is_pinhole():
    ds = generate(SynthConfig(n_points=50, seed=2))
    m = ds.model
    ref = project_gs(ds.corrs.scene, m.f, ds.R0, camera_center(ds.R0, m.c0))
    assert np.abs(ds.corrs.image - ref).max() < 1e-10


def test_identity_orientation():
    ds = generate(SynthConfig(orientation_mode="identity", seed=3))
    assert np.array_equal(ds.R0, np.eye(3))


def test_camera_faces_the_cube():
    for seed in range(20):
        ds = generate(SynthConfig(seed=seed))
        C = camera_center(ds.R0, ds.model.c0)
        assert 1.0 <= np.linalg.norm(C) <= 4.0
        # the cube center projects to the principal point
        assert np.allclose((ds.R0 @ -C)[:2], 0.0, atol=1e-12)


def test_noise_within_three_sigma():
    ds = generate(SynthConfig(n_points=2000, noise_px=1.0, rot_velocity_max=30,
                              trans_velocity_max=0.1, lambda_true=-0.2, seed=4))
    d = residual_reprojection_px(ds.corrs.image, ds.corrs.scene, ds.model, ds.R0)
    assert np.mean(d < 3.0) >= 0.99
    assert np.isclose(np.sqrt(np.mean(d**2)), 1.0, rtol=0.1)


def test_points_inside_image():
    cfg = SynthConfig(n_points=300, rot_velocity_max=30, trans_velocity_max=0.1,
                      lambda_true=-0.4, seed=5)
    ds = generate(cfg)
    assert np.all(np.abs(ds.corrs.image) <= [cfg.height / 2, cfg.width / 2])


def test_outlier_labels():
    ds = generate(SynthConfig(n_points=200, outlier_fraction=0.5, noise_px=1.0, seed=6))
    assert ds.is_outlier.sum() == 100
    assert len(ds.inliers) == 100


def test_exact_motion_magnitudes():
    cfg = SynthConfig(rot_velocity_max=30, trans_velocity_max=0.1, exact_motion=True, seed=7)
    ds = generate(cfg)
    d = np.linalg.norm(camera_center(ds.R0, ds.model.c0))
    assert np.isclose(np.degrees(np.linalg.norm(ds.model.w)) * cfg.height, 30.0)
    assert np.isclose(np.linalg.norm(ds.model.t) * cfg.height, 0.1 * d)


def test_regeneration_is_bitwise_identical():
    cfg = SynthConfig(n_points=30, noise_px=1.0, outlier_fraction=0.2, rot_velocity_max=10, seed=8)
    a, b = generate(cfg), generate(cfg)
    assert np.array_equal(a.corrs.image, b.corrs.image)
    assert np.array_equal(a.corrs.scene, b.corrs.scene)
    assert np.array_equal(a.is_outlier, b.is_outlier)


def test_focal_from_fov():
    cfg = SynthConfig()
    assert np.isclose(cfg.focal_px, 1000 * np.sqrt(3))
    assert np.isclose(cfg.scale, 1000 * np.sqrt(2))


@pytest.mark.parametrize(
    "kwargs",
    [{"outlier_fraction": 1.0}, {"noise_px": -1}, {"distance_range": (0, 1)},
     {"orientation_mode": "up"}, {"projection": "affine"}],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)
