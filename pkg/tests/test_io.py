import json

import numpy as np
import pytest

from rspose.geom import RsCameraModel
from rspose.io import (
    DatasetFile,
    gt_block,
    model_from_dict,
    model_from_gt,
    model_to_dict,
    read_result,
    result_dict,
    write_result,
)
from rspose.synth import SynthConfig, config_dict, generate


def make_file(n=20, labels=True):
    cfg = SynthConfig(n_points=n, outlier_fraction=0.25, noise_px=1.0, rot_velocity_max=10,
                      lambda_true=-0.1, seed=3)
    ds = generate(cfg)
    gt = gt_block(ds.model, ds.R0, cfg.scale, cfg.seed, config_dict(cfg))
    return ds, DatasetFile.from_correspondences(
        ds.corrs, cfg.width, cfg.height, labels=~ds.is_outlier if labels else None, gt=gt
    )


def test_dataset_round_trip_is_exact(tmp_path):
    ds, f = make_file()
    path = tmp_path / "d.txt"
    f.write(path)
    g = DatasetFile.read(path)
    assert (g.width, g.height) == (2000, 2000)
    assert np.array_equal(g.image, f.image)
    assert np.array_equal(g.scene, f.scene)
    assert np.array_equal(g.labels, f.labels)
    m, R0 = model_from_gt(g.gt)
    assert np.array_equal(m.params(), ds.model.params())
    assert np.array_equal(R0, ds.R0)
    assert json.loads(g.gt["config"])["seed"] == 3


def test_centered_coordinates():
    ds, f = make_file(labels=False)
    c = f.correspondences()
    assert np.allclose(c.image, ds.corrs.image, atol=1e-9)
    assert c.scale == pytest.approx(1000 * np.sqrt(2))
    assert f.labels is None


def test_header_and_record_layout():
    _, f = make_file(n=8)
    lines = f.dumps().splitlines()
    assert lines[0] == "RSPOSE v1 2000 2000"
    assert len(lines[1].split()) == 6
    assert "GT" in lines


@pytest.mark.parametrize(
    "text",
    ["", "RSPOSE v2 10 10\n1 2 3 4 5\n", "RSPOSE v1 10 10\n1 2 3\n",
     "RSPOSE v1 10 10\n1 2 3 4 5 1\n1 2 3 4 5\n", "RSPOSE v1 10 10\n1 2 3 4 nan\n"],
)
def test_malformed_datasets(text):
    with pytest.raises(ValueError):
        DatasetFile.loads(text)


def test_result_round_trip(tmp_path, rng):
    m = RsCameraModel(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3),
                      rng.normal(size=3), 1731.9, -3e-8, 0.0)
    res = result_dict("solve", model=m, scale=1414.2, r_gs=np.eye(3), extra={"residual": 1e-12},
                      config={"k_max": 5}, seed=1)
    path = tmp_path / "r.json"
    write_result(path, res)
    back = read_result(path)
    assert np.array_equal(model_from_dict(back["model"]).params(), m.params())
    assert back["model"]["lambda_normalized"] == pytest.approx(-3e-8 * 1414.2**2)
    assert "units" in back and back["error"] is None


def test_model_dict_units():
    d = model_to_dict(RsCameraModel(f=2.0, lam=1e-6), 1000.0)
    assert d["lambda_normalized"] == pytest.approx(1.0)
    assert d["normalization_scale"] == 1000.0
