"""Dataset and result files.

A dataset is line-oriented text::

    RSPOSE v1 <width> <height>
    r c X Y Z [inlier_flag]
    ...
    GT
    key value [value ...]

Image coordinates are raw pixels (origin at the top-left pixel center, row
first). Numbers are written with 17 significant digits so reading a file
back reproduces the stored values exactly. Results are JSON objects that
spell out their units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .geom import Correspondences, RsCameraModel

MAGIC = "RSPOSE"
FORMAT_VERSION = "v1"
RESULT_FORMAT = "rspose-result-1"


def _num(x):
    return format(float(x), ".17g")


def image_center(width, height):
    """Principal point ``(row, col)`` in raw pixel coordinates."""
    return np.array([(height - 1) / 2.0, (width - 1) / 2.0])


@dataclass
class DatasetFile:
    width: int
    height: int
    image: np.ndarray  # raw pixel (row, col)
    scene: np.ndarray
    labels: np.ndarray | None = None  # True for inliers
    gt: dict = field(default_factory=dict)

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=float).reshape(-1, 2)
        self.scene = np.asarray(self.scene, dtype=float).reshape(-1, 3)
        if self.image.shape[0] != self.scene.shape[0]:
            raise ValueError("image and scene record counts differ")
        if not (np.isfinite(self.image).all() and np.isfinite(self.scene).all()):
            raise ValueError("all numeric fields must be finite")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool).reshape(-1)
            if self.labels.shape[0] != self.image.shape[0]:
                raise ValueError("one label per record is required")

    def __len__(self):
        return self.image.shape[0]

    @property
    def scale(self):
        """Half the image diagonal."""
        return 0.5 * float(np.hypot(self.width, self.height))

    def correspondences(self):
        """Correspondences in centered pixel coordinates."""
        x = self.image - image_center(self.width, self.height)
        return Correspondences(x, self.scene, self.scale)

    @classmethod
    def from_correspondences(cls, corrs, width, height, labels=None, gt=None):
        x = corrs.image + image_center(width, height)
        return cls(width, height, x, corrs.scene, labels, dict(gt or {}))

    def dumps(self):
        lines = [f"{MAGIC} {FORMAT_VERSION} {int(self.width)} {int(self.height)}"]
        for i in range(len(self)):
            vals = [_num(v) for v in (*self.image[i], *self.scene[i])]
            if self.labels is not None:
                vals.append("1" if self.labels[i] else "0")
            lines.append(" ".join(vals))
        if self.gt:
            lines.append("GT")
            for key, value in self.gt.items():
                if isinstance(value, str):
                    text = value
                else:
                    text = " ".join(_num(v) for v in np.ravel(value))
                lines.append(f"{key} {text}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text, source="<string>"):
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ValueError(f"{source}: empty dataset file")
        head = lines[0].split()
        if len(head) != 4 or head[0] != MAGIC or head[1] != FORMAT_VERSION:
            raise ValueError(f"{source}: expected header '{MAGIC} {FORMAT_VERSION} <width> <height>'")
        width, height = int(head[2]), int(head[3])
        recs, gt = [], {}
        in_gt = False
        for no, ln in enumerate(lines[1:], start=2):
            if ln == "GT":
                in_gt = True
                continue
            if in_gt:
                key, _, value = ln.partition(" ")
                gt[key] = _parse_gt_value(value.strip())
                continue
            parts = ln.split()
            if len(parts) not in (5, 6):
                raise ValueError(f"{source}: line {no}: expected 'r c X Y Z [flag]'")
            recs.append([float(p) for p in parts])
        if not recs:
            raise ValueError(f"{source}: no correspondence records")
        widths = {len(r) for r in recs}
        if len(widths) != 1:
            raise ValueError(f"{source}: inlier flags must be given for all records or none")
        arr = np.array(recs)
        labels = arr[:, 5] != 0 if arr.shape[1] == 6 else None
        return cls(width, height, arr[:, :2], arr[:, 2:5], labels, gt)

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            return cls.loads(fh.read(), source=str(path))


def _parse_gt_value(text):
    try:
        vals = [float(t) for t in text.split()]
    except ValueError:
        return text
    if len(vals) == 1:
        return vals[0]
    return np.array(vals)


def gt_block(model, R0, scale, seed=None, config=None):
    """Ground-truth entries of a dataset file. ``model`` is in pixels."""
    gt = {
        "f_px": model.f,
        "lambda_normalized": model.lam * scale**2,
        "normalization_scale": scale,
        "v": model.v,
        "w_per_row": model.w,
        "c0": model.c0,
        "t_per_row": model.t,
        "r0": model.r0,
        "R0": np.asarray(R0),
    }
    if seed is not None:
        gt["seed"] = float(seed)
    if config is not None:
        gt["config"] = json.dumps(config, sort_keys=True)
    return gt


def model_from_gt(gt):
    """Pixel-unit model and ``R0`` stored in a ground-truth block."""
    scale = float(gt["normalization_scale"])
    model = RsCameraModel(
        v=gt["v"],
        w=gt["w_per_row"],
        c0=gt["c0"],
        t=gt["t_per_row"],
        f=gt["f_px"],
        lam=float(gt["lambda_normalized"]) / scale**2,
        r0=gt["r0"],
    )
    return model, np.asarray(gt["R0"], dtype=float).reshape(3, 3)


def model_to_dict(model, scale):
    return {
        "f_px": model.f,
        "lambda_normalized": model.lam * scale**2,
        "lambda_px": model.lam,
        "normalization_scale": scale,
        "v": model.v.tolist(),
        "w_per_row": model.w.tolist(),
        "c0": model.c0.tolist(),
        "t_per_row": model.t.tolist(),
        "r0": model.r0,
    }


def model_from_dict(d):
    return RsCameraModel(
        v=d["v"],
        w=d["w_per_row"],
        c0=d["c0"],
        t=d["t_per_row"],
        f=d["f_px"],
        lam=d["lambda_px"],
        r0=d["r0"],
    )


UNITS = {
    "image": "pixels, origin at the image center, (row, col)",
    "f_px": "pixels",
    "lambda_normalized": "division model on pixel coordinates divided by normalization_scale",
    "lambda_px": "division model on centered pixel coordinates",
    "normalization_scale": "half the image diagonal in pixels",
    "v": "linearized orientation relative to r_gs; rotation = polar(I + [v]x) r_gs",
    "w_per_row": "rotation vector per image row (radians)",
    "c0": "translation at the reference row, scene units",
    "t_per_row": "translation per image row, scene units",
    "r0": "reference row, pixels from the image center",
}


def result_dict(command, *, model=None, scale=None, r_gs=None, extra=None, config=None,
                seed=None, error=None):
    """Self-describing result object."""
    out = {"format": RESULT_FORMAT, "artifact_version": __version__, "command": command}
    if model is not None:
        out["model"] = model_to_dict(model, scale)
        out["r_gs"] = np.asarray(r_gs).tolist()
        out["units"] = UNITS
    if extra:
        out.update(extra)
    if config is not None:
        out["config"] = config
    if seed is not None:
        out["seed"] = seed
    out["error"] = error
    return out


def write_result(path, result):
    text = json.dumps(result, indent=1, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_result(path):
    with open(path) as fh:
        d = json.load(fh)
    if d.get("format") != RESULT_FORMAT:
        raise ValueError(f"{path}: not an rspose result file")
    return d
