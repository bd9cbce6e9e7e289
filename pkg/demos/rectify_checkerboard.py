"""Render a checkerboard through a rolling-shutter camera with radial
distortion, then undo both with the true model. Writes two PGM files."""

import sys

import numpy as np

from rspose.geom import RsCameraModel
from rspose.rectify import GrayImage, rectify_image, rectify_points, write_pgm


def checker(points, period=40.0):
    s = np.sin(np.pi * points[:, 0] / period) * np.sin(np.pi * points[:, 1] / period)
    return 127.5 + 127.5 * np.tanh(8.0 * s)


def main(prefix="checker"):
    H, W = 240, 320
    w = np.array([0.2, 1.0, 0.3])
    model = RsCameraModel(
        w=w / np.linalg.norm(w) * np.radians(30) / H,
        f=0.5 * W / np.tan(np.radians(30)),
        lam=-0.2 / (0.25 * (H**2 + W**2)),
    )
    ii, jj = np.mgrid[0:H, 0:W]
    c = np.array([(H - 1) / 2, (W - 1) / 2])
    x = np.c_[ii.ravel() - c[0], jj.ravel() - c[1]]
    distorted = GrayImage(np.rint(checker(rectify_points(x, model))).reshape(H, W))
    write_pgm(f"{prefix}_distorted.pgm", distorted)
    write_pgm(f"{prefix}_rectified.pgm", rectify_image(distorted, model))
    print(f"wrote {prefix}_distorted.pgm and {prefix}_rectified.pgm")


if __name__ == "__main__":
    main(*sys.argv[1:2])
